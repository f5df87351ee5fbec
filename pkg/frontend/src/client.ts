/**
 * Request/response client for one protocol session. Each call sends one
 * line and resolves with the response carrying the matching id; `error`
 * responses reject.
 */

import {
  type Actions,
  type HelloInfo,
  type Response,
  type SpaceInfo,
  type StepResult,
  parseResponse,
} from './protocol.js';
import { StdioTransport, TcpTransport, type StdioOptions, type Transport } from './transport.js';

export class ProtocolError extends Error {}

export class EnvClient {
  private nextId = 1;
  private readonly pending = new Map<
    number,
    { resolve: (r: Response) => void; reject: (e: Error) => void }
  >();
  private closed?: Error;

  constructor(private readonly transport: Transport) {
    transport.onLine((line) => this.dispatch(line));
    transport.onClose((error) => {
      this.closed = error ?? new Error('connection closed');
      for (const { reject } of this.pending.values()) reject(this.closed);
      this.pending.clear();
    });
  }

  /** Spawns a stdio server subprocess over the given dataset directory. */
  static spawnStdio(dataPath: string, options: StdioOptions = {}): EnvClient {
    return new EnvClient(new StdioTransport(dataPath, options));
  }

  static async connectTcp(host: string, port: number): Promise<EnvClient> {
    return new EnvClient(await TcpTransport.connect(host, port));
  }

  private dispatch(line: string): void {
    let response: Response;
    try {
      response = parseResponse(line);
    } catch (err) {
      throw new ProtocolError(`unparseable server line: ${line} (${err})`);
    }
    const id = typeof response.id === 'number' ? response.id : NaN;
    const waiter = this.pending.get(id);
    if (!waiter) return; // unsolicited line (e.g. error with null id)
    this.pending.delete(id);
    if (response.type === 'error') {
      waiter.reject(new ProtocolError(response.payload.message));
    } else {
      waiter.resolve(response);
    }
  }

  private request(type: 'hello' | 'spaces' | 'reset' | 'step', payload?: { actions: Actions }) {
    if (this.closed) return Promise.reject(this.closed);
    const id = this.nextId++;
    const line = JSON.stringify(payload === undefined ? { id, type } : { id, type, payload });
    return new Promise<Response>((resolve, reject) => {
      this.pending.set(id, { resolve, reject });
      this.transport.sendLine(line);
    });
  }

  async hello(): Promise<HelloInfo> {
    const response = await this.request('hello');
    if (response.type !== 'hello') throw new ProtocolError(`expected hello, got ${response.type}`);
    return response.payload;
  }

  async spaces(): Promise<SpaceInfo[] | SpaceInfo> {
    const response = await this.request('spaces');
    if (response.type !== 'spaces') throw new ProtocolError(`expected spaces, got ${response.type}`);
    return response.payload;
  }

  async reset(): Promise<StepResult> {
    const response = await this.request('reset');
    if (response.type !== 'result') throw new ProtocolError(`expected result, got ${response.type}`);
    return response.payload;
  }

  async step(actions: Actions): Promise<StepResult> {
    const response = await this.request('step', { actions });
    if (response.type === 'result') return response.payload;
    if (response.type === 'done' && response.payload) return response.payload;
    throw new ProtocolError(`expected result/done, got ${response.type}`);
  }

  close(): Promise<void> {
    return this.transport.close();
  }
}
