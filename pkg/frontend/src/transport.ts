/**
 * Line-based transports: a served subprocess over stdio (default) and a
 * TCP socket. Both deliver one callback per received line.
 */

import { spawn, type ChildProcessWithoutNullStreams } from 'node:child_process';
import net from 'node:net';
import readline from 'node:readline';

export interface Transport {
  sendLine(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: (error?: Error) => void): void;
  close(): Promise<void>;
}

export interface StdioOptions {
  /** Interpreter used to launch the server (default "python3"). */
  python?: string;
  /** Extra CLI arguments appended after `serve --data <path> --stdio`. */
  extraArgs?: string[];
}

/** Spawns `python3 -m gridflex.cli serve --data <path> --stdio` and owns it. */
export class StdioTransport implements Transport {
  private readonly child: ChildProcessWithoutNullStreams;
  private readonly lineHandlers: Array<(line: string) => void> = [];
  private readonly closeHandlers: Array<(error?: Error) => void> = [];
  private stderrTail = '';

  constructor(dataPath: string, options: StdioOptions = {}) {
    const python = options.python ?? 'python3';
    const args = ['-m', 'gridflex.cli', 'serve', '--data', dataPath, '--stdio'];
    if (options.extraArgs) args.push(...options.extraArgs);
    this.child = spawn(python, args, { stdio: ['pipe', 'pipe', 'pipe'] });
    const rl = readline.createInterface({ input: this.child.stdout });
    rl.on('line', (line) => {
      for (const cb of this.lineHandlers) cb(line);
    });
    this.child.stderr.on('data', (chunk: Buffer) => {
      this.stderrTail = (this.stderrTail + chunk.toString()).slice(-4096);
    });
    this.child.on('close', (code) => {
      const error =
        code === 0 || code === null
          ? undefined
          : new Error(`server exited with code ${code}: ${this.stderrTail}`);
      for (const cb of this.closeHandlers) cb(error);
    });
  }

  sendLine(line: string): void {
    this.child.stdin.write(line + '\n');
  }

  onLine(cb: (line: string) => void): void {
    this.lineHandlers.push(cb);
  }

  onClose(cb: (error?: Error) => void): void {
    this.closeHandlers.push(cb);
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      this.child.once('close', () => resolve());
      this.child.stdin.end();
      // EOF terminates the stdio server; kill only if it lingers
      const timer = setTimeout(() => this.child.kill(), 2000);
      this.child.once('close', () => clearTimeout(timer));
    });
  }
}

/** Connects to a `gridflex serve --tcp host:port` server. */
export class TcpTransport implements Transport {
  private readonly lineHandlers: Array<(line: string) => void> = [];
  private readonly closeHandlers: Array<(error?: Error) => void> = [];

  private constructor(private readonly socket: net.Socket) {
    const rl = readline.createInterface({ input: socket });
    rl.on('line', (line) => {
      for (const cb of this.lineHandlers) cb(line);
    });
    socket.on('close', () => {
      for (const cb of this.closeHandlers) cb(undefined);
    });
  }

  static connect(host: string, port: number, timeoutMs = 5000): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.createConnection({ host, port });
      const timer = setTimeout(() => {
        socket.destroy();
        reject(new Error(`connect timeout to ${host}:${port}`));
      }, timeoutMs);
      socket.once('connect', () => {
        clearTimeout(timer);
        resolve(new TcpTransport(socket));
      });
      socket.once('error', (err) => {
        clearTimeout(timer);
        reject(err);
      });
    });
  }

  sendLine(line: string): void {
    this.socket.write(line + '\n');
  }

  onLine(cb: (line: string) => void): void {
    this.lineHandlers.push(cb);
  }

  onClose(cb: (error?: Error) => void): void {
    this.closeHandlers.push(cb);
  }

  close(): Promise<void> {
    return new Promise((resolve) => {
      this.socket.once('close', () => resolve());
      this.socket.end();
    });
  }
}
