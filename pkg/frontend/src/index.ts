export { EnvClient, ProtocolError } from './client.js';
export { StdioTransport, TcpTransport, type Transport, type StdioOptions } from './transport.js';
export {
  PROTOCOL_VERSION,
  parseResponse,
  type Actions,
  type HelloInfo,
  type Response,
  type SpaceInfo,
  type StepResult,
} from './protocol.js';
export {
  CHARGE_HOURS,
  CHARGE_RATE,
  DISCHARGE_HOURS,
  DISCHARGE_RATE,
  makeRng,
  randomActions,
  rbcActions,
} from './agents.js';
export { netSeriesCsv, runEpisode, type EpisodeRecord, type Policy } from './episode.js';
