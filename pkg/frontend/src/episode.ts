/**
 * Episode driver: runs a policy to completion over a client session and
 * collects the district net series (sum of per-building nets, in server
 * order, so the values match the server's own trackers bit-for-bit).
 */

import type { EnvClient } from './client.js';
import type { StepResult } from './protocol.js';

export type Policy = (states: number[][], stepIndex: number) => number[][];

export interface EpisodeRecord {
  steps: number;
  netSeries: number[];
  totalReward: number;
}

function buildingStates(result: StepResult): number[][] {
  const states = result.states;
  if (states.length > 0 && typeof states[0] === 'number') {
    throw new Error('central-mode states: this driver expects decentralized mode');
  }
  return states as number[][];
}

export async function runEpisode(client: EnvClient, policy: Policy): Promise<EpisodeRecord> {
  let result = await client.reset();
  const netSeries: number[] = [];
  let totalReward = 0;
  let steps = 0;
  while (!result.done) {
    const actions = policy(buildingStates(result), steps);
    result = await client.step(actions);
    steps += 1;
    if (!result.info) throw new Error('step response missing info');
    netSeries.push(result.info.reduce((acc, rec) => acc + rec.e_net, 0));
    if (Array.isArray(result.rewards)) {
      totalReward += result.rewards.reduce((a, b) => a + b, 0);
    } else if (typeof result.rewards === 'number') {
      totalReward += result.rewards;
    }
  }
  return { steps, netSeries, totalReward };
}

/** Serializes a net series in the CSV layout the scoring CLI accepts. */
export function netSeriesCsv(netSeries: number[]): string {
  return ['net_electric_consumption', ...netSeries.map((v) => String(v))].join('\n') + '\n';
}
