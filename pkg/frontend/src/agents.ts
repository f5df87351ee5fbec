/**
 * Example controllers: the fixed time-of-day rule-based policy (identical
 * constants to the server-side baseline, so a client-side run normalizes
 * to exactly 1.0) and a seeded random agent.
 */

export const CHARGE_HOURS = new Set([22, 23, 24, 1, 2, 3, 4, 5, 6, 7, 8]);
export const DISCHARGE_HOURS = new Set([9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21]);
export const CHARGE_RATE = 1 / CHARGE_HOURS.size;
export const DISCHARGE_RATE = 1 / DISCHARGE_HOURS.size;

/** One action vector per building: charge at night, discharge by day. */
export function rbcActions(hour: number, actionDims: number[]): number[][] {
  if (!Number.isInteger(hour) || hour < 1 || hour > 24) {
    throw new Error(`hour must be in 1..24, got ${hour}`);
  }
  let value = 0;
  if (CHARGE_HOURS.has(hour)) value = CHARGE_RATE;
  else if (DISCHARGE_HOURS.has(hour)) value = -DISCHARGE_RATE;
  return actionDims.map((d) => new Array<number>(d).fill(value));
}

/** Small deterministic PRNG (mulberry32) so runs are reproducible. */
export function makeRng(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomActions(rng: () => number, actionDims: number[]): number[][] {
  return actionDims.map((d) => Array.from({ length: d }, () => rng() * 2 - 1));
}
