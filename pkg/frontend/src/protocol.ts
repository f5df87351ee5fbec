/**
 * Wire types for the line-delimited JSON environment protocol.
 *
 * Every request carries a client-assigned `id` that the server echoes in
 * exactly one response line. See ../../PROTOCOL.md for the byte-level
 * reference.
 */

import { z } from 'zod';

export const PROTOCOL_VERSION = 1;

export type MessageId = number;

/** Per-building action vectors (decentralized) or one flat vector (central). */
export type Actions = number[][] | number[];

export interface Request {
  id: MessageId;
  type: 'hello' | 'spaces' | 'reset' | 'step';
  payload?: { actions: Actions };
}

const HelloPayload = z.object({
  protocol: z.number(),
  buildings: z.array(z.string()),
  central_agent: z.boolean(),
  period: z.tuple([z.number(), z.number()]),
  action_dims: z.array(z.number().int()),
});

const SpaceRecord = z.object({
  state_names: z.array(z.string()),
  state_low: z.array(z.number()),
  state_high: z.array(z.number()),
  action_names: z.array(z.string()),
  action_low: z.array(z.number()),
  action_high: z.array(z.number()),
});

const StepInfo = z
  .object({
    building_id: z.string(),
    e_net: z.number(),
    e_cooling: z.number(),
    e_dhw: z.number(),
    e_appliances: z.number(),
    e_battery_grid_side: z.number(),
    pv_gen: z.number(),
    executed_actions: z.record(z.number()),
  })
  .passthrough();

const ResultPayload = z.object({
  states: z.union([z.array(z.array(z.number())), z.array(z.number())]),
  rewards: z.union([z.array(z.number()), z.number()]).optional(),
  done: z.boolean(),
  info: z.array(StepInfo).optional(),
});

export const Response = z.discriminatedUnion('type', [
  z.object({ id: z.unknown(), type: z.literal('hello'), payload: HelloPayload }),
  z.object({
    id: z.unknown(),
    type: z.literal('spaces'),
    payload: z.union([z.array(SpaceRecord), SpaceRecord]),
  }),
  z.object({ id: z.unknown(), type: z.literal('result'), payload: ResultPayload }),
  z.object({ id: z.unknown(), type: z.literal('done'), payload: ResultPayload.optional() }),
  z.object({
    id: z.unknown(),
    type: z.literal('error'),
    payload: z.object({ message: z.string() }),
  }),
]);

export type Response = z.infer<typeof Response>;
export type HelloInfo = z.infer<typeof HelloPayload>;
export type SpaceInfo = z.infer<typeof SpaceRecord>;
export type StepResult = z.infer<typeof ResultPayload>;

export function parseResponse(line: string): Response {
  return Response.parse(JSON.parse(line));
}
