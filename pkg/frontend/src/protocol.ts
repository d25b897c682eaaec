// Wire format of the recording service: JSON text frames over a WebSocket.
// Every outgoing message is validated before it is sent.

import { z } from "zod";

export const ResetMsg = z.object({
  type: z.literal("reset"),
  target: z.tuple([z.number(), z.number(), z.number()]),
});

export const MouseMsg = z.object({
  type: z.literal("mouse"),
  goal: z.tuple([z.number(), z.number()]),
});

export const RecordMsg = z.object({
  type: z.literal("record"),
  on: z.boolean(),
});

export const SaveMsg = z.object({
  type: z.literal("save"),
  id: z.string().min(1),
});

export const ClientMsg = z.discriminatedUnion("type", [
  ResetMsg,
  MouseMsg,
  RecordMsg,
  SaveMsg,
]);

const modeToken = z.string().regex(/^(SE|(ST|SU|SD)[+-][xy])$/);

export const StateFrame = z.object({
  type: z.literal("state"),
  t: z.number().int().nonnegative(),
  x: z.array(z.number()).length(7),
  mode: modeToken,
  recording: z.boolean(),
  target: z.tuple([z.number(), z.number(), z.number()]),
});

export const SavedFrame = z.object({
  type: z.literal("saved"),
  path: z.string(),
});

export const ErrorFrame = z.object({
  type: z.literal("error"),
  message: z.string(),
});

export const ServerMsg = z.discriminatedUnion("type", [
  StateFrame,
  SavedFrame,
  ErrorFrame,
]);

export const DemoInfo = z.object({
  id: z.string(),
  target: z.array(z.number()).length(3),
  n_switches: z.number().int().nonnegative(),
});

export const DemoListing = z.array(DemoInfo);

export type ResetMsgT = z.infer<typeof ResetMsg>;
export type MouseMsgT = z.infer<typeof MouseMsg>;
export type ClientMsgT = z.infer<typeof ClientMsg>;
export type StateFrameT = z.infer<typeof StateFrame>;
export type ServerMsgT = z.infer<typeof ServerMsg>;
export type DemoInfoT = z.infer<typeof DemoInfo>;

export function encodeClientMsg(msg: ClientMsgT): string {
  return JSON.stringify(ClientMsg.parse(msg));
}

export function decodeServerMsg(raw: string): ServerMsgT {
  return ServerMsg.parse(JSON.parse(raw));
}
