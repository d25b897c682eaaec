// Single source of truth for rendering: the latest server frame plus
// connection metadata. The UI never simulates anything itself.

import type { DemoInfoT, ServerMsgT, StateFrameT } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface ViewModel {
  frame: StateFrameT | null;
  connection: ConnectionStatus;
  mouseWorld: [number, number] | null;
  demos: DemoInfoT[];
  lastSavedPath: string | null;
  lastError: string | null;
}

export function initialViewModel(): ViewModel {
  return {
    frame: null,
    connection: "connecting",
    mouseWorld: null,
    demos: [],
    lastSavedPath: null,
    lastError: null,
  };
}

export function applyServerMsg(vm: ViewModel, msg: ServerMsgT): ViewModel {
  switch (msg.type) {
    case "state":
      return { ...vm, frame: msg };
    case "saved":
      return { ...vm, lastSavedPath: msg.path };
    case "error":
      return { ...vm, lastError: msg.message };
  }
}

export function setConnection(vm: ViewModel, status: ConnectionStatus): ViewModel {
  return { ...vm, connection: status };
}

export function setMouseWorld(vm: ViewModel, pos: [number, number]): ViewModel {
  return { ...vm, mouseWorld: pos };
}

export function setDemos(vm: ViewModel, demos: DemoInfoT[]): ViewModel {
  return { ...vm, demos };
}
