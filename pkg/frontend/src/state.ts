// Session state shared by the DOM layer and the headless tests. Poses
// are stored as received; nothing here derives arm geometry.

import type { ConnState, EventMsg, PoseMsg } from "./protocol.js";
import { DEFAULT_SLIDERS, type SliderState } from "./handmodel.js";

export interface EventLogEntry {
  seq: number;
  side: string;
  gesture: string;
  kind: string;
}

export interface ExplorerState {
  connection: ConnState;
  technique: string;
  sliders: SliderState;
  lastPose: PoseMsg | null;
  eventLog: EventLogEntry[];
  paramPanel: Record<string, unknown>;
  // audit trail: every pose object ever displayed, by reference, so
  // tests can prove each one came straight from the message log
  displayed: PoseMsg[];
  flashUntil: number; // scene timestamp until which the pointer flashes
}

export function initialState(technique: string): ExplorerState {
  return {
    connection: "connecting",
    technique,
    sliders: { ...DEFAULT_SLIDERS },
    lastPose: null,
    eventLog: [],
    paramPanel: {},
    displayed: [],
    flashUntil: 0,
  };
}

export function applyPose(state: ExplorerState, msg: PoseMsg): void {
  state.lastPose = msg;
  state.displayed.push(msg);
}

export function applyEvent(state: ExplorerState, msg: EventMsg, now: number): void {
  state.eventLog.push({ seq: msg.seq, ...msg.event });
  state.flashUntil = now + 0.4;
}

export function pressReleasePairs(log: EventLogEntry[], gesture: string): number {
  let pairs = 0;
  let open = false;
  for (const e of log) {
    if (e.gesture !== gesture) continue;
    if (e.kind === "press") open = true;
    else if (e.kind === "release" && open) {
      pairs += 1;
      open = false;
    }
  }
  return pairs;
}
