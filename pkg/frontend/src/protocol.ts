// Session protocol client. One JSON message per WebSocket text frame,
// mirroring the line-delimited TCP form of the same protocol.

export const PROTOCOL_VERSION = 1;

export type Vec = [number, number, number];
export type Quat = [number, number, number, number];

export interface PoseDict {
  position: Vec;
  rotation: Quat;
}

export interface HandDict {
  wrist: PoseDict;
  joints: Record<string, Vec>;
}

export interface FrameDict {
  t: number;
  hmd: PoseDict;
  hands: Record<string, HandDict>;
}

export interface ArmPoseDict {
  side: string;
  shoulder: Vec;
  elbow: Vec;
  wrist: Vec;
  hand_rotation: Quat;
  fingers: Record<string, Vec>;
}

export interface PoseMsg {
  kind: "pose";
  seq: number;
  t: number;
  poses: Record<string, ArmPoseDict>;
  pointers: Record<string, Vec>;
  extension: Record<string, number>;
  reach: Record<string, number>;
  physical: Record<string, { wrist: Vec; index_tip?: Vec }>;
}

export interface EventMsg {
  kind: "event";
  seq: number;
  event: { side: string; gesture: string; kind: string };
}

export interface HelloAck {
  kind: "hello";
  version: number;
  calibration: Record<string, number>;
  params: Record<string, unknown>;
}

export interface SetParamsAck {
  kind: "set_params";
  params: Record<string, unknown>;
}

export interface ErrorMsg {
  kind: "error";
  seq: number | null;
  message: string;
  fatal: boolean;
}

export interface SnapshotMsg {
  kind: "metrics_snapshot";
  frames: number;
  events: number;
  duration: number;
  pointer_path: Record<string, number>;
  physical_wrist_path: Record<string, number>;
}

export type ServerMsg = PoseMsg | EventMsg | HelloAck | SetParamsAck | ErrorMsg | SnapshotMsg;

// The subset of the WebSocket API the client touches; satisfied by the
// browser WebSocket and by the "ws" package in tests.
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
}

export type ConnState = "connecting" | "ready" | "closed";

export interface ClientHandlers {
  onPose?: (msg: PoseMsg) => void;
  onEvent?: (msg: EventMsg) => void;
  onHello?: (msg: HelloAck) => void;
  onParams?: (msg: SetParamsAck) => void;
  onError?: (msg: ErrorMsg) => void;
  onSnapshot?: (msg: SnapshotMsg) => void;
  onState?: (state: ConnState) => void;
}

export interface ExplorerConfig {
  host: string;
  port: number;
  technique: string;
}

export function parseConfig(search: string, fallbackHost = "127.0.0.1", fallbackPort = 8787): ExplorerConfig {
  const q = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  return {
    host: q.get("host") ?? fallbackHost,
    port: Number(q.get("port") ?? fallbackPort),
    technique: q.get("technique") ?? "attach",
  };
}

export function wsUrl(cfg: ExplorerConfig): string {
  return `ws://${cfg.host}:${cfg.port}/`;
}

// Drives one session: hello on open, then frames with a strict
// one-in-flight contract. While a frame awaits its pose (or error)
// reply, newer frames only overwrite the pending slot, so the freshest
// hand state goes out the moment the ack lands and nothing queues up.
export class SessionClient {
  state: ConnState = "connecting";
  ackedParams: Record<string, unknown> = {};
  calibration: Record<string, number> = {};
  // every parsed inbound message, in order; the scene audit checks that
  // displayed poses all exist in this log
  readonly log: ServerMsg[] = [];

  private nextSeq = 0;
  private inFlight: number | null = null;
  private pending: FrameDict | null = null;

  constructor(
    private socket: SocketLike,
    private technique: string,
    private handlers: ClientHandlers = {},
  ) {
    socket.onopen = () => {
      socket.send(
        JSON.stringify({
          kind: "hello",
          version: PROTOCOL_VERSION,
          params: { technique: this.technique },
        }),
      );
    };
    socket.onmessage = (ev) => this.receive(String(ev.data));
    socket.onclose = () => this.setState("closed");
    socket.onerror = () => this.setState("closed");
  }

  get framesInFlight(): number {
    return this.inFlight === null ? 0 : 1;
  }

  sendFrame(frame: FrameDict): void {
    if (this.state !== "ready") return;
    if (this.inFlight !== null) {
      this.pending = frame;
      return;
    }
    this.transmit(frame);
  }

  requestParams(patch: Record<string, unknown>): void {
    if (this.state !== "ready") return;
    this.socket.send(JSON.stringify({ kind: "set_params", params: patch }));
  }

  close(): void {
    this.socket.close();
  }

  private transmit(frame: FrameDict): void {
    const seq = this.nextSeq++;
    this.inFlight = seq;
    this.socket.send(JSON.stringify({ kind: "frame", seq, frame }));
  }

  private setState(state: ConnState): void {
    if (this.state === state) return;
    this.state = state;
    this.handlers.onState?.(state);
  }

  private receive(data: string): void {
    let msg: ServerMsg;
    try {
      msg = JSON.parse(data) as ServerMsg;
    } catch {
      return; // the server never sends non-JSON; drop defensively
    }
    this.log.push(msg);
    switch (msg.kind) {
      case "hello":
        this.calibration = msg.calibration;
        this.ackedParams = msg.params;
        this.setState("ready");
        this.handlers.onHello?.(msg);
        break;
      case "pose":
        this.settle(msg.seq);
        this.handlers.onPose?.(msg);
        break;
      case "event":
        this.handlers.onEvent?.(msg);
        break;
      case "set_params":
        this.ackedParams = msg.params;
        this.handlers.onParams?.(msg);
        break;
      case "error":
        if (msg.seq !== null) this.settle(msg.seq);
        if (msg.fatal) this.setState("closed");
        this.handlers.onError?.(msg);
        break;
      case "metrics_snapshot":
        this.handlers.onSnapshot?.(msg);
        break;
    }
  }

  private settle(seq: number): void {
    if (this.inFlight !== seq) return;
    this.inFlight = null;
    if (this.pending !== null) {
      const frame = this.pending;
      this.pending = null;
      this.transmit(frame);
    }
  }
}
