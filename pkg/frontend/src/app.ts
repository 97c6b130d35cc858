// Browser entry point. One requestAnimationFrame loop does everything:
// synthesize a frame from the sliders, hand it to the client (which
// keeps at most one frame un-acked), and redraw the last received pose.

import { DEFAULT_SLIDERS, synthesizeFrame, type SliderState } from "./handmodel.js";
import {
  parseConfig,
  SessionClient,
  wsUrl,
  type EventMsg,
  type PoseMsg,
  type SetParamsAck,
} from "./protocol.js";
import { renderScene } from "./scene.js";
import { applyEvent, applyPose, initialState, pressReleasePairs } from "./state.js";

const SIDE = "right";
const TECHNIQUES = ["attach", "direct", "hand", "ray"];

const config = parseConfig(window.location.search, window.location.hostname || "127.0.0.1", Number(window.location.port) || 8787);
const state = initialState(config.technique);

const canvas = document.getElementById("scene") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const banner = document.getElementById("banner") as HTMLDivElement;
const eventsBox = document.getElementById("events") as HTMLDivElement;
const statsBox = document.getElementById("stats") as HTMLDivElement;

interface SliderSpec {
  key: keyof SliderState;
  label: string;
  min: number;
  max: number;
  step: number;
}

const SLIDER_SPECS: SliderSpec[] = [
  { key: "wristX", label: "wrist x", min: -0.6, max: 0.6, step: 0.005 },
  { key: "wristY", label: "wrist y", min: 0.4, max: 1.6, step: 0.005 },
  { key: "wristZ", label: "wrist z", min: -0.1, max: 0.7, step: 0.005 },
  { key: "yawDeg", label: "wrist yaw", min: -90, max: 90, step: 1 },
  { key: "pitchDeg", label: "wrist pitch", min: -90, max: 90, step: 1 },
  { key: "rollDeg", label: "wrist roll", min: -90, max: 90, step: 1 },
  { key: "mcpFlex", label: "index MCP flex", min: 0, max: 1, step: 0.01 },
  { key: "pipFlex", label: "index PIP flex", min: 0, max: 1, step: 0.01 },
  { key: "thumbCurl", label: "thumb curl", min: 0, max: 1, step: 0.01 },
  { key: "grabCurl", label: "grab curl", min: 0, max: 1, step: 0.01 },
];

const PARAM_FIELDS = [
  { key: "arm_length", step: 0.05 },
  { key: "extension_deadzone", step: 0.01 },
  { key: "extension_gain", step: 0.1 },
  { key: "retraction_min", step: 0.01 },
];

function buildSliders(): void {
  const box = document.getElementById("sliders")!;
  for (const spec of SLIDER_SPECS) {
    const row = document.createElement("label");
    row.className = "row";
    const name = document.createElement("span");
    name.textContent = spec.label;
    const value = document.createElement("span");
    value.className = "val";
    const input = document.createElement("input");
    input.type = "range";
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.value = String(state.sliders[spec.key]);
    value.textContent = input.value;
    input.oninput = () => {
      state.sliders[spec.key] = Number(input.value);
      value.textContent = input.value;
    };
    row.append(name, input, value);
    box.appendChild(row);
  }
  const reset = document.createElement("button");
  reset.textContent = "reset hand";
  reset.onclick = () => {
    state.sliders = { ...DEFAULT_SLIDERS };
    box.replaceChildren();
    buildSliders();
  };
  box.appendChild(reset);
}

function buildParamPanel(): void {
  const box = document.getElementById("params")!;
  box.replaceChildren();

  const techRow = document.createElement("label");
  techRow.className = "row";
  const techName = document.createElement("span");
  techName.textContent = "technique";
  const select = document.createElement("select");
  for (const t of TECHNIQUES) {
    const opt = document.createElement("option");
    opt.value = t;
    opt.textContent = t;
    select.appendChild(opt);
  }
  select.value = String(state.paramPanel["technique"] ?? state.technique);
  select.onchange = () => client.requestParams({ technique: select.value });
  techRow.append(techName, select);
  box.appendChild(techRow);

  for (const field of PARAM_FIELDS) {
    const row = document.createElement("label");
    row.className = "row";
    const name = document.createElement("span");
    name.textContent = field.key.replaceAll("_", " ");
    const input = document.createElement("input");
    input.type = "number";
    input.step = String(field.step);
    const acked = state.paramPanel[field.key];
    input.value = acked === null || acked === undefined ? "" : String(acked);
    input.onchange = () => {
      if (input.value !== "") client.requestParams({ [field.key]: Number(input.value) });
    };
    row.append(name, input);
    box.appendChild(row);
  }
}

function showEvents(): void {
  const recent = state.eventLog.slice(-8).reverse();
  eventsBox.replaceChildren();
  for (const e of recent) {
    const line = document.createElement("div");
    line.textContent = `#${e.seq} ${e.side} ${e.gesture} ${e.kind}`;
    line.className = e.kind === "press" ? "press" : "release";
    eventsBox.appendChild(line);
  }
  const pairs = pressReleasePairs(state.eventLog, "thumb_button");
  statsBox.textContent = state.lastPose
    ? `seq ${state.lastPose.seq}  reach ${fmt(state.lastPose.reach[SIDE])} m  ` +
      `wrist ${vec(state.lastPose.poses[SIDE]?.wrist)}  thumb pairs ${pairs}`
    : "no pose yet";
}

function fmt(x: number | undefined): string {
  return x === undefined ? "-" : x.toFixed(3);
}

function vec(v: readonly number[] | undefined): string {
  return v === undefined ? "-" : `${v.map((c) => c.toFixed(3)).join(", ")}`;
}

const socket = new WebSocket(wsUrl(config));
const client = new SessionClient(socket as unknown as ConstructorParameters<typeof SessionClient>[0], config.technique, {
  onHello: () => {
    state.paramPanel = client.ackedParams;
    banner.className = "ok";
    banner.textContent = `connected (${config.host}:${config.port}, ${state.technique})`;
    buildParamPanel();
  },
  onPose: (msg: PoseMsg) => applyPose(state, msg),
  onEvent: (msg: EventMsg) => applyEvent(state, msg, performance.now() / 1000),
  onParams: (msg: SetParamsAck) => {
    state.paramPanel = msg.params;
    state.technique = String(msg.params["technique"] ?? state.technique);
    buildParamPanel();
  },
  onError: (msg) => {
    banner.className = msg.fatal ? "bad" : "warn";
    banner.textContent = `server: ${msg.message}`;
  },
  onState: (conn) => {
    state.connection = conn;
    if (conn === "closed") {
      banner.className = "bad";
      banner.textContent = "disconnected; reload to reconnect";
      for (const input of document.querySelectorAll("input, select, button")) {
        (input as HTMLInputElement).disabled = true;
      }
    }
  },
});

const t0 = performance.now();

function tick(): void {
  if (state.connection === "ready") {
    client.sendFrame(synthesizeFrame(state.sliders, (performance.now() - t0) / 1000, SIDE));
  }
  const flash = performance.now() / 1000 < state.flashUntil;
  renderScene(ctx, canvas.width, canvas.height, state.lastPose, SIDE, flash);
  showEvents();
  requestAnimationFrame(tick);
}

banner.className = "warn";
banner.textContent = `connecting to ${config.host}:${config.port} ...`;
buildSliders();
requestAnimationFrame(tick);
