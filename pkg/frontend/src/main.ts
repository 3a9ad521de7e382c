// DOM glue for the studio. All layout state lives in ViewState; all
// math lives server-side (frames/rest_pose endpoints) or in the pure
// helpers under src/.

import { ApiError, StudioClient } from "./api.js";
import { inputMarks, occupancyFractions, occupancySegments } from "./controller.js";
import { buildScene, fitToViewport, toCanvas, type SceneModel } from "./scene.js";
import {
  advanceCursor,
  clampCursor,
  clipDuration,
  nearestFrameIndex,
  tickCount,
} from "./timeline.js";
import * as vs from "./state.js";
import type { PoseJoints, SimTrace, Topology } from "./types.js";

const FRAME_FPS = 30;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node as T;
}

let state = vs.initialState();
let client = new StudioClient(readBaseUrl());
let topology: Topology | null = null;
let restPose: PoseJoints | null = null;
let lastTick = performance.now();

function readBaseUrl(): string {
  const input = document.getElementById("server-url") as HTMLInputElement | null;
  return input?.value ?? "http://127.0.0.1:7878";
}

function setState(next: vs.ViewState): void {
  state = next;
  renderPanels();
}

// --- canvas -------------------------------------------------------------------

function currentScene(): SceneModel | null {
  if (!topology) {
    return null;
  }
  if (state.frames.length > 0) {
    const index = nearestFrameIndex(state.frames, state.cursor);
    return buildScene(state.frames[index].joints, topology.bones);
  }
  return restPose ? buildScene(restPose, topology.bones) : null;
}

function drawScene(): void {
  const canvas = el<HTMLCanvasElement>("viewport");
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const scene = currentScene();
  if (!scene) {
    ctx.fillStyle = "#667";
    ctx.fillText("Load an object JSON to begin", 20, 30);
    return;
  }
  const fit = fitToViewport(scene, { width: canvas.width, height: canvas.height, margin: 40 });
  ctx.strokeStyle = "#8aa";
  ctx.lineWidth = 3;
  for (const bone of scene.bones) {
    const a = toCanvas(bone.x1, bone.y1, fit);
    const b = toCanvas(bone.x2, bone.y2, fit);
    ctx.beginPath();
    ctx.moveTo(a.x, a.y);
    ctx.lineTo(b.x, b.y);
    ctx.stroke();
  }
  ctx.fillStyle = "#2b6";
  for (const joint of scene.joints) {
    const p = toCanvas(joint.x, joint.y, fit);
    ctx.beginPath();
    ctx.arc(p.x, p.y, 6, 0, Math.PI * 2);
    ctx.fill();
  }
}

function animationTick(now: number): void {
  const dt = (now - lastTick) / 1000;
  lastTick = now;
  if (state.playing && state.frames.length > 0) {
    const advanced = advanceCursor(state.cursor, dt, state.frames, state.edge === "loop");
    state = { ...state, cursor: advanced.cursor, playing: advanced.playing };
    syncTimeline();
  }
  drawScene();
  requestAnimationFrame(animationTick);
}

// --- panels -------------------------------------------------------------------

function syncTimeline(): void {
  const slider = el<HTMLInputElement>("timeline");
  const duration = clipDuration(state.frames);
  slider.max = String(duration);
  slider.step = duration > 0 ? String(duration / Math.max(tickCount(state.frames) - 1, 1)) : "0.1";
  slider.value = String(state.cursor);
  el<HTMLSpanElement>("time-label").textContent =
    `${state.cursor.toFixed(2)} / ${duration.toFixed(2)} s  (${tickCount(state.frames)} ticks)`;
  el<HTMLButtonElement>("play-toggle").textContent = state.playing ? "Pause" : "Play";
}

function renderPanels(): void {
  el<HTMLButtonElement>("generate").disabled = state.pendingGenerate || !state.sessionId;
  el<HTMLSpanElement>("object-label").textContent = topology
    ? `${topology.object_name} (${topology.joints.length} joints)`
    : "no object loaded";

  const noticePanel = el<HTMLDivElement>("notices");
  noticePanel.innerHTML = "";
  for (const notice of state.notices) {
    const box = document.createElement("div");
    box.className = `notice ${notice.kind}`;
    for (const line of notice.lines) {
      const row = document.createElement("div");
      row.textContent = line;
      box.appendChild(row);
    }
    noticePanel.appendChild(box);
  }

  const historyPanel = el<HTMLUListElement>("history");
  historyPanel.innerHTML = "";
  state.history.forEach((entry) => {
    const item = document.createElement("li");
    const button = document.createElement("button");
    button.textContent = `${entry.user_request} (${entry.attempts} attempt${entry.attempts > 1 ? "s" : ""})`;
    if (entry.clip_id === state.clipId) {
      button.classList.add("active");
    }
    button.addEventListener("click", () => {
      void selectClip(entry.clip_id);
    });
    item.appendChild(button);
    historyPanel.appendChild(item);
  });
  syncTimeline();
}

function surface(error: unknown): void {
  if (error instanceof ApiError) {
    setState(vs.generateFailed(state, error.status, error.body));
  } else {
    setState({
      ...state,
      pendingGenerate: false,
      notices: [...state.notices, { kind: "error", lines: [String(error)] }],
    });
  }
}

// --- flows --------------------------------------------------------------------

async function loadSkeleton(file: File): Promise<void> {
  try {
    const text = await file.text();
    client = new StudioClient(readBaseUrl());
    const { skeleton_id } = await client.postSkeleton(text);
    const { session_id } = await client.createSession(skeleton_id);
    topology = await client.getTopology(skeleton_id);
    restPose = (await client.getRestPose(skeleton_id)).joints;
    setState(vs.skeletonLoaded(state, skeleton_id, session_id));
  } catch (error) {
    surface(error);
  }
}

async function fetchFrames(clipId: string): Promise<void> {
  if (!state.skeletonId) {
    return;
  }
  const frames = await client.getFrames(clipId, state.skeletonId, FRAME_FPS, state.edge);
  setState(vs.framesLoaded(state, frames));
}

async function selectClip(clipId: string): Promise<void> {
  try {
    setState(vs.selectHistoryClip(state, clipId));
    await fetchFrames(clipId);
  } catch (error) {
    surface(error);
  }
}

async function generate(): Promise<void> {
  const request = el<HTMLTextAreaElement>("prompt").value.trim();
  if (!request || !state.sessionId) {
    return;
  }
  const mode = el<HTMLSelectElement>("mode").value as "few_shot" | "zero_shot";
  try {
    setState(vs.generateStarted({ ...state, mode }));
    const result = await client.generate(state.sessionId, { request, mode });
    setState(
      vs.generateSucceeded(state, request, result.clip_id, result.attempts, result.repair_notes),
    );
    await fetchFrames(result.clip_id);
  } catch (error) {
    surface(error);
  }
}

async function simulateController(): Promise<void> {
  const program = el<HTMLTextAreaElement>("controller-text").value;
  const seed = Number(el<HTMLInputElement>("sim-seed").value) || 0;
  const horizon = Number(el<HTMLInputElement>("sim-horizon").value) || 10;
  let inputs: [number, string][] = [];
  const rawInputs = el<HTMLInputElement>("sim-inputs").value.trim();
  if (rawInputs) {
    // "1.0:space, 4:escape" shorthand
    inputs = rawInputs.split(",").map((pair) => {
      const [t, key] = pair.split(":");
      return [Number(t.trim()), (key ?? "").trim()] as [number, string];
    });
  }
  try {
    const { controller_id } = await client.postController(program);
    const trace = await client.simulate(controller_id, inputs, horizon, seed);
    renderTrace(trace);
  } catch (error) {
    surface(error);
  }
}

const STATE_COLORS = ["#2b6", "#46a", "#a64", "#a4a", "#884", "#488"];

function renderTrace(trace: SimTrace): void {
  const canvas = el<HTMLCanvasElement>("trace-view");
  const ctx = canvas.getContext("2d");
  if (!ctx) {
    return;
  }
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const segments = occupancySegments(trace);
  const states = [...new Set(segments.map((s) => s.state))];
  const scale = canvas.width / Math.max(trace.horizon, 1e-9);
  for (const segment of segments) {
    ctx.fillStyle = STATE_COLORS[states.indexOf(segment.state) % STATE_COLORS.length];
    ctx.fillRect(segment.start * scale, 10, (segment.end - segment.start) * scale, 30);
  }
  ctx.fillStyle = "#c33";
  for (const mark of inputMarks(trace)) {
    ctx.fillRect(mark.t * scale - 1, 5, 2, 40);
  }
  const fractions = occupancyFractions(trace);
  const legend = states
    .map((s) => `${s}: ${(100 * (fractions[s] ?? 0)).toFixed(0)}%`)
    .join("   ");
  el<HTMLDivElement>("trace-legend").textContent = legend;
}

// --- wiring -------------------------------------------------------------------

export function start(): void {
  el<HTMLInputElement>("skeleton-file").addEventListener("change", (event) => {
    const file = (event.target as HTMLInputElement).files?.[0];
    if (file) {
      void loadSkeleton(file);
    }
  });
  el<HTMLButtonElement>("generate").addEventListener("click", () => {
    void generate();
  });
  el<HTMLInputElement>("timeline").addEventListener("input", (event) => {
    const value = Number((event.target as HTMLInputElement).value);
    state = { ...state, cursor: clampCursor(value, state.frames), playing: false };
    syncTimeline();
  });
  el<HTMLButtonElement>("play-toggle").addEventListener("click", () => {
    state = { ...state, playing: !state.playing && state.frames.length > 1 };
    syncTimeline();
  });
  el<HTMLSelectElement>("edge").addEventListener("change", (event) => {
    const edge = (event.target as HTMLSelectElement).value as "clamp" | "loop";
    setState(vs.setEdge(state, edge));
    if (state.clipId) {
      void fetchFrames(state.clipId).catch(surface);
    }
  });
  el<HTMLButtonElement>("simulate").addEventListener("click", () => {
    void simulateController();
  });
  el<HTMLButtonElement>("dismiss-notices").addEventListener("click", () => {
    setState(vs.dismissNotices(state));
  });
  renderPanels();
  requestAnimationFrame(animationTick);
}

if (typeof document !== "undefined" && document.getElementById("viewport")) {
  start();
}
