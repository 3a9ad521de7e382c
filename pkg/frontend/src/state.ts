// Studio view state and its transitions. Pure functions over immutable
// snapshots so the contract tests can drive flows without a DOM.

import type { ApiErrorBody, EdgeMode, Frame, GenerationMode } from "./types.js";

export interface HistoryEntry {
  user_request: string;
  clip_id: string;
  attempts: number;
}

export interface Notice {
  kind: "error" | "info";
  /** lines shown verbatim in the notification panel */
  lines: string[];
}

export interface ViewState {
  skeletonId: string | null;
  sessionId: string | null;
  clipId: string | null;
  frames: Frame[];
  cursor: number;
  playing: boolean;
  edge: EdgeMode;
  mode: GenerationMode;
  history: HistoryEntry[];
  pendingGenerate: boolean;
  notices: Notice[];
}

export function initialState(): ViewState {
  return {
    skeletonId: null,
    sessionId: null,
    clipId: null,
    frames: [],
    cursor: 0,
    playing: false,
    edge: "clamp",
    mode: "few_shot",
    history: [],
    pendingGenerate: false,
    notices: [],
  };
}

export function skeletonLoaded(state: ViewState, skeletonId: string, sessionId: string): ViewState {
  return {
    ...initialState(),
    skeletonId,
    sessionId,
    edge: state.edge,
    mode: state.mode,
  };
}

/** At most one generate request may be in flight per session; callers
 * must not issue another until the first settles. */
export function generateStarted(state: ViewState): ViewState {
  if (state.pendingGenerate) {
    throw new Error("a generate request is already in flight for this session");
  }
  return { ...state, pendingGenerate: true };
}

export function generateSucceeded(
  state: ViewState,
  userRequest: string,
  clipId: string,
  attempts: number,
  repairNotes: string[],
): ViewState {
  const notices = [...state.notices];
  if (repairNotes.length > 0) {
    notices.push({ kind: "info", lines: ["Repaired during generation:", ...repairNotes] });
  }
  return {
    ...state,
    pendingGenerate: false,
    clipId,
    frames: [],
    cursor: 0,
    playing: false,
    history: [...state.history, { user_request: userRequest, clip_id: clipId, attempts }],
    notices,
  };
}

/** Server error bodies surface verbatim; nothing fails silently. */
export function generateFailed(state: ViewState, status: number, body: ApiErrorBody): ViewState {
  const lines = [`${body.code} (HTTP ${status}): ${body.message}`];
  for (const note of body.details.repair_notes ?? []) {
    lines.push(`repair: ${note}`);
  }
  for (const err of body.details.last_errors ?? []) {
    lines.push(`error: ${err}`);
  }
  return {
    ...state,
    pendingGenerate: false,
    notices: [...state.notices, { kind: "error", lines }],
  };
}

export function framesLoaded(state: ViewState, frames: Frame[]): ViewState {
  return { ...state, frames, cursor: 0, playing: frames.length > 1 };
}

export function setEdge(state: ViewState, edge: EdgeMode): ViewState {
  // caller refetches frames with the new edge mode
  return { ...state, edge, frames: [], playing: false, cursor: 0 };
}

export function selectHistoryClip(state: ViewState, clipId: string): ViewState {
  return { ...state, clipId, frames: [], cursor: 0, playing: false };
}

export function dismissNotices(state: ViewState): ViewState {
  return { ...state, notices: [] };
}
