// State-occupancy timeline derived from a simulation trace.

import type { SimTrace } from "./types.js";

export interface OccupancySegment {
  state: string;
  start: number;
  end: number;
}

/** Contiguous [start, end) spans per occupied state, covering [0, horizon].
 * The machine switches state at crossfade start, matching the simulator. */
export function occupancySegments(trace: SimTrace): OccupancySegment[] {
  const segments: OccupancySegment[] = [];
  let current: string | null = null;
  let since = 0;
  for (const event of trace.events) {
    if (event.event !== "entered" || event.state === undefined) {
      continue;
    }
    if (current !== null && event.t > since) {
      segments.push({ state: current, start: since, end: event.t });
    }
    current = event.state;
    since = event.t;
  }
  if (current !== null && trace.horizon > since) {
    segments.push({ state: current, start: since, end: trace.horizon });
  }
  return segments;
}

export function occupancyFractions(trace: SimTrace): Record<string, number> {
  const totals: Record<string, number> = {};
  for (const segment of occupancySegments(trace)) {
    totals[segment.state] = (totals[segment.state] ?? 0) + (segment.end - segment.start);
  }
  if (trace.horizon > 0) {
    for (const state of Object.keys(totals)) {
      totals[state] /= trace.horizon;
    }
  }
  return totals;
}

export interface InputMark {
  t: number;
  key: string;
}

export function inputMarks(trace: SimTrace): InputMark[] {
  return trace.events
    .filter((e) => e.event === "input" && e.key !== undefined)
    .map((e) => ({ t: e.t, key: e.key as string }));
}
