// Playback timeline helpers over server-fetched frames.

import type { Frame } from "./types.js";

export function tickCount(frames: Frame[]): number {
  return frames.length;
}

export function clipDuration(frames: Frame[]): number {
  return frames.length ? frames[frames.length - 1].t : 0;
}

/** Index of the frame whose time is nearest the cursor; exact midpoints
 * resolve toward the earlier frame. */
export function nearestFrameIndex(frames: Frame[], cursor: number): number {
  if (frames.length === 0) {
    return -1;
  }
  let best = 0;
  let bestDist = Math.abs(frames[0].t - cursor);
  for (let i = 1; i < frames.length; i++) {
    const dist = Math.abs(frames[i].t - cursor);
    if (dist < bestDist) {
      best = i;
      bestDist = dist;
    }
  }
  return best;
}

export function clampCursor(cursor: number, frames: Frame[]): number {
  const duration = clipDuration(frames);
  return Math.min(Math.max(cursor, 0), duration);
}

/** Cursor advance for one animation tick; loops back to 0 past the end
 * when looping, otherwise parks at the end and stops playback. */
export function advanceCursor(
  cursor: number,
  dt: number,
  frames: Frame[],
  loop: boolean,
): { cursor: number; playing: boolean } {
  const duration = clipDuration(frames);
  if (duration <= 0) {
    return { cursor: 0, playing: false };
  }
  let next = cursor + dt;
  if (next > duration) {
    if (loop) {
      next = next % duration;
    } else {
      return { cursor: duration, playing: false };
    }
  }
  return { cursor: next, playing: true };
}
