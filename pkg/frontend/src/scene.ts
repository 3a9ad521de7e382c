// Render model for the stick figure. Every joint position comes straight
// from the server (rest_pose or frames); this module only projects world
// coordinates onto the canvas plane and fits them into a viewport. No
// kinematics happen client-side.

import type { PoseJoints } from "./types.js";

export interface JointSphere {
  name: string;
  x: number;
  y: number;
  /** depth along the camera axis, for draw ordering */
  depth: number;
}

export interface BoneSegment {
  from: string;
  to: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface SceneModel {
  joints: JointSphere[];
  bones: BoneSegment[];
}

// Orthographic front view: world x goes right, world y goes up (canvas y
// is flipped by the fit transform), world z is depth.
function project(p: [number, number, number]): { x: number; y: number; depth: number } {
  return { x: p[0], y: p[1], depth: p[2] };
}

export function buildScene(pose: PoseJoints, bones: [string, string][]): SceneModel {
  const joints: JointSphere[] = Object.entries(pose).map(([name, jt]) => {
    const pt = project(jt.p);
    return { name, x: pt.x, y: pt.y, depth: pt.depth };
  });
  const byName = new Map(joints.map((j) => [j.name, j]));
  const segments: BoneSegment[] = [];
  for (const [from, to] of bones) {
    const a = byName.get(from);
    const b = byName.get(to);
    if (a && b) {
      segments.push({ from, to, x1: a.x, y1: a.y, x2: b.x, y2: b.y });
    }
  }
  return { joints, bones: segments };
}

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface FitTransform {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Uniform scale-and-center of scene coordinates into canvas pixels;
 * world +y maps to canvas up. Degenerate (single-point) scenes get a
 * unit scale. */
export function fitToViewport(scene: SceneModel, viewport: Viewport): FitTransform {
  const xs = scene.joints.map((j) => j.x);
  const ys = scene.joints.map((j) => j.y);
  if (xs.length === 0) {
    return { scale: 1, offsetX: viewport.width / 2, offsetY: viewport.height / 2 };
  }
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const usableW = viewport.width - 2 * viewport.margin;
  const usableH = viewport.height - 2 * viewport.margin;
  const scale = spanX === 0 && spanY === 0
    ? 1
    : Math.min(spanX > 0 ? usableW / spanX : Infinity, spanY > 0 ? usableH / spanY : Infinity);
  const midX = (minX + maxX) / 2;
  const midY = (minY + maxY) / 2;
  return {
    scale,
    offsetX: viewport.width / 2 - midX * scale,
    offsetY: viewport.height / 2 + midY * scale,
  };
}

export function toCanvas(x: number, y: number, fit: FitTransform): { x: number; y: number } {
  return { x: x * fit.scale + fit.offsetX, y: -y * fit.scale + fit.offsetY };
}
