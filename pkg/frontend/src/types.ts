// Payload shapes of the rigmotion service API (see ../docs/http-api.md).

export interface JointTransform {
  /** world position [x, y, z], computed server-side */
  p: [number, number, number];
  /** world rotation quaternion [x, y, z, w] */
  r: [number, number, number, number];
}

export type PoseJoints = Record<string, JointTransform>;

export interface Topology {
  object_name: string;
  joints: string[];
  bones: [string, string][];
}

export interface RestPose {
  joints: PoseJoints;
}

export interface Frame {
  t: number;
  joints: PoseJoints;
}

export type EdgeMode = "clamp" | "loop";
export type GenerationMode = "few_shot" | "zero_shot";

export interface Demonstration {
  name: string;
  animation_string: string;
}

export interface GenerateRequest {
  request: string;
  mode: GenerationMode;
  demonstrations?: Demonstration[];
}

export interface GenerateResponse {
  clip_id: string;
  attempts: number;
  repair_notes: string[];
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details: {
    attempts?: number;
    last_errors?: string[];
    repair_notes?: string[];
    errors?: string[];
  };
}

export interface TraceEvent {
  t: number;
  event: "entered" | "crossfade_started" | "input";
  state?: string;
  from?: string;
  to?: string;
  fade?: number;
  key?: string;
}

export interface SimTrace {
  horizon: number;
  seed: number;
  events: TraceEvent[];
}

export interface SessionDoc {
  id: string;
  skeleton_id: string;
  history: {
    user_request: string;
    clip_id: string;
    attempts: number;
    created_at: number;
  }[];
  created_at: number;
}
