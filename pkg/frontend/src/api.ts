// Typed client for the rigmotion service. The fetch function is injected
// so contract tests can mock the server; the only configuration is the
// server base URL.

import type {
  ApiErrorBody,
  EdgeMode,
  Frame,
  GenerateRequest,
  GenerateResponse,
  RestPose,
  SessionDoc,
  SimTrace,
  Topology,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(`${body.code}: ${body.message}`);
    this.status = status;
    this.body = body;
  }
}

type FetchFn = (url: string, init?: RequestInit) => Promise<Response>;

export class StudioClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchFn = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let body: ApiErrorBody;
      try {
        body = (await response.json()) as ApiErrorBody;
      } catch {
        body = { code: `HTTP${response.status}`, message: response.statusText, details: {} };
      }
      throw new ApiError(response.status, body);
    }
    return (await response.json()) as T;
  }

  postSkeleton(objectJson: string): Promise<{ skeleton_id: string }> {
    return this.request("/skeletons", { method: "POST", body: objectJson });
  }

  getTopology(skeletonId: string): Promise<Topology> {
    return this.request(`/skeletons/${skeletonId}/topology`);
  }

  getRestPose(skeletonId: string): Promise<RestPose> {
    return this.request(`/skeletons/${skeletonId}/rest_pose`);
  }

  createSession(skeletonId: string): Promise<{ session_id: string }> {
    return this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ skeleton_id: skeletonId }),
    });
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request(`/sessions/${sessionId}`);
  }

  generate(sessionId: string, req: GenerateRequest): Promise<GenerateResponse> {
    return this.request(`/sessions/${sessionId}/generate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getFrames(clipId: string, skeletonId: string, fps: number, edge: EdgeMode): Promise<Frame[]> {
    const params = `skeleton=${skeletonId}&fps=${fps}&edge=${edge}`;
    return this.request(`/clips/${clipId}/frames?${params}`);
  }

  postController(text: string): Promise<{ controller_id: string }> {
    return this.request("/controllers", { method: "POST", body: text });
  }

  simulate(
    controllerId: string,
    inputs: [number, string][],
    horizon: number,
    seed: number,
  ): Promise<SimTrace> {
    return this.request(`/controllers/${controllerId}/simulate`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ inputs, horizon, seed }),
    });
  }
}
