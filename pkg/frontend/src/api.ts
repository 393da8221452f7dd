// Typed client for the annotation service HTTP+JSON API.

export const LABELS = ["bully", "aggressive", "spammer", "normal"] as const;
export type Label = (typeof LABELS)[number];

export interface Demographics {
  token: string;
  gender: string;
  age_band: string;
  nationality: string;
  education: string;
  income_band: string;
}

export interface TweetView {
  text: string;
  created_at: number;
  is_retweet: boolean;
}

export interface BatchPayload {
  batch_id: string;
  profile_description: string;
  tweets: TweetView[];
}

export interface AssignmentResponse {
  complete: boolean;
  batch_ids: string[];
  open_batch_ids?: string[];
  batches: BatchPayload[];
  definitions?: string;
  labels?: string[];
}

export interface SubmitResponse {
  ok: boolean;
  control: boolean;
  progress: number;
  total: number;
}

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

type FetchLike = typeof globalThis.fetch;

export class AnnotationApi {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = globalThis.fetch.bind(globalThis),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json().catch(() => null);
    if (!response.ok) {
      const reason =
        body && typeof body.error === "string"
          ? body.error
          : `HTTP ${response.status}`;
      throw new ApiError(reason, response.status);
    }
    return body as T;
  }

  registerWorker(demographics: Demographics): Promise<{ worker_id: string }> {
    return this.request("/workers", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(demographics),
    });
  }

  fetchAssignment(workerId: string): Promise<AssignmentResponse> {
    return this.request(`/workers/${encodeURIComponent(workerId)}/assignment`);
  }

  submitLabel(workerId: string, batchId: string, label: Label): Promise<SubmitResponse> {
    return this.request("/labels", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ worker_id: workerId, batch_id: batchId, label }),
    });
  }

  fetchStats(): Promise<Record<string, unknown>> {
    return this.request("/stats");
  }
}
