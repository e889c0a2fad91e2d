/** Thin typed client over the review service. No state beyond base URL + token. */

import type {
  Category,
  Decision,
  QueueNext,
  SampleDetail,
  SampleList,
  SampleStatus,
  SampleSummary,
  Stats,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }

  /** 409s mean another session decided first; callers refresh instead of failing. */
  get isConflict(): boolean {
    return this.status === 409;
  }
}

export interface VerdictPayload {
  annotator_id: string;
  relevant: boolean;
  well_formalized: boolean;
  logically_sound: boolean;
  category: Category;
  notes: string;
}

export interface MetaPayload {
  reviewer_id: string;
  decision: Decision;
  rationale: string;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly token: string | null = null,
  ) {}

  private async request<T>(path: string, init: RequestInit = {}): Promise<T> {
    const headers: Record<string, string> = {
      ...(init.body ? { "Content-Type": "application/json" } : {}),
      ...(this.token ? { "X-Auth-Token": this.token } : {}),
    };
    const resp = await fetch(this.baseUrl + path, { ...init, headers });
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (typeof body?.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep statusText
      }
      throw new ApiError(resp.status, detail);
    }
    return (await resp.json()) as T;
  }

  listSamples(status?: SampleStatus, article?: string): Promise<SampleList> {
    const params = new URLSearchParams();
    if (status) params.set("status", status);
    if (article) params.set("article", article);
    const qs = params.toString();
    return this.request(`/samples${qs ? `?${qs}` : ""}`);
  }

  getSample(id: string): Promise<SampleDetail> {
    return this.request(`/samples/${encodeURIComponent(id)}`);
  }

  queueNext(annotator: string): Promise<QueueNext> {
    return this.request(`/queue/next?annotator=${encodeURIComponent(annotator)}`);
  }

  submitVerdict(sampleId: string, payload: VerdictPayload): Promise<SampleSummary> {
    return this.request(`/samples/${encodeURIComponent(sampleId)}/verdict`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  submitMeta(sampleId: string, payload: MetaPayload): Promise<SampleSummary> {
    return this.request(`/samples/${encodeURIComponent(sampleId)}/meta`, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  stats(): Promise<Stats> {
    return this.request("/stats");
  }
}
