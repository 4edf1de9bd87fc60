/** Typed client for the privmine HTTP API. All state lives on the server. */

export interface SessionSummary {
  id: string;
  n_candidates: number;
  annotators: string[];
}

export interface Progress {
  unlabeled: number;
  labeled: number;
  skipped: number;
}

export interface SessionState {
  id: string;
  candidates: string[];
  annotators: string[];
  progress: Record<string, Progress>;
  labels: Record<string, Record<string, number | null>>;
  doubly_labeled: string[];
}

export interface ReviewInfo {
  id: string;
  app: string;
  text: string;
}

export interface NextCandidate {
  done: boolean;
  review: ReviewInfo | null;
}

export interface AgreementPayload {
  kappa: number;
  doubly_labeled: number;
}

export interface PendingKeyword {
  keyword: string;
  samples: ReviewInfo[];
}

export interface PendingPayload {
  iteration: number;
  finished: boolean;
  pending: PendingKeyword[];
}

export interface BootstrapSummary {
  id: string;
  iteration: number;
  finished: boolean;
  n_pending: number;
}

export interface RunSummary {
  id: string;
  stage: string;
  k: number;
  seed: number;
  n_docs: number;
}

export interface TopicEntry {
  cluster: number;
  size: number;
  words: [string, number][];
  representative_ids: string[];
}

export interface TopicsPayload {
  id: string;
  k: number;
  topics: TopicEntry[];
  cluster_sizes: number[];
}

export interface ClusterReviewsPayload {
  cluster: number;
  size: number;
  review_ids: string[];
  representative: ReviewInfo[];
}

export interface ProjectionPoint {
  id: string;
  x: number;
  y: number;
  cluster: number | null;
}

export interface ProjectionPayload {
  id: string;
  points: ProjectionPoint[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`API error ${status}: ${detail}`);
  }
}

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    private readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => globalThis.fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = (await response.json()) as { detail?: string };
        if (body.detail) detail = body.detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/api/health");
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.request("/api/sessions");
  }

  createSession(id: string, candidates: string[], annotators: string[]): Promise<SessionState> {
    return this.post("/api/sessions", { id, candidates, annotators });
  }

  getSession(id: string): Promise<SessionState> {
    return this.request(`/api/sessions/${encodeURIComponent(id)}`);
  }

  nextCandidate(sessionId: string, annotator: string): Promise<NextCandidate> {
    const query = new URLSearchParams({ annotator }).toString();
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/next?${query}`);
  }

  postLabel(
    sessionId: string,
    reviewId: string,
    annotator: string,
    label: 0 | 1 | "skip",
  ): Promise<SessionState> {
    const body =
      label === "skip"
        ? { review_id: reviewId, annotator, skip: true }
        : { review_id: reviewId, annotator, label };
    return this.post(`/api/sessions/${encodeURIComponent(sessionId)}/labels`, body);
  }

  agreement(sessionId: string): Promise<AgreementPayload> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}/agreement`);
  }

  listBootstrap(): Promise<BootstrapSummary[]> {
    return this.request("/api/bootstrap");
  }

  pendingKeywords(runId: string): Promise<PendingPayload> {
    return this.request(`/api/bootstrap/${encodeURIComponent(runId)}/pending-keywords`);
  }

  decideKeyword(runId: string, keyword: string, approved: boolean): Promise<unknown> {
    return this.post(`/api/bootstrap/${encodeURIComponent(runId)}/keywords`, {
      keyword,
      approved,
    });
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request("/api/runs");
  }

  runTopics(runId: string): Promise<TopicsPayload> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/topics`);
  }

  clusterReviews(runId: string, cluster: number): Promise<ClusterReviewsPayload> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/clusters/${cluster}/reviews`);
  }

  projection(runId: string): Promise<ProjectionPayload> {
    return this.request(`/api/runs/${encodeURIComponent(runId)}/projection`);
  }
}
