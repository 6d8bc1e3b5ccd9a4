// Typed client for the stylemetric HTTP API. The UI never computes distances
// or triplet counts itself; every number shown comes from a server response.

export interface ModelEntry {
  id: string;
  object_type: string;
  cluster: string;
  thumbnail: string | null;
}

export interface RankedEntry {
  model_id: string;
  distance: number;
}

export interface SearchResponse {
  query_id: string;
  target_type: string;
  metric_id: string;
  total: number;
  ranked: RankedEntry[];
}

export interface RerankResponse {
  triplet_set: string;
  triplet_count: number;
}

export interface SixChoiceTask {
  task_id: string;
  x: string;
  x_thumbnail: string;
  candidates: string[];
  candidate_thumbnails: string[];
  pair_types: [string, string];
}

export interface SixChoiceResult {
  triplet_set: string;
  triplet_count: number;
  total_stored: number;
}

export interface TrainResult {
  metric_id: string;
  triplet_count: number;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

let apiBase = "";

export function setApiBase(base: string): void {
  apiBase = base.replace(/\/$/, "");
}

export function getApiBase(): string {
  return apiBase;
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(apiBase + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!resp.ok) {
    let detail = `${resp.status} ${resp.statusText}`;
    try {
      const body = (await resp.json()) as { detail?: unknown };
      if (body.detail !== undefined) detail = String(body.detail);
    } catch {
      // non-JSON error body: keep the status line
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export function fetchModels(type?: string): Promise<{ models: ModelEntry[] }> {
  const q = type ? `?type=${encodeURIComponent(type)}` : "";
  return request(`/models${q}`);
}

export function search(
  query: string,
  type: string,
  metric: string,
  k = 0,
): Promise<SearchResponse> {
  const params = new URLSearchParams({ query, type, metric, k: String(k) });
  return request(`/search?${params}`);
}

export function rerank(
  envModel: string,
  rankedIds: string[],
  user = "anonymous",
): Promise<RerankResponse> {
  return request("/rerank", {
    method: "POST",
    body: JSON.stringify({ env_model: envModel, ranked_ids: rankedIds, user }),
  });
}

export function nextSixChoice(pairX: string, pairY: string): Promise<SixChoiceTask> {
  const params = new URLSearchParams({ pairX, pairY });
  return request(`/sixchoice/next?${params}`);
}

export function submitSixChoice(
  taskId: string,
  selected: [string, string],
  user = "anonymous",
): Promise<SixChoiceResult> {
  return request(`/sixchoice/${encodeURIComponent(taskId)}`, {
    method: "POST",
    body: JSON.stringify({ selected, user }),
  });
}

export function trainMetric(
  tripletSets: string[],
  base: "crowd" | "user" | "combined",
  shape: "diagonal" | "full" = "diagonal",
): Promise<TrainResult> {
  return request("/train", {
    method: "POST",
    body: JSON.stringify({ triplet_sets: tripletSets, base, shape }),
  });
}

export function listMetrics(): Promise<{ metrics: string[] }> {
  return request("/metrics");
}
