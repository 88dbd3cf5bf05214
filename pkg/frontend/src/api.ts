// Thin fetch wrapper. The fetch function is injected so tests can replay
// recorded payloads and inspect outgoing requests.

import type {
  AnalysisResponse,
  BacktestResponse,
  DatasetSummary,
  FactorsRegistry,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    public body: unknown,
  ) {
    super(`API error ${status}`);
  }
}

export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) throw new ApiError(resp.status, body);
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  getDataset(datasetId: string): Promise<DatasetSummary> {
    return this.request(`/api/datasets/${datasetId}`);
  }

  getFactors(): Promise<FactorsRegistry> {
    return this.request("/api/factors");
  }

  analyze(body: Record<string, unknown>): Promise<AnalysisResponse> {
    return this.post("/api/analysis", body);
  }

  backtest(body: Record<string, unknown>): Promise<BacktestResponse> {
    return this.post("/api/backtest", body);
  }
}
