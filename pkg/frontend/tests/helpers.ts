// Shared test scaffolding: a mock fetch that replays the recorded API
// payloads (produced by the real engine on the planted synthetic dataset)
// and records every outgoing request for assertions.

import analysisFixture from "./fixtures/analysis.json";
import backtestFixture from "./fixtures/backtest.json";
import datasetFixture from "./fixtures/dataset.json";
import factorsFixture from "./fixtures/factors.json";
import metaFixture from "./fixtures/meta.json";

import { ApiClient, FetchLike } from "../src/api.js";
import type { SelectionState } from "../src/state.js";
import type { AnalysisResponse, BacktestResponse, DatasetSummary } from "../src/types.js";

export const fixtures = {
  analysis: analysisFixture as unknown as AnalysisResponse,
  backtest: backtestFixture as unknown as BacktestResponse,
  dataset: datasetFixture as unknown as DatasetSummary,
  factors: factorsFixture as { factors: { name: string; type: string }[] },
  meta: metaFixture as {
    dataset_id: string;
    start_date: string;
    end_date: string;
    planted_support: string[];
    stock_ids: string[];
  },
};

export interface RecordedCall {
  url: string;
  method: string;
  body?: any;
}

export function mockServer(): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const respond = (payload: unknown, status = 200) =>
    new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  const fetchFn: FetchLike = async (url, init) => {
    const call: RecordedCall = { url, method: init?.method ?? "GET" };
    if (init?.body) call.body = JSON.parse(init.body as string);
    calls.push(call);
    if (url.endsWith("/api/factors")) return respond(fixtures.factors);
    if (url.includes("/api/datasets/")) return respond(fixtures.dataset);
    if (url.endsWith("/api/analysis")) return respond(fixtures.analysis);
    if (url.endsWith("/api/backtest")) return respond(fixtures.backtest);
    return respond({ error: "UnknownRoute", detail: url }, 404);
  };
  return { fetchFn, calls };
}

export function apiWithMock(): { api: ApiClient; calls: RecordedCall[] } {
  const { fetchFn, calls } = mockServer();
  return { api: new ApiClient("", fetchFn), calls };
}

export function factorTypesFromFixture(): Record<string, string> {
  const types: Record<string, string> = {};
  for (const f of fixtures.factors.factors) types[f.name] = f.type;
  return types;
}

export function drawnState(): SelectionState {
  return {
    datasetId: fixtures.meta.dataset_id,
    stocks: [...fixtures.meta.stock_ids],
    sectors: [],
    factors: [],
    startDate: fixtures.meta.start_date,
    endDate: fixtures.meta.end_date,
    variant: "lasso",
    metricKind: "contribution",
    withSensitivity: true,
    portfolios: [],
  };
}

export function container(): HTMLElement {
  const el = document.createElement("div");
  document.body.append(el);
  return el;
}
