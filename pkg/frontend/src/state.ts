// Selection state for the coordinated views. Every mutation returns a new
// object; the whole state round-trips through the URL query string so a view
// configuration can be shared and reproduced exactly.

import type { MetricKind } from "./types.js";

export interface SelectionState {
  datasetId: string;
  stocks: string[];
  sectors: string[];
  factors: string[];
  startDate: string;
  endDate: string;
  variant: string;
  metricKind: MetricKind;
  withSensitivity: boolean;
  portfolios: string[][]; // each entry: factor list of a saved portfolio
}

export function emptyState(): SelectionState {
  return {
    datasetId: "",
    stocks: [],
    sectors: [],
    factors: [],
    startDate: "",
    endDate: "",
    variant: "lasso",
    metricKind: "contribution",
    withSensitivity: false,
    portfolios: [],
  };
}

function uniqueSorted(items: string[]): string[] {
  return [...new Set(items)].sort();
}

export function toggleFactor(state: SelectionState, factor: string): SelectionState {
  const factors = state.factors.includes(factor)
    ? state.factors.filter((f) => f !== factor)
    : uniqueSorted([...state.factors, factor]);
  return { ...state, factors };
}

export function toggleStock(state: SelectionState, stock: string): SelectionState {
  const stocks = state.stocks.includes(stock)
    ? state.stocks.filter((s) => s !== stock)
    : uniqueSorted([...state.stocks, stock]);
  return { ...state, stocks };
}

export function setMetricKind(state: SelectionState, kind: MetricKind): SelectionState {
  return { ...state, metricKind: kind };
}

export function addPortfolio(state: SelectionState): SelectionState {
  if (!state.factors.length || !state.stocks.length) return state;
  return { ...state, portfolios: [...state.portfolios, [...state.factors]] };
}

const LIST_SEP = ",";
const PORTFOLIO_SEP = ";";

export function encodeState(state: SelectionState): string {
  const q = new URLSearchParams();
  if (state.datasetId) q.set("dataset", state.datasetId);
  if (state.stocks.length) q.set("stocks", state.stocks.join(LIST_SEP));
  if (state.sectors.length) q.set("sectors", state.sectors.join(LIST_SEP));
  if (state.factors.length) q.set("factors", state.factors.join(LIST_SEP));
  if (state.startDate) q.set("start", state.startDate);
  if (state.endDate) q.set("end", state.endDate);
  q.set("model", state.variant);
  q.set("metric", state.metricKind);
  if (state.withSensitivity) q.set("sens", "1");
  if (state.portfolios.length) {
    q.set(
      "portfolios",
      state.portfolios.map((p) => p.join(LIST_SEP)).join(PORTFOLIO_SEP),
    );
  }
  return q.toString();
}

function splitList(text: string | null): string[] {
  if (!text) return [];
  return text.split(LIST_SEP).filter((t) => t.length > 0);
}

export function decodeState(query: string): SelectionState {
  const q = new URLSearchParams(query);
  const metric = q.get("metric");
  return {
    datasetId: q.get("dataset") ?? "",
    stocks: splitList(q.get("stocks")),
    sectors: splitList(q.get("sectors")),
    factors: splitList(q.get("factors")),
    startDate: q.get("start") ?? "",
    endDate: q.get("end") ?? "",
    variant: q.get("model") ?? "lasso",
    metricKind:
      metric === "weight" || metric === "value" || metric === "contribution"
        ? metric
        : "contribution",
    withSensitivity: q.get("sens") === "1",
    portfolios: (q.get("portfolios") ?? "")
      .split(PORTFOLIO_SEP)
      .filter((p) => p.length > 0)
      .map((p) => splitList(p)),
  };
}

export function analysisRequestBody(state: SelectionState): Record<string, unknown> {
  const body: Record<string, unknown> = {
    dataset_id: state.datasetId,
    stock_ids: state.stocks,
    sectors: state.sectors,
    period: { start_date: state.startDate, end_date: state.endDate },
    variant: state.variant,
    metric_kind: state.metricKind,
    with_sensitivity: state.withSensitivity,
  };
  if (state.factors.length) body.factors = state.factors;
  return body;
}

export function backtestRequestBody(
  state: SelectionState,
  name: string,
  factors?: string[],
): Record<string, unknown> {
  return {
    dataset_id: state.datasetId,
    specs: [
      {
        name,
        stock_ids: state.stocks,
        factor_ids: factors ?? state.factors,
        period: { start_date: state.startDate, end_date: state.endDate },
        variant: state.variant,
      },
    ],
  };
}
