// Wire types for the analytics API. The client never recomputes analytics:
// everything rendered is one of these fields or plain arithmetic on them.

export interface DatasetSummary {
  dataset_id: string;
  stocks: string[];
  sectors: Record<string, string[]>;
  factors: string[];
  calendar: { start: string; end: string; days: number };
}

export interface FactorInfo {
  name: string;
  type: string;
}

export interface FactorsRegistry {
  factors: FactorInfo[];
  type_counts: Record<string, number>;
}

export interface CycleWindow {
  index: number;
  train_x_start: number;
  train_x_end: number;
  train_y_start: number;
  train_y_end: number;
  trade_start: number;
  trade_end: number;
  trade_start_date: string;
  trade_end_date: string;
}

export interface PartitionSummary {
  train_days: number;
  cycle_days: number;
  start_day: number;
  end_day: number;
  start_date: string;
  end_date: string;
  n_cycles: number;
  cycles: CycleWindow[];
}

export interface ModelEntry {
  stock_id: string;
  cycle: number;
  weights: [string, number][];
  bias: number;
  lambda_used: number;
  xi: number;
  error_rate: number;
  price_change: number;
}

export interface ImportanceEntry {
  stock_id: string;
  cycle: number;
  factor: string;
  weight: number;
  mean_value: number;
  contribution: number;
}

export interface SensitivityEntry {
  stock_id: string;
  cycle: number;
  factor: string;
  sensitivity: number;
}

export interface StabilityEntry {
  stock_id: string;
  factor: string;
  flips: number;
}

export interface AggregateEntry {
  cycle: number;
  factor: string;
  metric_kind: string;
  positive_mass: number;
  negative_mass: number;
}

export interface AnalysisResponse {
  dataset_id: string;
  request: Record<string, unknown>;
  adjustment: {
    requested_end_date: string;
    effective_end_date: string;
    days_dropped: number;
  };
  partition: PartitionSummary;
  models: { models: ModelEntry[] };
  metrics: {
    importance: ImportanceEntry[];
    sensitivity: SensitivityEntry[];
    stability: StabilityEntry[];
  };
  aggregates: AggregateEntry[];
}

export interface CurveBlock {
  days: number[];
  dates: string[];
  daily: number[];
  cumulative: number[];
}

export interface BacktestResultPayload {
  spec: {
    name: string;
    stock_ids: string[];
    factor_ids: string[];
    period: [number, number];
    variant: string;
  };
  portfolio: CurveBlock;
  stocks: Record<string, CurveBlock>;
  benchmark: CurveBlock;
  outlook: {
    days: number[];
    dates: string[];
    predicted: number[];
    daily: number[];
    cumulative: number[];
  };
  summary: Record<string, number>;
}

export interface BacktestResponse {
  results: BacktestResultPayload[];
}

export type MetricKind = "weight" | "value" | "contribution";
