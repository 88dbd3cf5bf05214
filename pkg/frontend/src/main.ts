// Application shell: wires the coordinated views to the API client and keeps
// the selection state in the URL so any view configuration can be reloaded.

import { ApiClient } from "./api.js";
import {
  SelectionState,
  addPortfolio,
  analysisRequestBody,
  backtestRequestBody,
  decodeState,
  emptyState,
  encodeState,
  setMetricKind,
  toggleFactor,
  toggleStock,
} from "./state.js";
import type {
  AnalysisResponse,
  BacktestResultPayload,
  DatasetSummary,
  MetricKind,
} from "./types.js";
import { htmlEl } from "./svg.js";
import { renderControlPanel } from "./views/control_panel.js";
import { renderFactorView } from "./views/factor_view.js";
import { renderStockView } from "./views/stock_view.js";
import { renderFactorList } from "./views/factor_list.js";
import { renderReturnsView } from "./views/returns_view.js";
import { renderBacktestView } from "./views/backtest_view.js";

export const TYPE_ORDER = [
  "TransactionFriction",
  "Momentum",
  "Value",
  "Growth",
  "Profitability",
  "Liquidity",
];

export interface AppOptions {
  onStateChange?: (query: string) => void;
}

export class App {
  state: SelectionState;
  dataset: DatasetSummary | null = null;
  analysis: AnalysisResponse | null = null;
  returnsRun: BacktestResultPayload | null = null;
  portfolioRuns: BacktestResultPayload[] = [];
  factorTypes: Record<string, string> = {};
  factorOrder: string[] = [];
  /** Last in-flight request chain; tests await this after firing events. */
  pending: Promise<void> = Promise.resolve();

  private panels: Record<string, HTMLElement>;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    initialState?: SelectionState,
    private options: AppOptions = {},
  ) {
    this.state = initialState ?? emptyState();
    this.panels = {
      control: htmlEl("div", { id: "control-panel" }),
      factor: htmlEl("div", { id: "factor-view" }),
      stock: htmlEl("div", { id: "stock-view" }),
      list: htmlEl("div", { id: "factor-list" }),
      returns: htmlEl("div", { id: "returns-view" }),
      backtest: htmlEl("div", { id: "backtest-view" }),
    };
    for (const el of Object.values(this.panels)) root.append(el);
  }

  static fromUrl(root: HTMLElement, api: ApiClient, query: string, options?: AppOptions): App {
    return new App(root, api, decodeState(query), options);
  }

  async start(): Promise<void> {
    const registry = await this.api.getFactors();
    for (const f of registry.factors) this.factorTypes[f.name] = f.type;
    this.factorOrder = registry.factors.map((f) => f.name);
    if (this.state.datasetId) {
      this.dataset = await this.api.getDataset(this.state.datasetId);
      for (const name of this.dataset.factors) {
        if (!(name in this.factorTypes)) {
          this.factorTypes[name] = "TransactionFriction";
          this.factorOrder.push(name);
        }
      }
      if ((this.state.stocks.length || this.state.sectors.length) &&
          this.state.startDate && this.state.endDate) {
        await this.draw();
        return;
      }
    }
    this.render();
  }

  /** Run the analysis (and the all-stock returns backtest) for the state. */
  async draw(): Promise<void> {
    this.analysis = await this.api.analyze(analysisRequestBody(this.state));
    const returns = await this.api.backtest(
      backtestRequestBody(
        this.state_with_all_factors(),
        "returns",
        this.state.factors.length ? this.state.factors : undefined,
      ),
    );
    this.returnsRun = returns.results[0];
    this.render();
  }

  private state_with_all_factors(): SelectionState {
    if (this.state.stocks.length) return this.state;
    // sector-only selection: the returns view still needs concrete stocks
    const stocks = this.state.sectors.flatMap(
      (s) => this.dataset?.sectors[s] ?? [],
    );
    return { ...this.state, stocks: [...new Set(stocks)].sort() };
  }

  async runBacktest(): Promise<void> {
    if (!this.state.factors.length || !this.state.stocks.length) return;
    const name = `portfolio-${this.portfolioRuns.length + 1}`;
    const resp = await this.api.backtest(backtestRequestBody(this.state, name));
    this.portfolioRuns.push(...resp.results);
    this.state = addPortfolio(this.state);
    this.render();
  }

  private update(next: SelectionState, refetch: boolean): void {
    this.state = next;
    this.options.onStateChange?.(encodeState(this.state));
    if (refetch && this.analysis) {
      this.pending = this.pending.then(() => this.draw());
    } else {
      this.render();
    }
  }

  render(): void {
    const handlers = {
      onFactorToggle: (factor: string) =>
        this.update(toggleFactor(this.state, factor), true),
      onStockToggle: (stock: string) =>
        this.update(toggleStock(this.state, stock), false),
      onMetricChange: (kind: MetricKind) =>
        this.update(setMetricKind(this.state, kind), false),
      onRunBacktest: () => {
        this.pending = this.pending.then(() => this.runBacktest());
      },
      onSectorToggle: (sector: string) => {
        const sectors = this.state.sectors.includes(sector)
          ? this.state.sectors.filter((s) => s !== sector)
          : [...this.state.sectors, sector].sort();
        this.update({ ...this.state, sectors }, false);
      },
      onStockAdd: (stock: string) =>
        this.update(toggleStock(this.state, stock), false),
      onPeriodChange: (start: string, end: string) =>
        this.update({ ...this.state, startDate: start, endDate: end }, false),
      onVariantChange: (variant: string) =>
        this.update({ ...this.state, variant }, false),
      onSensitivityToggle: (on: boolean) =>
        this.update({ ...this.state, withSensitivity: on }, false),
      onDraw: () => {
        this.pending = this.pending.then(() => this.draw());
      },
    };

    renderControlPanel(this.panels.control, this.dataset, this.state, handlers);
    if (this.analysis) {
      renderFactorView(
        this.panels.factor, this.analysis, this.state, this.factorTypes, handlers,
      );
      renderStockView(
        this.panels.stock, this.analysis, this.state, this.factorTypes,
        TYPE_ORDER, this.factorOrder, handlers,
      );
      renderFactorList(
        this.panels.list, this.analysis, this.state, this.factorTypes,
        TYPE_ORDER, handlers,
      );
    }
    if (this.returnsRun && this.dataset) {
      renderReturnsView(
        this.panels.returns, this.returnsRun, this.dataset, this.state, handlers,
      );
    }
    renderBacktestView(
      this.panels.backtest,
      this.portfolioRuns,
      this.state.factors.length > 0 && this.state.stocks.length > 0,
      handlers,
    );
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(window.location.search);
  const api = new ApiClient(params.get("api") ?? "");
  const app = App.fromUrl(root, api, window.location.search, {
    onStateChange: (query) =>
      window.history.replaceState(null, "", `?${query}`),
  });
  void app.start();
}

if (typeof window !== "undefined" && document.getElementById("app")) {
  boot();
}
