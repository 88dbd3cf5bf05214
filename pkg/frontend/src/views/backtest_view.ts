// Backtesting view: overlays each portfolio's realized cumulative curve
// (solid) with its forward outlook (dashed) against the market benchmark in
// blue. Multiple runs stack up for side-by-side comparison.

import type { BacktestResultPayload } from "../types.js";
import { clear, extent, linearScale, polylinePath, svgEl } from "../svg.js";

export interface BacktestViewHandlers {
  onRunBacktest(): void;
}

const W = 520;
const H = 210;
const PORTFOLIO_COLORS = ["#555555", "#8a5fb8", "#c77f3c", "#3c8f8f", "#b84f6d"];

export function renderBacktestView(
  container: HTMLElement,
  results: BacktestResultPayload[],
  canBacktest: boolean,
  handlers: BacktestViewHandlers,
): void {
  clear(container);
  container.classList.add("backtest-view");
  const title = document.createElement("div");
  title.className = "view-title";
  title.textContent = "Backtesting";
  const button = document.createElement("button");
  button.className = "backtest-button";
  button.textContent = "Backtest";
  button.disabled = !canBacktest;
  button.addEventListener("click", () => handlers.onRunBacktest());
  title.append(button);
  container.append(title);

  if (!results.length) {
    const note = document.createElement("div");
    note.className = "empty-note";
    note.textContent = canBacktest
      ? "click Backtest to evaluate the current selection"
      : "select at least one factor and one stock to enable backtesting";
    container.append(note);
    return;
  }

  const values: number[] = [0];
  let maxLen = 0;
  for (const r of results) {
    values.push(...r.portfolio.cumulative, ...r.benchmark.cumulative);
    const last = r.portfolio.cumulative[r.portfolio.cumulative.length - 1] ?? 0;
    values.push(...r.outlook.cumulative.map((v) => (1 + last) * (1 + v) - 1));
    maxLen = Math.max(maxLen, r.portfolio.days.length + r.outlook.days.length);
  }
  const x = linearScale([0, Math.max(maxLen - 1, 1)], [34, W - 8]);
  const y = linearScale(extent(values), [H - 18, 8]);
  const svg = svgEl("svg", { width: W, height: H, class: "backtest-svg" });
  svg.append(
    svgEl("line", {
      x1: 34, y1: y(0), x2: W - 8, y2: y(0), stroke: "#ccc", "stroke-width": 0.8,
    }),
  );

  results.forEach((r, idx) => {
    const color = PORTFOLIO_COLORS[idx % PORTFOLIO_COLORS.length];
    const n = r.portfolio.cumulative.length;
    const xs = [...Array(n).keys()].map((i) => x(i));
    const solid = svgEl("path", {
      d: polylinePath(xs, r.portfolio.cumulative.map(y)),
      fill: "none",
      stroke: color,
      "stroke-width": 1.6,
      class: "curve portfolio-curve solid",
    });
    solid.dataset.portfolio = r.spec.name;
    const tip = svgEl("title");
    tip.textContent =
      `${r.spec.name} [${r.spec.factor_ids.join(", ")}]\n` +
      `return ${(100 * r.summary.period_return).toFixed(2)}% vs market ` +
      `${(100 * r.summary.benchmark_return).toFixed(2)}%`;
    solid.append(tip);
    svg.append(solid);

    if (r.outlook.cumulative.length) {
      const last = r.portfolio.cumulative[n - 1] ?? 0;
      // continue compounding from the period-end level, dashed = prediction
      const ys = r.outlook.cumulative.map((v) => y((1 + last) * (1 + v) - 1));
      const xsF = r.outlook.days.map((_, i) => x(n - 1 + i + 1));
      const dashed = svgEl("path", {
        d: polylinePath([x(n - 1), ...xsF], [y(last), ...ys]),
        fill: "none",
        stroke: color,
        "stroke-width": 1.4,
        "stroke-dasharray": "5,4",
        class: "curve outlook-curve dashed",
      });
      dashed.dataset.portfolio = r.spec.name;
      svg.append(dashed);
    }

    if (idx === 0) {
      svg.append(
        svgEl("path", {
          d: polylinePath(xs, r.benchmark.cumulative.map(y)),
          fill: "none",
          stroke: "#2f6fd1",
          "stroke-width": 1.3,
          class: "curve benchmark-curve solid",
        }),
      );
    }
  });
  container.append(svg);

  const legend = document.createElement("div");
  legend.className = "backtest-legend";
  results.forEach((r, idx) => {
    const item = document.createElement("span");
    item.style.color = PORTFOLIO_COLORS[idx % PORTFOLIO_COLORS.length];
    item.textContent =
      `${r.spec.name}: ${(100 * r.summary.period_return).toFixed(1)}% ` +
      `(excess ${(100 * r.summary.excess_return).toFixed(1)}%)`;
    legend.append(item);
  });
  container.append(legend);
}
