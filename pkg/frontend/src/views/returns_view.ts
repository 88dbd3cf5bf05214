// Stock return view: per-sector boxes of cumulative strategy-return curves
// (grey per stock, blue benchmark, red for selected stocks). Clicking a curve
// toggles the stock into the working portfolio selection.

import type { BacktestResultPayload, DatasetSummary } from "../types.js";
import type { SelectionState } from "../state.js";
import { clear, extent, linearScale, polylinePath, svgEl } from "../svg.js";

export interface ReturnsViewHandlers {
  onStockToggle(stock: string): void;
}

const BOX_W = 250;
const BOX_H = 120;

export function renderReturnsView(
  container: HTMLElement,
  result: BacktestResultPayload,
  dataset: DatasetSummary,
  state: SelectionState,
  handlers: ReturnsViewHandlers,
): void {
  clear(container);
  container.classList.add("returns-view");
  const title = document.createElement("div");
  title.className = "view-title";
  title.textContent = "Stock returns by sector";
  container.append(title);

  const stocksInRun = Object.keys(result.stocks);
  const sectors = Object.entries(dataset.sectors)
    .map(([name, members]) => ({
      name,
      members: members.filter((m) => stocksInRun.includes(m)),
    }))
    .filter((s) => s.members.length > 0);

  // one scale for every box so curves (and the shared market line) compare
  const [lo, hi] = extent([
    ...stocksInRun.flatMap((sid) => result.stocks[sid].cumulative),
    ...result.benchmark.cumulative,
    0,
  ]);

  for (const sector of sectors) {
    const box = document.createElement("div");
    box.className = "sector-box";
    box.dataset.sector = sector.name;
    const caption = document.createElement("div");
    caption.className = "sector-caption";
    caption.textContent = sector.name;
    box.append(caption);

    const n = result.portfolio.days.length;
    const x = linearScale([0, Math.max(n - 1, 1)], [6, BOX_W - 6]);
    const y = linearScale([lo, hi], [BOX_H - 8, 8]);
    const xs = [...Array(n).keys()].map((i) => x(i));
    const svg = svgEl("svg", { width: BOX_W, height: BOX_H, class: "sector-svg" });

    svg.append(
      svgEl("line", {
        x1: 6, y1: y(0), x2: BOX_W - 6, y2: y(0),
        stroke: "#ddd", "stroke-width": 0.8,
      }),
    );
    for (const sid of sector.members) {
      const curve = result.stocks[sid].cumulative;
      const selected = state.stocks.includes(sid);
      const path = svgEl("path", {
        d: polylinePath(xs, curve.map(y)),
        fill: "none",
        stroke: selected ? "#d12f2f" : "#9a9a9a",
        "stroke-width": selected ? 1.8 : 1,
        class: `stock-curve${selected ? " selected" : ""}`,
      });
      path.dataset.stock = sid;
      const tip = svgEl("title");
      tip.textContent = `${sid}: ${(100 * curve[curve.length - 1]).toFixed(2)}%`;
      path.append(tip);
      path.addEventListener("click", () => handlers.onStockToggle(sid));
      svg.append(path);
    }
    // shared-scope market line: identical data in every sector box
    svg.append(
      svgEl("path", {
        d: polylinePath(xs, result.benchmark.cumulative.map(y)),
        fill: "none",
        stroke: "#2f6fd1",
        "stroke-width": 1.4,
        class: "benchmark-curve",
      }),
    );
    box.append(svg);
    container.append(box);
  }
}
