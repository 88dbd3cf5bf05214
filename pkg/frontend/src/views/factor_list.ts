// Factor list: six rows (one per factor type) of dual-sided bars showing each
// factor's positive and negative contribution summed over the whole period.
// Clicking a bar toggles the factor in the selection.

import type { AnalysisResponse } from "../types.js";
import type { SelectionState } from "../state.js";
import { clear, svgEl, typeColor } from "../svg.js";

export interface FactorListHandlers {
  onFactorToggle(factor: string): void;
}

const ROW_H = 46;
const BAR_W = 14;
const LABEL_W = 130;

export function renderFactorList(
  container: HTMLElement,
  analysis: AnalysisResponse,
  state: SelectionState,
  factorTypes: Record<string, string>,
  typeOrder: string[],
  handlers: FactorListHandlers,
): void {
  clear(container);
  container.classList.add("factor-list");
  const title = document.createElement("div");
  title.className = "view-title";
  title.textContent = "Factor list";
  container.append(title);

  const totals = new Map<string, { positive: number; negative: number }>();
  for (const imp of analysis.metrics.importance) {
    const slot = totals.get(imp.factor) ?? { positive: 0, negative: 0 };
    if (imp.contribution > 0) slot.positive += imp.contribution;
    else slot.negative += imp.contribution;
    totals.set(imp.factor, slot);
  }
  const byType = new Map<string, string[]>();
  for (const f of totals.keys()) {
    const t = factorTypes[f] ?? "TransactionFriction";
    const list = byType.get(t) ?? [];
    list.push(f);
    byType.set(t, list);
  }
  const maxMass = Math.max(
    ...[...totals.values()].flatMap((t) => [t.positive, -t.negative]),
    1e-12,
  );
  const maxPerRow = Math.max(...[...byType.values()].map((l) => l.length), 1);
  const width = LABEL_W + maxPerRow * (BAR_W + 10) + 16;
  const rows = typeOrder.filter((t) => byType.has(t));
  const svg = svgEl("svg", {
    width,
    height: rows.length * ROW_H + 6,
    class: "factor-list-svg",
  });

  rows.forEach((type, r) => {
    const axisY = r * ROW_H + ROW_H / 2;
    const label = svgEl("text", {
      x: 4, y: axisY + 4, "font-size": 11, class: "type-label",
    });
    label.textContent = type;
    svg.append(label);
    svg.append(
      svgEl("line", {
        x1: LABEL_W - 6, y1: axisY, x2: width - 6, y2: axisY,
        stroke: "#bbb", "stroke-width": 0.7,
      }),
    );
    (byType.get(type) ?? []).forEach((factor, i) => {
      const t = totals.get(factor)!;
      const x = LABEL_W + i * (BAR_W + 10);
      const hPos = (t.positive / maxMass) * (ROW_H / 2 - 4);
      const hNeg = (-t.negative / maxMass) * (ROW_H / 2 - 4);
      const g = svgEl("g", { class: "factor-bar" });
      g.dataset.factor = factor;
      if (state.factors.includes(factor)) g.classList.add("selected");
      if (hPos > 0) {
        g.append(
          svgEl("rect", {
            x, y: axisY - hPos, width: BAR_W, height: Math.max(hPos, 0.5),
            fill: typeColor(type), class: "bar-positive",
          }),
        );
      }
      if (hNeg > 0) {
        g.append(
          svgEl("rect", {
            x, y: axisY, width: BAR_W, height: Math.max(hNeg, 0.5),
            fill: typeColor(type), "fill-opacity": 0.55, class: "bar-negative",
          }),
        );
      }
      const hit = svgEl("rect", {
        x, y: axisY - ROW_H / 2 + 2, width: BAR_W, height: ROW_H - 4,
        fill: "transparent", class: "bar-hit",
      });
      const tip = svgEl("title");
      tip.textContent =
        `${factor}\n+${t.positive.toPrecision(4)} / ${t.negative.toPrecision(4)}`;
      hit.append(tip);
      hit.addEventListener("click", () => handlers.onFactorToggle(factor));
      g.append(hit);
      svg.append(g);
    });
  });
  container.append(svg);
}
