// Control panel: initial stock pool (by sector or stock code), analysis
// period, model variant, then Draw.

import type { DatasetSummary } from "../types.js";
import type { SelectionState } from "../state.js";
import { clear, htmlEl } from "../svg.js";

export interface ControlPanelHandlers {
  onSectorToggle(sector: string): void;
  onStockAdd(stock: string): void;
  onPeriodChange(start: string, end: string): void;
  onVariantChange(variant: string): void;
  onSensitivityToggle(on: boolean): void;
  onDraw(): void;
}

export function renderControlPanel(
  container: HTMLElement,
  dataset: DatasetSummary | null,
  state: SelectionState,
  handlers: ControlPanelHandlers,
): void {
  clear(container);
  container.classList.add("control-panel");
  container.append(htmlEl("div", { class: "view-title" }, "Control panel"));

  if (!dataset) {
    container.append(
      htmlEl("div", { class: "empty-note" }, "no dataset loaded (use ?dataset=<id>)"),
    );
    return;
  }
  container.append(
    htmlEl(
      "div",
      { class: "dataset-line" },
      `${dataset.dataset_id}: ${dataset.stocks.length} stocks, ` +
        `${dataset.calendar.start}..${dataset.calendar.end}`,
    ),
  );

  const sectorBox = htmlEl("div", { class: "sector-select" });
  for (const sector of Object.keys(dataset.sectors)) {
    const label = htmlEl("label");
    const box = htmlEl("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = state.sectors.includes(sector);
    box.dataset.sector = sector;
    box.addEventListener("change", () => handlers.onSectorToggle(sector));
    label.append(box, `${sector} (${dataset.sectors[sector].length})`);
    sectorBox.append(label);
  }
  container.append(sectorBox);

  const stockInput = htmlEl("input", {
    type: "text",
    placeholder: "add stock code",
    class: "stock-input",
  }) as HTMLInputElement;
  stockInput.addEventListener("keydown", (ev) => {
    if (ev.key === "Enter" && stockInput.value.trim()) {
      handlers.onStockAdd(stockInput.value.trim());
      stockInput.value = "";
    }
  });
  container.append(stockInput);
  container.append(
    htmlEl("div", { class: "selected-line" },
      `selected: ${state.stocks.join(", ") || "(none)"}`),
  );

  const period = htmlEl("div", { class: "period-select" });
  const start = htmlEl("input", { type: "date", class: "start-date" }) as HTMLInputElement;
  start.value = state.startDate;
  const end = htmlEl("input", { type: "date", class: "end-date" }) as HTMLInputElement;
  end.value = state.endDate;
  const onPeriod = () => handlers.onPeriodChange(start.value, end.value);
  start.addEventListener("change", onPeriod);
  end.addEventListener("change", onPeriod);
  period.append("period ", start, " .. ", end);
  container.append(period);

  const model = htmlEl("select", { class: "model-select" }) as HTMLSelectElement;
  for (const variant of ["lasso", "lassocv", "elnet"]) {
    const opt = htmlEl("option", { value: variant }, variant) as HTMLOptionElement;
    opt.selected = state.variant === variant;
    model.append(opt);
  }
  model.addEventListener("change", () => handlers.onVariantChange(model.value));
  container.append(model);

  const sensLabel = htmlEl("label", { class: "sensitivity-toggle" });
  const sens = htmlEl("input", { type: "checkbox" }) as HTMLInputElement;
  sens.checked = state.withSensitivity;
  sens.addEventListener("change", () => handlers.onSensitivityToggle(sens.checked));
  sensLabel.append(sens, "sensitivity (slower)");
  container.append(sensLabel);

  const draw = htmlEl("button", { class: "draw-button" }, "Draw") as HTMLButtonElement;
  draw.disabled = !state.stocks.length && !state.sectors.length;
  draw.addEventListener("click", () => handlers.onDraw());
  container.append(draw);
}
