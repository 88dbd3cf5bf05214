// End-to-end client flows against the mock server that replays payloads
// recorded from the real engine: draw, subset re-analysis on factor click,
// backtest curve pairs, and the URL round trip.

import { beforeEach, describe, expect, it } from "vitest";

import { App } from "../src/main.js";
import { decodeState, encodeState } from "../src/state.js";
import { apiWithMock, container, drawnState, fixtures } from "./helpers.js";

async function startedApp() {
  const { api, calls } = apiWithMock();
  const root = container();
  const app = new App(root, api, drawnState());
  await app.start();
  return { app, root, calls };
}

describe("application flows", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("draws all coordinated views from the recorded payloads", async () => {
    const { root } = await startedApp();
    expect(root.querySelectorAll(".factor-circle").length).toBeGreaterThan(0);
    expect(root.querySelectorAll(".stock-row").length).toBe(10);
    expect(root.querySelectorAll(".factor-list svg g.factor-bar").length)
      .toBeGreaterThan(0);
    expect(root.querySelectorAll(".sector-box").length).toBe(2);
    // benchmark line identical across sector boxes of the same scope
    const benchPaths = [...root.querySelectorAll(".sector-box .benchmark-curve")]
      .map((p) => p.getAttribute("d"));
    expect(benchPaths.length).toBe(2);
    expect(benchPaths[0]).toBe(benchPaths[1]);
  });

  it("clicking a factor circle issues a subset analysis request", async () => {
    const { root, calls } = await startedApp();
    const circle = root.querySelector<SVGCircleElement>(".factor-circle")!;
    const factor = circle.dataset.factor!;
    circle.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await new Promise((r) => setTimeout(r, 0));
    await new Promise((r) => setTimeout(r, 0));
    const analysisCalls = calls.filter((c) => c.url.endsWith("/api/analysis"));
    expect(analysisCalls.length).toBeGreaterThanOrEqual(2);
    const last = analysisCalls[analysisCalls.length - 1];
    expect(last.body.factors).toEqual([factor]);
  });

  it("a backtest click renders solid + dashed curve pairs", async () => {
    const { app, root, calls } = await startedApp();
    // select a factor so the Backtest button arms (stocks already selected)
    app.state = { ...app.state, factors: [...fixtures.meta.planted_support] };
    app.render();
    const button = root.querySelector<HTMLButtonElement>(".backtest-button")!;
    expect(button.disabled).toBe(false);
    button.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    await app.pending;
    app.render();

    const solids = root.querySelectorAll(".backtest-view .portfolio-curve.solid");
    const dashed = root.querySelectorAll(".backtest-view .outlook-curve.dashed");
    expect(solids.length).toBe(1);
    expect(dashed.length).toBe(1);
    expect((solids[0] as SVGPathElement).dataset.portfolio)
      .toBe((dashed[0] as SVGPathElement).dataset.portfolio);
    expect(dashed[0].getAttribute("stroke-dasharray")).toBeTruthy();
    const backtests = calls.filter((c) => c.url.endsWith("/api/backtest"));
    expect(backtests[backtests.length - 1].body.specs[0].factor_ids)
      .toEqual([...fixtures.meta.planted_support]);
  });

  it("backtest button stays disabled without a factor selection", async () => {
    const { root } = await startedApp();
    const button = root.querySelector<HTMLButtonElement>(".backtest-button")!;
    expect(button.disabled).toBe(true);
  });

  it("URL round-trip reproduces the rendered views", async () => {
    const { app, root } = await startedApp();
    app.state = { ...app.state, factors: [fixtures.meta.planted_support[0]] };
    app.render();
    const query = encodeState(app.state);

    const { api } = apiWithMock();
    const root2 = container();
    const app2 = new App(root2, api, decodeState(query));
    await app2.start();

    expect(app2.state).toEqual(app.state);
    expect(root2.querySelectorAll(".factor-circle").length)
      .toBe(root.querySelectorAll(".factor-circle").length);
    expect(root2.querySelector("#factor-view")!.innerHTML)
      .toBe(root.querySelector("#factor-view")!.innerHTML);
    expect(root2.querySelector("#stock-view")!.innerHTML)
      .toBe(root.querySelector("#stock-view")!.innerHTML);
  });

  it("stock toggles re-render without refetching", async () => {
    const { app, root, calls } = await startedApp();
    const before = calls.length;
    const label = root.querySelector<SVGTextElement>(".stock-label")!;
    label.dispatchEvent(new MouseEvent("click", { bubbles: true }));
    expect(calls.length).toBe(before);
    expect(app.state.stocks.length).toBe(fixtures.meta.stock_ids.length - 1);
  });
});
