import { describe, expect, it } from "vitest";

import {
  annularSectorPolygon,
  capacityFit,
  clipHalfPlane,
  polygonArea,
  polygonCentroid,
  powerDiagramCells,
} from "../src/geometry.js";

const SQUARE: [number, number][] = [
  [0, 0],
  [10, 0],
  [10, 10],
  [0, 10],
];

describe("polygon primitives", () => {
  it("computes areas and centroids", () => {
    expect(polygonArea(SQUARE)).toBeCloseTo(100, 10);
    expect(polygonCentroid(SQUARE)[0]).toBeCloseTo(5, 10);
    expect(polygonCentroid(SQUARE)[1]).toBeCloseTo(5, 10);
  });

  it("clips against a half-plane", () => {
    const left = clipHalfPlane(SQUARE, 1, 0, 4); // keep x <= 4
    expect(polygonArea(left)).toBeCloseTo(40, 8);
    const none = clipHalfPlane(SQUARE, 1, 0, -1);
    expect(none.length).toBe(0);
  });

  it("approximates annular sector area", () => {
    const poly = annularSectorPolygon(0, 0, 5, 10, 0, Math.PI / 2, Math.PI / 90);
    const exact = 0.25 * Math.PI * (100 - 25);
    expect(Math.abs(polygonArea(poly) - exact) / exact).toBeLessThan(0.002);
  });
});

describe("power diagram", () => {
  it("equal weights on two symmetric sites split the square in half", () => {
    const cells = powerDiagramCells(
      SQUARE,
      [
        [2.5, 5],
        [7.5, 5],
      ],
      [0, 0],
    );
    expect(polygonArea(cells[0])).toBeCloseTo(50, 6);
    expect(polygonArea(cells[1])).toBeCloseTo(50, 6);
  });

  it("cells tile the region", () => {
    const sites: [number, number][] = [
      [2, 2],
      [8, 3],
      [5, 8],
    ];
    const cells = powerDiagramCells(SQUARE, sites, [0, 5, -3]);
    const total = cells.reduce((s, c) => s + polygonArea(c), 0);
    expect(total).toBeCloseTo(100, 6);
  });
});

describe("capacity fit", () => {
  it("matches target areas within 5% on a square", () => {
    const targets = [4, 2, 1, 1];
    const fit = capacityFit(SQUARE, targets);
    expect(fit.maxRelError).toBeLessThan(0.05);
    const total = targets.reduce((a, b) => a + b, 0);
    fit.areas.forEach((area, i) => {
      expect(Math.abs(area - (targets[i] / total) * 100) / ((targets[i] / total) * 100))
        .toBeLessThan(0.05);
    });
  });

  it("matches target areas within 5% on an annular sector", () => {
    const region = annularSectorPolygon(0, 0, 6, 16, -0.4, 1.7);
    for (const targets of [[3, 1], [5, 2, 1], [1, 1, 1, 1], [8, 3, 2, 1, 1]]) {
      const fit = capacityFit(region, targets);
      expect(fit.maxRelError).toBeLessThan(0.05);
    }
  });

  it("single target takes the whole region", () => {
    const fit = capacityFit(SQUARE, [7]);
    expect(fit.areas[0]).toBeCloseTo(100, 9);
    expect(fit.maxRelError).toBe(0);
  });
});
