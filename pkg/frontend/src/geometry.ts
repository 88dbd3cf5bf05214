// Polygon geometry for the stock-view glyphs: annular sector regions and a
// capacity-fitted power diagram that packs factor cells so cell area tracks
// |contribution|. A power-diagram cell is an intersection of half-planes
// (the radical axes), so clipping the region polygon against each pairwise
// constraint yields exact polygonal cells; sites and weights are then
// iterated (Lloyd moves + capacity weight updates) until areas match the
// targets.

export type Point = [number, number];
export type Polygon = Point[];

export function polygonArea(poly: Polygon): number {
  let twice = 0;
  for (let i = 0; i < poly.length; i++) {
    const [x0, y0] = poly[i];
    const [x1, y1] = poly[(i + 1) % poly.length];
    twice += x0 * y1 - x1 * y0;
  }
  return Math.abs(twice) / 2;
}

export function polygonCentroid(poly: Polygon): Point {
  let twice = 0;
  let cx = 0;
  let cy = 0;
  for (let i = 0; i < poly.length; i++) {
    const [x0, y0] = poly[i];
    const [x1, y1] = poly[(i + 1) % poly.length];
    const cross = x0 * y1 - x1 * y0;
    twice += cross;
    cx += (x0 + x1) * cross;
    cy += (y0 + y1) * cross;
  }
  if (Math.abs(twice) < 1e-12) {
    const n = poly.length || 1;
    return [
      poly.reduce((s, p) => s + p[0], 0) / n,
      poly.reduce((s, p) => s + p[1], 0) / n,
    ];
  }
  return [cx / (3 * twice), cy / (3 * twice)];
}

/** Keep the part of `poly` with nx*x + ny*y <= c (Sutherland-Hodgman). */
export function clipHalfPlane(poly: Polygon, nx: number, ny: number, c: number): Polygon {
  const out: Polygon = [];
  const inside = (p: Point) => nx * p[0] + ny * p[1] <= c;
  for (let i = 0; i < poly.length; i++) {
    const cur = poly[i];
    const prev = poly[(i + poly.length - 1) % poly.length];
    const curIn = inside(cur);
    const prevIn = inside(prev);
    if (curIn !== prevIn) {
      const denom = nx * (cur[0] - prev[0]) + ny * (cur[1] - prev[1]);
      const t = denom === 0 ? 0 : (c - nx * prev[0] - ny * prev[1]) / denom;
      out.push([
        prev[0] + t * (cur[0] - prev[0]),
        prev[1] + t * (cur[1] - prev[1]),
      ]);
    }
    if (curIn) out.push(cur);
  }
  return out;
}

/** Annular sector between radii [r0, r1] and angles [a0, a1], arc-sampled. */
export function annularSectorPolygon(
  cx: number,
  cy: number,
  r0: number,
  r1: number,
  a0: number,
  a1: number,
  maxStep: number = Math.PI / 24,
): Polygon {
  const steps = Math.max(2, Math.ceil((a1 - a0) / maxStep));
  const poly: Polygon = [];
  for (let i = 0; i <= steps; i++) {
    const a = a0 + ((a1 - a0) * i) / steps;
    poly.push([cx + r1 * Math.cos(a), cy + r1 * Math.sin(a)]);
  }
  if (r0 > 1e-9) {
    for (let i = steps; i >= 0; i--) {
      const a = a0 + ((a1 - a0) * i) / steps;
      poly.push([cx + r0 * Math.cos(a), cy + r0 * Math.sin(a)]);
    }
  } else {
    poly.push([cx, cy]);
  }
  return poly;
}

export function pathFromPolygon(poly: Polygon): string {
  if (!poly.length) return "";
  const parts = [`M${poly[0][0]},${poly[0][1]}`];
  for (let i = 1; i < poly.length; i++) parts.push(`L${poly[i][0]},${poly[i][1]}`);
  parts.push("Z");
  return parts.join("");
}

/** Power-diagram cells of `sites` with `weights`, clipped to `region`. */
export function powerDiagramCells(
  region: Polygon,
  sites: Point[],
  weights: number[],
): Polygon[] {
  return sites.map((si, i) => {
    let cell = region;
    for (let j = 0; j < sites.length && cell.length; j++) {
      if (j === i) continue;
      const sj = sites[j];
      // |p-si|^2 - wi <= |p-sj|^2 - wj  <=>  2(sj-si).p <= |sj|^2-|si|^2+wi-wj
      const nx = 2 * (sj[0] - si[0]);
      const ny = 2 * (sj[1] - si[1]);
      const c =
        sj[0] * sj[0] + sj[1] * sj[1] - (si[0] * si[0] + si[1] * si[1]) +
        weights[i] - weights[j];
      cell = clipHalfPlane(cell, nx, ny, c);
    }
    return cell;
  });
}

export interface CapacityFitResult {
  cells: Polygon[];
  sites: Point[];
  weights: number[];
  areas: number[];
  maxRelError: number;
}

/**
 * Fit cell areas to `targets` (arbitrary positive masses) inside `region`.
 * Alternates Lloyd centroid moves with additive weight updates until the
 * worst relative area error stops improving or `iters` runs out.
 */
export function capacityFit(
  region: Polygon,
  targets: number[],
  initialSites?: Point[],
  iters: number = 220,
): CapacityFitResult {
  const k = targets.length;
  const regionArea = polygonArea(region);
  if (k === 0 || regionArea <= 0) {
    return { cells: [], sites: [], weights: [], areas: [], maxRelError: 0 };
  }
  const total = targets.reduce((s, t) => s + t, 0);
  const targetAreas = targets.map((t) => (t / total) * regionArea);
  if (k === 1) {
    return {
      cells: [region],
      sites: [polygonCentroid(region)],
      weights: [0],
      areas: [regionArea],
      maxRelError: 0,
    };
  }

  const centroid = polygonCentroid(region);
  let sites: Point[];
  if (initialSites && initialSites.length === k) {
    sites = initialSites.map((p) => [p[0], p[1]]);
  } else {
    // spread along the region boundary shrunk toward the centroid
    sites = [];
    for (let i = 0; i < k; i++) {
      const b = region[Math.floor((i * region.length) / k)];
      sites.push([
        centroid[0] + 0.55 * (b[0] - centroid[0]),
        centroid[1] + 0.55 * (b[1] - centroid[1]),
      ]);
    }
  }
  // weights as squared virtual radii with multiplicative area feedback: the
  // clamped updates stay stable even for three-orders-of-magnitude targets
  const radii = targetAreas.map((a) => Math.sqrt(a / Math.PI));
  const weightsOf = () => {
    const w = radii.map((r) => r * r);
    const mean = w.reduce((s, v) => s + v, 0) / k;
    return w.map((v) => v - mean);
  };

  let best: CapacityFitResult | null = null;
  for (let it = 0; it < iters; it++) {
    const weights = weightsOf();
    const cells = powerDiagramCells(region, sites, weights);
    const areas = cells.map(polygonArea);
    let maxRel = 0;
    for (let i = 0; i < k; i++) {
      maxRel = Math.max(maxRel, Math.abs(areas[i] - targetAreas[i]) / targetAreas[i]);
    }
    if (!best || maxRel < best.maxRelError) {
      best = {
        cells: cells.map((c) => c.map((p) => [p[0], p[1]] as Point)),
        sites: sites.map((p) => [p[0], p[1]] as Point),
        weights: [...weights],
        areas: [...areas],
        maxRelError: maxRel,
      };
      if (maxRel < 0.005) break;
    }
    const settle = it > iters * 0.6 ? 0.5 : 1.0; // damp late-phase moves
    for (let i = 0; i < k; i++) {
      if (!cells[i].length || areas[i] <= 1e-12) {
        radii[i] *= 1.25;
        sites[i] = [
          0.5 * (sites[i][0] + centroid[0]),
          0.5 * (sites[i][1] + centroid[1]),
        ];
        continue;
      }
      const grow = Math.sqrt(targetAreas[i] / areas[i]);
      radii[i] *= Math.min(1.3, Math.max(0.75, 1 + settle * (grow - 1)));
      const c = polygonCentroid(cells[i]);
      sites[i] = [
        sites[i][0] + settle * 0.55 * (c[0] - sites[i][0]),
        sites[i][1] + settle * 0.55 * (c[1] - sites[i][1]),
      ];
    }
  }
  return best!;
}
