// Layout for one factor glyph (one stock-cycle, one polarity): an inner bias
// circle, six angular type sectors sized by the type's total |contribution|,
// a grey inner band per sector holding the mass outside the top-5, and
// capacity-fitted cells for the top-5 factors so that cell area is
// proportional to |contribution| across the whole glyph.

import {
  Point,
  Polygon,
  annularSectorPolygon,
  capacityFit,
  polygonArea,
} from "./geometry.js";

export const GLYPH_TOP_K = 5;
const EPS = 1e-12;

export interface GlyphFactorInput {
  factor: string;
  contribution: number;
}

export interface GlyphCell {
  factor: string;
  type: string;
  polygon: Polygon;
  area: number;
  mass: number; // |contribution|
}

export interface GlyphSector {
  type: string;
  startAngle: number;
  endAngle: number;
  greyBand: Polygon | null; // non-top-5 mass of this type
  cells: GlyphCell[];
}

export interface GlyphLayout {
  polarity: "positive" | "negative";
  biasRadius: number;
  outerRadius: number;
  sectors: GlyphSector[];
  remainderMass: number;
  totalMass: number;
  maxAreaError: number; // worst relative deviation of cell area vs mass share
}

export function glyphLayout(
  entries: GlyphFactorInput[],
  factorTypes: Record<string, string>,
  typeOrder: string[],
  factorOrder: string[],
  polarity: "positive" | "negative",
  cx: number,
  cy: number,
  outerRadius: number,
  biasRadius: number,
): GlyphLayout | null {
  const wanted = entries.filter((e) =>
    polarity === "positive" ? e.contribution > EPS : e.contribution < -EPS,
  );
  if (!wanted.length) return null;

  const rank = new Map(factorOrder.map((f, i) => [f, i]));
  const pool = wanted
    .map((e) => ({
      factor: e.factor,
      type: factorTypes[e.factor] ?? "TransactionFriction",
      mass: Math.abs(e.contribution),
    }))
    .sort(
      (a, b) =>
        b.mass - a.mass ||
        (rank.get(a.factor) ?? 0) - (rank.get(b.factor) ?? 0),
    );
  const top = pool.slice(0, GLYPH_TOP_K);
  const rest = pool.slice(GLYPH_TOP_K);
  const remainderMass = rest.reduce((s, e) => s + e.mass, 0);
  const totalMass = pool.reduce((s, e) => s + e.mass, 0);

  const typeMass = new Map<string, number>();
  const typeTop = new Map<string, typeof top>();
  for (const e of pool) {
    typeMass.set(e.type, (typeMass.get(e.type) ?? 0) + e.mass);
  }
  for (const e of top) {
    const list = typeTop.get(e.type) ?? [];
    list.push(e);
    typeTop.set(e.type, list);
  }

  const activeTypes = typeOrder.filter((t) => (typeMass.get(t) ?? 0) > EPS);
  const ringArea = outerRadius * outerRadius - biasRadius * biasRadius;
  let angle = -Math.PI / 2;
  const sectors: GlyphSector[] = [];
  let maxAreaError = 0;

  for (const type of activeTypes) {
    const mass = typeMass.get(type)!;
    const span = (2 * Math.PI * mass) / totalMass;
    const a0 = angle;
    const a1 = angle + span;
    angle = a1;

    const members = typeTop.get(type) ?? [];
    const topMass = members.reduce((s, e) => s + e.mass, 0);
    const extraFrac = mass > 0 ? Math.max(0, (mass - topMass) / mass) : 0;
    const rShare = Math.sqrt(biasRadius * biasRadius + extraFrac * ringArea);
    const greyBand =
      extraFrac > 1e-9
        ? annularSectorPolygon(cx, cy, biasRadius, rShare, a0, a1)
        : null;

    const cells: GlyphCell[] = [];
    if (members.length && rShare < outerRadius - 1e-9) {
      const region = annularSectorPolygon(cx, cy, rShare, outerRadius, a0, a1);
      const midR = (rShare + outerRadius) / 2;
      const sites: Point[] = [];
      let acc = 0;
      for (const m of members) {
        const frac = (acc + m.mass / 2) / topMass;
        acc += m.mass;
        const a = a0 + frac * (a1 - a0);
        sites.push([cx + midR * Math.cos(a), cy + midR * Math.sin(a)]);
      }
      const fit = capacityFit(region, members.map((m) => m.mass), sites);
      if (fit.maxRelError <= 0.045) {
        for (let i = 0; i < members.length; i++) {
          cells.push({
            factor: members[i].factor,
            type,
            polygon: fit.cells[i],
            area: fit.areas[i] ?? polygonArea(fit.cells[i]),
            mass: members[i].mass,
          });
        }
        maxAreaError = Math.max(maxAreaError, fit.maxRelError);
      } else {
        // extreme mass ratios defeat the iteration; fall back to angular
        // wedges whose areas are mass-proportional by construction
        let cum = 0;
        for (const m of members) {
          const w0 = a0 + (cum / topMass) * (a1 - a0);
          cum += m.mass;
          const w1 = a0 + (cum / topMass) * (a1 - a0);
          const poly = annularSectorPolygon(cx, cy, rShare, outerRadius, w0, w1);
          const area = polygonArea(poly);
          cells.push({ factor: m.factor, type, polygon: poly, area, mass: m.mass });
          const target =
            ((m.mass / topMass) * polygonArea(region)) || area;
          maxAreaError = Math.max(
            maxAreaError, Math.abs(area - target) / target,
          );
        }
      }
    }
    sectors.push({ type, startAngle: a0, endAngle: a1, greyBand, cells });
  }

  return {
    polarity,
    biasRadius,
    outerRadius,
    sectors,
    remainderMass,
    totalMass,
    maxAreaError,
  };
}
