// Small SVG/DOM helpers shared by the views.

const SVG_NS = "http://www.w3.org/2000/svg";

export function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number> = {},
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, String(v));
  return el;
}

export function htmlEl<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const el = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) el.setAttribute(k, v);
  if (text !== undefined) el.textContent = text;
  return el;
}

export function clear(el: Element): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

export interface Scale {
  (value: number): number;
  domain: [number, number];
  range: [number, number];
}

export function linearScale(domain: [number, number], range: [number, number]): Scale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  const fn = ((v: number) => r0 + ((v - d0) / span) * (r1 - r0)) as Scale;
  fn.domain = domain;
  fn.range = range;
  return fn;
}

export function extent(values: number[]): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of values) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  if (!isFinite(lo)) return [0, 1];
  if (lo === hi) return [lo - 1, hi + 1];
  return [lo, hi];
}

export function polylinePath(xs: number[], ys: number[]): string {
  if (!xs.length) return "";
  const parts = [`M${xs[0]},${ys[0]}`];
  for (let i = 1; i < xs.length; i++) parts.push(`L${xs[i]},${ys[i]}`);
  return parts.join("");
}

// Hue per factor type, matching the six-type registry.
export const TYPE_COLORS: Record<string, string> = {
  TransactionFriction: "#4e79a7",
  Momentum: "#f28e2b",
  Value: "#59a14f",
  Growth: "#e15759",
  Profitability: "#b07aa1",
  Liquidity: "#76b7b2",
};

export function typeColor(type: string): string {
  return TYPE_COLORS[type] ?? "#888888";
}
