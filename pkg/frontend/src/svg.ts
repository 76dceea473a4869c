/** Minimal deterministic SVG string assembly: fixed size, no timestamps. */

export const WIDTH = 760;
export const HEIGHT = 480;
export const MARGIN = { top: 48, right: 24, bottom: 56, left: 72 } as const;

export const PLOT = {
  left: MARGIN.left,
  right: WIDTH - MARGIN.right,
  top: MARGIN.top,
  bottom: HEIGHT - MARGIN.bottom,
} as const;

export const PALETTE = [
  "#1f77b4",
  "#d62728",
  "#2ca02c",
  "#9467bd",
  "#ff7f0e",
  "#8c564b",
  "#17becf",
  "#7f7f7f",
  "#bcbd22",
  "#e377c2",
] as const;

/** Fixed-precision pixel coordinates keep output byte-stable. */
export function px(value: number): string {
  const rounded = Number(value.toFixed(2));
  // normalize negative zero so -0.00 never appears
  return (Object.is(rounded, -0) ? 0 : rounded).toString();
}

export function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

/** Compact value labels for axis ticks (1e-3 style for extreme scales). */
export function tickLabel(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1e5 || magnitude < 1e-3) {
    return value.toExponential(0).replace("e+", "e");
  }
  return Number(value.toPrecision(6)).toString();
}

export function polyline(
  points: Array<[number, number]>,
  stroke: string,
  extra = "",
): string {
  const joined = points.map(([x, y]) => `${px(x)},${px(y)}`).join(" ");
  return (
    `<polyline fill="none" stroke="${stroke}" stroke-width="1.5"` +
    `${extra} points="${joined}"/>`
  );
}

export function line(
  x1: number,
  y1: number,
  x2: number,
  y2: number,
  stroke: string,
  extra = "",
): string {
  return (
    `<line x1="${px(x1)}" y1="${px(y1)}" x2="${px(x2)}" y2="${px(y2)}"` +
    ` stroke="${stroke}"${extra}/>`
  );
}

export function circle(x: number, y: number, fill: string): string {
  return `<circle cx="${px(x)}" cy="${px(y)}" r="2.5" fill="${fill}"/>`;
}

export function text(
  x: number,
  y: number,
  content: string,
  anchor: "start" | "middle" | "end",
  extra = "",
): string {
  return (
    `<text x="${px(x)}" y="${px(y)}" text-anchor="${anchor}"` +
    ` font-family="Helvetica,Arial,sans-serif" font-size="12"${extra}>` +
    `${escapeText(content)}</text>`
  );
}

export function document(body: string[]): string {
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}"` +
      ` height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
    `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
    ...body,
    "</svg>",
    "",
  ].join("\n");
}
