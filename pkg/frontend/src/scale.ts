/** Linear and log10 axis scales with tick generation. */

export interface Scale {
  toPx(value: number): number;
  ticks: number[];
  /** Domain actually used (after padding degenerate ranges). */
  domain: [number, number];
}

/** Round-number ticks (1/2/5 progression) covering [min, max]. */
export function niceTicks(min: number, max: number, count = 6): number[] {
  if (min === max) {
    return [min];
  }
  const rawStep = (max - min) / Math.max(1, count - 1);
  const magnitude = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const residual = rawStep / magnitude;
  const step =
    (residual >= 7 ? 10 : residual >= 3 ? 5 : residual >= 1.5 ? 2 : 1) *
    magnitude;
  const ticks: number[] = [];
  const first = Math.ceil(min / step) * step;
  for (let v = first; v <= max + step * 1e-9; v += step) {
    // snap away accumulated float error so labels stay clean
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export function linearScale(
  min: number,
  max: number,
  pxMin: number,
  pxMax: number,
): Scale {
  let lo = min;
  let hi = max;
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const slope = (pxMax - pxMin) / (hi - lo);
  return {
    toPx: (value) => pxMin + (value - lo) * slope,
    ticks: niceTicks(lo, hi),
    domain: [lo, hi],
  };
}

/**
 * Log10 scale over positive values; ticks at decades. Inputs at or below
 * zero are clamped to the domain floor (they cannot be placed on a log
 * axis, but the point must still be drawn).
 */
export function log10Scale(
  min: number,
  max: number,
  pxMin: number,
  pxMax: number,
): Scale {
  if (!(min > 0) || !(max > 0)) {
    throw new Error("log scale needs positive domain bounds");
  }
  let lo = Math.log10(min);
  let hi = Math.log10(max);
  if (lo === hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const slope = (pxMax - pxMin) / (hi - lo);
  const ticks: number[] = [];
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e += 1) {
    ticks.push(Math.pow(10, e));
  }
  return {
    toPx: (value) => {
      const logValue = value > 0 ? Math.log10(value) : lo;
      return pxMin + (Math.max(lo, Math.min(hi, logValue)) - lo) * slope;
    },
    ticks,
    domain: [Math.pow(10, lo), Math.pow(10, hi)],
  };
}
