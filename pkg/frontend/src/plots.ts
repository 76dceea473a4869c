/** Chart assembly: trajectory (linear / log-V) and sweep figures as SVG. */

import { basename } from "path";

import {
  parseSweepCsv,
  parseTrajectoryCsv,
  SchemaError,
  SweepRow,
  TrajectoryRow,
} from "./csv";
import { linearScale, log10Scale, Scale } from "./scale";
import {
  circle,
  document as svgDocument,
  line,
  PALETTE,
  PLOT,
  polyline,
  text,
  tickLabel,
} from "./svg";

export type PlotKind =
  | "trajectory"
  | "trajectory_log_v"
  | "sweep_by_v0"
  | "sweep_by_t0";

export const PLOT_KINDS: readonly PlotKind[] = [
  "trajectory",
  "trajectory_log_v",
  "sweep_by_v0",
  "sweep_by_t0",
];

export interface PlotSpec {
  kind: PlotKind;
  /** One file per series group; sweep kinds take exactly one. */
  inputs: string[];
  output: string;
  xLabel?: string;
  yLabel?: string;
  title?: string;
}

interface Series {
  label: string;
  color: string;
  points: Array<[number, number]>; // data coordinates, input order
}

const DEFAULT_LABELS: Record<PlotKind, { x: string; y: string }> = {
  trajectory: { x: "time (days)", y: "T, I (cells/uL); V (copies/uL)" },
  trajectory_log_v: { x: "time (days)", y: "V (copies/uL)" },
  sweep_by_v0: { x: "initial V (copies/uL)", y: "extinction probability" },
  sweep_by_t0: { x: "initial T (cells/uL)", y: "extinction probability" },
};

function seriesColor(index: number): string {
  return PALETTE[index % PALETTE.length] ?? PALETTE[0];
}

/** Strip directory and .csv suffix for legend labels on multi-file plots. */
function stem(path: string): string {
  return basename(path).replace(/\.csv$/i, "");
}

function axes(
  x: Scale,
  y: Scale,
  xLabel: string,
  yLabel: string,
  title: string,
  yTickFormat: (v: number) => string = tickLabel,
): string[] {
  const parts: string[] = [];
  parts.push(line(PLOT.left, PLOT.bottom, PLOT.right, PLOT.bottom, "#000"));
  parts.push(line(PLOT.left, PLOT.top, PLOT.left, PLOT.bottom, "#000"));
  for (const tick of x.ticks) {
    const xpx = x.toPx(tick);
    parts.push(line(xpx, PLOT.bottom, xpx, PLOT.bottom + 5, "#000"));
    parts.push(text(xpx, PLOT.bottom + 20, tickLabel(tick), "middle"));
  }
  for (const tick of y.ticks) {
    const ypx = y.toPx(tick);
    parts.push(line(PLOT.left - 5, ypx, PLOT.left, ypx, "#000"));
    parts.push(
      line(PLOT.left, ypx, PLOT.right, ypx, "#ddd", ' stroke-width="0.5"'),
    );
    parts.push(text(PLOT.left - 9, ypx + 4, yTickFormat(tick), "end"));
  }
  const xMid = (PLOT.left + PLOT.right) / 2;
  parts.push(text(xMid, PLOT.bottom + 42, xLabel, "middle"));
  parts.push(
    text(20, (PLOT.top + PLOT.bottom) / 2, yLabel, "middle",
      ` transform="rotate(-90 20 ${(PLOT.top + PLOT.bottom) / 2})"`),
  );
  parts.push(text(xMid, PLOT.top - 18, title, "middle", ' font-size="14"'));
  return parts;
}

function legend(series: Series[]): string[] {
  const parts: string[] = [];
  let ypx = PLOT.top + 8;
  for (const s of series) {
    parts.push(line(PLOT.right - 130, ypx, PLOT.right - 106, ypx, s.color,
      ' stroke-width="2"'));
    parts.push(text(PLOT.right - 100, ypx + 4, s.label, "start"));
    ypx += 18;
  }
  return parts;
}

function dataBounds(series: Series[]): {
  xMin: number; xMax: number; yMin: number; yMax: number;
} {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const s of series) {
    for (const [xv, yv] of s.points) {
      xMin = Math.min(xMin, xv);
      xMax = Math.max(xMax, xv);
      yMin = Math.min(yMin, yv);
      yMax = Math.max(yMax, yv);
    }
  }
  return { xMin, xMax, yMin, yMax };
}

function drawSeries(series: Series[], x: Scale, y: Scale): string[] {
  return series.map((s) =>
    s.points.length === 1
      ? circle(x.toPx(s.points[0]![0]), y.toPx(s.points[0]![1]), s.color)
      : polyline(
          s.points.map(([xv, yv]) => [x.toPx(xv), y.toPx(yv)]),
          s.color,
        ),
  );
}

function renderTrajectory(
  tables: Array<{ path: string; rows: TrajectoryRow[] }>,
  spec: PlotSpec,
): string {
  const multi = tables.length > 1;
  const series: Series[] = [];
  for (const table of tables) {
    const suffix = multi ? ` (${stem(table.path)})` : "";
    const columns: Array<keyof TrajectoryRow & ("T" | "I" | "V")> = [
      "T", "I", "V",
    ];
    for (const column of columns) {
      series.push({
        label: column + suffix,
        color: seriesColor(series.length),
        points: table.rows.map((row) => [row.t, row[column]]),
      });
    }
  }
  const bounds = dataBounds(series);
  const x = linearScale(bounds.xMin, bounds.xMax, PLOT.left, PLOT.right);
  const y = linearScale(
    Math.min(0, bounds.yMin), bounds.yMax, PLOT.bottom, PLOT.top,
  );
  const labels = DEFAULT_LABELS[spec.kind];
  return svgDocument([
    ...axes(x, y, spec.xLabel ?? labels.x, spec.yLabel ?? labels.y,
      spec.title ?? "trajectory"),
    ...drawSeries(series, x, y),
    ...legend(series),
  ]);
}

function renderTrajectoryLogV(
  tables: Array<{ path: string; rows: TrajectoryRow[] }>,
  spec: PlotSpec,
): string {
  const multi = tables.length > 1;
  const series: Series[] = tables.map((table, index) => ({
    label: multi ? `V (${stem(table.path)})` : "V",
    color: seriesColor(index),
    points: table.rows.map((row) => [row.t, row.V] as [number, number]),
  }));
  const positives = series.flatMap((s) =>
    s.points.map(([, v]) => v).filter((v) => v > 0),
  );
  if (positives.length === 0) {
    throw new SchemaError(
      "log-scale V plot needs at least one positive V value",
    );
  }
  const bounds = dataBounds(series);
  const x = linearScale(bounds.xMin, bounds.xMax, PLOT.left, PLOT.right);
  const y = log10Scale(
    Math.min(...positives), Math.max(...positives), PLOT.bottom, PLOT.top,
  );
  const labels = DEFAULT_LABELS.trajectory_log_v;
  return svgDocument([
    ...axes(x, y, spec.xLabel ?? labels.x, spec.yLabel ?? labels.y,
      spec.title ?? "viral load (log scale)",
      (v) => tickLabel(Math.log10(v)) === "0" ? "1" : `1e${Math.round(Math.log10(v))}`),
    ...drawSeries(series, x, y),
    ...legend(series),
  ]);
}

function renderSweep(rows: SweepRow[], spec: PlotSpec): string {
  const byV0 = spec.kind === "sweep_by_v0";
  const xOf = (row: SweepRow) => (byV0 ? row.v0 : row.t0);
  const groupOf = (row: SweepRow) => (byV0 ? row.t0 : row.v0);
  const groupName = byV0 ? "T0" : "V0";

  // one series per value of the other axis, in order of first appearance
  const series: Series[] = [];
  const index = new Map<number, Series>();
  for (const row of rows) {
    const key = groupOf(row);
    let s = index.get(key);
    if (s === undefined) {
      s = {
        label: `${groupName}=${tickLabel(key)}`,
        color: seriesColor(series.length),
        points: [],
      };
      index.set(key, s);
      series.push(s);
    }
    s.points.push([xOf(row), row.pExtinct]);
  }

  const mean =
    rows.reduce((acc, row) => acc + row.pExtinct, 0) / rows.length;
  const bounds = dataBounds(series);
  const x = linearScale(bounds.xMin, bounds.xMax, PLOT.left, PLOT.right);
  const y = linearScale(
    0, Math.max(bounds.yMax, mean) * 1.05 || 1.0, PLOT.bottom, PLOT.top,
  );
  const labels = DEFAULT_LABELS[spec.kind];
  const meanY = y.toPx(mean);
  return svgDocument([
    ...axes(x, y, spec.xLabel ?? labels.x, spec.yLabel ?? labels.y,
      spec.title ?? (byV0 ? "extinction by initial V" : "extinction by initial T")),
    line(PLOT.left, meanY, PLOT.right, meanY, "#444",
      ' stroke-dasharray="6 4" stroke-width="1.2"'),
    text(PLOT.right - 4, meanY - 6, `mean ${tickLabel(mean)}`, "end"),
    // connecting lines where a series has >1 point; exactly one marker per row
    ...series
      .filter((s) => s.points.length > 1)
      .map((s) =>
        polyline(
          s.points.map(([xv, yv]) => [x.toPx(xv), y.toPx(yv)] as [number, number]),
          s.color,
        ),
      ),
    ...series.flatMap((s) =>
      s.points.map(([xv, yv]) => circle(x.toPx(xv), y.toPx(yv), s.color)),
    ),
    ...legend(series),
  ]);
}

/** Render the figure for `spec` from already-loaded file contents. */
export function renderFromContents(
  spec: PlotSpec,
  contents: string[],
): string {
  if (spec.inputs.length !== contents.length) {
    throw new Error("inputs and contents must align");
  }
  if (spec.inputs.length === 0) {
    throw new SchemaError("at least one --input is required");
  }
  if (spec.kind === "trajectory" || spec.kind === "trajectory_log_v") {
    const tables = contents.map((content, i) => ({
      path: spec.inputs[i]!,
      rows: parseTrajectoryCsv(content),
    }));
    return spec.kind === "trajectory"
      ? renderTrajectory(tables, spec)
      : renderTrajectoryLogV(tables, spec);
  }
  if (spec.inputs.length !== 1) {
    throw new SchemaError(`${spec.kind} takes exactly one input CSV`);
  }
  return renderSweep(parseSweepCsv(contents[0]!), spec);
}
