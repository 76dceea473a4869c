/** Strict readers for the two CSV schemas emitted by the virosim CLI. */

export class SchemaError extends Error {
  override name = "SchemaError";
}

export interface TrajectoryRow {
  t: number;
  T: number;
  I: number;
  V: number;
}

export interface SweepRow {
  t0: number;
  v0: number;
  trials: number;
  extinct: number;
  pExtinct: number;
  ciLow: number;
  ciHigh: number;
}

const TRAJECTORY_HEADER = "t,T,I,V";
const SWEEP_HEADER = "T0,V0,trials,extinct,p_extinct,ci_low,ci_high";

/** Split into non-empty lines, preserving order; trailing newline is fine. */
function lines(text: string): string[] {
  const out = text.split(/\r?\n/);
  while (out.length > 0 && out[out.length - 1] === "") {
    out.pop();
  }
  return out;
}

function parseNumber(field: string, line: number, column: string): number {
  if (field === "" || !/^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$/.test(field)) {
    throw new SchemaError(
      `line ${line}: column '${column}' is not a number: '${field}'`,
    );
  }
  const value = Number(field);
  if (!Number.isFinite(value)) {
    throw new SchemaError(`line ${line}: column '${column}' is not finite`);
  }
  return value;
}

function parseRows(
  text: string,
  expectedHeader: string,
  label: string,
): string[][] {
  const all = lines(text);
  if (all.length === 0) {
    throw new SchemaError(`empty file; expected a ${label} CSV`);
  }
  if (all[0] !== expectedHeader) {
    throw new SchemaError(
      `not a ${label} CSV: header is '${all[0]}', expected '${expectedHeader}'`,
    );
  }
  if (all.length === 1) {
    throw new SchemaError(`${label} CSV has a header but no data rows`);
  }
  const width = expectedHeader.split(",").length;
  const names = expectedHeader.split(",");
  return all.slice(1).map((row, index) => {
    const fields = row.split(",");
    if (fields.length !== width) {
      throw new SchemaError(
        `line ${index + 2}: expected ${width} fields (${names.join(", ")}), ` +
          `got ${fields.length}`,
      );
    }
    return fields;
  });
}

/** Parse a `t,T,I,V` trajectory CSV, keeping file order. */
export function parseTrajectoryCsv(text: string): TrajectoryRow[] {
  const names = TRAJECTORY_HEADER.split(",");
  return parseRows(text, TRAJECTORY_HEADER, "trajectory").map((fields, i) => {
    const [t, T, I, V] = fields.map((field, j) =>
      parseNumber(field, i + 2, names[j] ?? String(j)),
    );
    return { t: t!, T: T!, I: I!, V: V! };
  });
}

/** Parse a per-initial-condition `sweep.csv`, keeping file order. */
export function parseSweepCsv(text: string): SweepRow[] {
  const names = SWEEP_HEADER.split(",");
  return parseRows(text, SWEEP_HEADER, "sweep").map((fields, i) => {
    const value = (j: number) =>
      parseNumber(fields[j] ?? "", i + 2, names[j] ?? String(j));
    const row: SweepRow = {
      t0: value(0),
      v0: value(1),
      trials: value(2),
      extinct: value(3),
      pExtinct: value(4),
      ciLow: value(5),
      ciHigh: value(6),
    };
    if (!Number.isInteger(row.trials) || !Number.isInteger(row.extinct)) {
      throw new SchemaError(
        `line ${i + 2}: trials/extinct must be integers`,
      );
    }
    return row;
  });
}
