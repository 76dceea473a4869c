#!/usr/bin/env node
/**
 * plotgen: render SVG figures from virosim CSV outputs.
 *
 * Usage:
 *   plotgen --kind trajectory        --input trajectory.csv --out fig.svg
 *   plotgen --kind trajectory_log_v  --input a.csv --input b.csv --out fig.svg
 *   plotgen --kind sweep_by_v0       --input sweep.csv --out fig.svg
 *
 * Optional: --x-label, --y-label, --title. Exit codes: 0 success,
 * 2 usage or schema error.
 */

import { readFileSync, writeFileSync } from "fs";
import { parseArgs } from "util";

import { SchemaError } from "./csv";
import { PLOT_KINDS, PlotKind, PlotSpec, renderFromContents } from "./plots";

export function render(spec: PlotSpec): void {
  const contents = spec.inputs.map((path) => {
    try {
      return readFileSync(path, "utf-8");
    } catch {
      throw new SchemaError(`cannot read input CSV: ${path}`);
    }
  });
  writeFileSync(spec.output, renderFromContents(spec, contents), "utf-8");
}

function usageError(message: string): never {
  throw new SchemaError(message);
}

export function specFromArgv(argv: string[]): PlotSpec {
  const { values } = parseArgs({
    args: argv,
    options: {
      kind: { type: "string" },
      input: { type: "string", multiple: true },
      out: { type: "string" },
      "x-label": { type: "string" },
      "y-label": { type: "string" },
      title: { type: "string" },
    },
    allowPositionals: false,
  });
  const kind = values.kind;
  if (kind === undefined || !PLOT_KINDS.includes(kind as PlotKind)) {
    usageError(
      `--kind must be one of ${PLOT_KINDS.join(", ")}; got '${kind ?? ""}'`,
    );
  }
  if (values.input === undefined || values.input.length === 0) {
    usageError("at least one --input CSV is required");
  }
  if (values.out === undefined) {
    usageError("--out SVG path is required");
  }
  return {
    kind: kind as PlotKind,
    inputs: values.input,
    output: values.out,
    xLabel: values["x-label"],
    yLabel: values["y-label"],
    title: values.title,
  };
}

export function runCli(argv: string[]): number {
  try {
    const spec = specFromArgv(argv);
    render(spec);
    process.stdout.write(`wrote ${spec.output}\n`);
    return 0;
  } catch (error) {
    const message =
      error instanceof Error ? error.message : String(error);
    process.stderr.write(`plotgen: ${message}\n`);
    return 2;
  }
}

if (require.main === module) {
  process.exit(runCli(process.argv.slice(2)));
}
