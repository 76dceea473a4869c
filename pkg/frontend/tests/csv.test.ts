import { describe, expect, it } from "vitest";

import { parseSweepCsv, parseTrajectoryCsv, SchemaError } from "../src/csv";

const TRAJECTORY = [
  "t,T,I,V",
  "0.0,1000.0,0.0,0.001",
  "0.1,999.5,0.2,0.05",
  "0.2,998.1,0.9,1.2",
].join("\n");

const SWEEP = [
  "T0,V0,trials,extinct,p_extinct,ci_low,ci_high",
  "100.0,100.0,2000,340,0.17,0.154,0.187",
  "100.0,200.0,2000,351,0.1755,0.159,0.193",
].join("\n");

describe("parseTrajectoryCsv", () => {
  it("keeps rows in file order", () => {
    const rows = parseTrajectoryCsv(TRAJECTORY);
    expect(rows).toHaveLength(3);
    expect(rows[0]).toEqual({ t: 0.0, T: 1000.0, I: 0.0, V: 0.001 });
    expect(rows.map((r) => r.t)).toEqual([0.0, 0.1, 0.2]);
  });

  it("accepts a trailing newline", () => {
    expect(parseTrajectoryCsv(TRAJECTORY + "\n")).toHaveLength(3);
  });

  it("rejects a foreign header naming the expectation", () => {
    expect(() => parseTrajectoryCsv(SWEEP)).toThrowError(
      /expected 't,T,I,V'/,
    );
  });

  it("rejects non-numeric cells with line and column", () => {
    const bad = "t,T,I,V\n0.0,1000.0,zero,0.001";
    expect(() => parseTrajectoryCsv(bad)).toThrowError(/line 2.*'I'/);
  });

  it("rejects a short row", () => {
    const bad = "t,T,I,V\n0.0,1000.0,0.0";
    expect(() => parseTrajectoryCsv(bad)).toThrowError(/expected 4 fields/);
  });

  it("rejects empty input and header-only input", () => {
    expect(() => parseTrajectoryCsv("")).toThrowError(SchemaError);
    expect(() => parseTrajectoryCsv("t,T,I,V\n")).toThrowError(
      /no data rows/,
    );
  });

  it("parses exponent notation", () => {
    const rows = parseTrajectoryCsv("t,T,I,V\n0.0,1e3,0.0,1.5e-3");
    expect(rows[0]!.T).toBe(1000.0);
    expect(rows[0]!.V).toBeCloseTo(0.0015, 12);
  });
});

describe("parseSweepCsv", () => {
  it("parses the documented columns", () => {
    const rows = parseSweepCsv(SWEEP);
    expect(rows).toHaveLength(2);
    expect(rows[0]).toEqual({
      t0: 100.0,
      v0: 100.0,
      trials: 2000,
      extinct: 340,
      pExtinct: 0.17,
      ciLow: 0.154,
      ciHigh: 0.187,
    });
  });

  it("rejects fractional trial counts", () => {
    const bad =
      "T0,V0,trials,extinct,p_extinct,ci_low,ci_high\n" +
      "100.0,100.0,20.5,3,0.15,0.1,0.2";
    expect(() => parseSweepCsv(bad)).toThrowError(/integers/);
  });

  it("rejects a trajectory file", () => {
    expect(() => parseSweepCsv(TRAJECTORY)).toThrowError(/not a sweep CSV/);
  });
});
