/** Figure semantics: per-kind values, saturation jitter, series assembly. */

import { BenchRow } from "./csv.js";
import { mulberry32 } from "./prng.js";

export const FIGURE_KINDS = [
  "milp-time",
  "total-time",
  "gap-pct",
  "lp-gap-pct",
  "milp-time-noise",
  "total-time-noise",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

/** Wall-clock ceiling used by the bench harness; rows at it are saturated. */
export const TIME_CAP_SECONDS = 1000.0;
/** Jitter half-width as a fraction of the cap. */
export const JITTER_FRACTION = 0.05;

export function gapPercent(row: BenchRow): number {
  return (100 * (row.milpObj - row.mipDualBound)) / row.milpObj;
}

export function lpGapPercent(row: BenchRow): number {
  return (100 * (row.milpObj - row.lpObj)) / row.milpObj;
}

export function isSaturated(row: BenchRow): boolean {
  return row.milpTime >= TIME_CAP_SECONDS;
}

function baseValue(row: BenchRow, kind: FigureKind): number {
  switch (kind) {
    case "milp-time":
    case "milp-time-noise":
      return row.milpTime;
    case "total-time":
    case "total-time-noise":
      return row.milpTime + row.totalLpTime;
    case "gap-pct":
      return gapPercent(row);
    case "lp-gap-pct":
      return lpGapPercent(row);
  }
}

export interface Point {
  file: string;
  x: number;
  y: number;
  jittered: boolean;
}

export interface Series {
  approach: "la-disc" | "baseline";
  points: Point[];
}

export interface FigureData {
  kind: FigureKind;
  yLabel: string;
  files: string[];
  series: Series[];
}

const Y_LABELS: Record<FigureKind, string> = {
  "milp-time": "MILP time (s)",
  "total-time": "MILP + LP time (s)",
  "gap-pct": "integrality gap (%)",
  "lp-gap-pct": "LP integrality gap (%)",
  "milp-time-noise": "MILP time (s, saturated points jittered)",
  "total-time-noise": "MILP + LP time (s, saturated points jittered)",
};

/**
 * One point per (instance, approach).  Noise variants move only rows whose
 * MILP hit the time cap, by a seeded uniform shift of +-5% of the cap; the
 * random stream is consumed in row order so output depends only on the seed.
 */
export function computeFigure(rows: BenchRow[], kind: FigureKind, seed: number): FigureData {
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown figure kind: ${kind}`);
  }
  const files = [...new Set(rows.map((r) => r.file))].sort();
  const index = new Map(files.map((f, i) => [f, i]));
  const noisy = kind.endsWith("-noise");
  const rand = mulberry32(seed);
  const series: Record<string, Point[]> = { "la-disc": [], baseline: [] };
  for (const row of rows) {
    let y = baseValue(row, kind);
    let jittered = false;
    if (noisy && isSaturated(row)) {
      y += (2 * rand() - 1) * JITTER_FRACTION * TIME_CAP_SECONDS;
      jittered = true;
    }
    series[row.approach].push({
      file: row.file,
      x: index.get(row.file)!,
      y,
      jittered,
    });
  }
  return {
    kind,
    yLabel: Y_LABELS[kind],
    files,
    series: [
      { approach: "la-disc", points: series["la-disc"] },
      { approach: "baseline", points: series["baseline"] },
    ],
  };
}
