/**
 * Figure renderer for bench results.
 *
 * Usage:
 *   lavrptw-report --csv results.csv --kind gap-pct --out fig.svg --seed 0
 *
 * Kinds: milp-time | total-time | gap-pct | lp-gap-pct |
 *        milp-time-noise | total-time-noise
 */

import { readFileSync, writeFileSync } from "node:fs";
import { parseBenchCsv, SchemaError } from "./csv.js";
import { computeFigure, FIGURE_KINDS, FigureKind } from "./figures.js";
import { renderSvg } from "./svg.js";

interface Args {
  csv: string;
  kind: FigureKind;
  out: string;
  seed: number;
}

function parseArgs(argv: string[]): Args {
  const opts = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near "${key}"`);
    }
    opts.set(key.slice(2), value);
  }
  const csv = opts.get("csv");
  const kind = opts.get("kind") as FigureKind | undefined;
  const out = opts.get("out");
  if (!csv || !kind || !out) {
    throw new Error("required: --csv PATH --kind KIND --out PATH [--seed N]");
  }
  if (!FIGURE_KINDS.includes(kind)) {
    throw new Error(`unknown kind "${kind}"; expected one of ${FIGURE_KINDS.join(", ")}`);
  }
  const seed = Number(opts.get("seed") ?? "0");
  if (!Number.isInteger(seed)) {
    throw new Error("--seed must be an integer");
  }
  return { csv, kind, out, seed };
}

export function runReport(argv: string[]): void {
  const args = parseArgs(argv);
  const rows = parseBenchCsv(readFileSync(args.csv, "utf-8"));
  const data = computeFigure(rows, args.kind, args.seed);
  const svg = renderSvg(data, `${args.kind} (${rows.length} rows)`);
  writeFileSync(args.out, svg, "utf-8");
  console.error(`wrote ${args.out} (${data.files.length} instances)`);
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url.endsWith(process.argv[1].split("/").pop() ?? "");

if (invokedDirectly) {
  try {
    runReport(process.argv.slice(2));
  } catch (err) {
    if (err instanceof SchemaError || err instanceof Error) {
      console.error(`error: ${err.message}`);
    }
    process.exit(1);
  }
}
