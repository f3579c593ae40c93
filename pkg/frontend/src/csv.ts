/** Parsing and validation of the solver's bench results CSV. */

export const EXPECTED_HEADER =
  "file,approach,lp_obj,mip_dual_bound,milp_obj,milp_time,total_lp_time,ten_x";

export interface BenchRow {
  file: string;
  approach: "la-disc" | "baseline";
  lpObj: number;
  mipDualBound: number;
  milpObj: number;
  milpTime: number;
  totalLpTime: number;
  tenX: string;
}

export class SchemaError extends Error {}

function num(field: string, token: string, line: number): number {
  const value = Number(token);
  if (token === "" || Number.isNaN(value)) {
    throw new SchemaError(`line ${line}: ${field} is not numeric: "${token}"`);
  }
  return value;
}

export function parseBenchCsv(text: string): BenchRow[] {
  const lines = text.split(/\r?\n/).filter((l) => l.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError("empty CSV");
  }
  if (lines[0].trim() !== EXPECTED_HEADER) {
    throw new SchemaError(
      `header mismatch: expected "${EXPECTED_HEADER}", got "${lines[0].trim()}"`,
    );
  }
  if (lines.length === 1) {
    throw new SchemaError("CSV has a header but no rows");
  }
  const rows: BenchRow[] = [];
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 8) {
      throw new SchemaError(`line ${i + 1}: expected 8 fields, got ${parts.length}`);
    }
    const approach = parts[1];
    if (approach !== "la-disc" && approach !== "baseline") {
      throw new SchemaError(`line ${i + 1}: unknown approach "${approach}"`);
    }
    rows.push({
      file: parts[0],
      approach,
      lpObj: num("lp_obj", parts[2], i + 1),
      mipDualBound: num("mip_dual_bound", parts[3], i + 1),
      milpObj: num("milp_obj", parts[4], i + 1),
      milpTime: num("milp_time", parts[5], i + 1),
      totalLpTime: num("total_lp_time", parts[6], i + 1),
      tenX: parts[7],
    });
  }
  return rows;
}
