// Display formatting. Numbers mirror the backend's rendering (at most nine
// fractional digits, trailing zeros trimmed) so the screen shows 137.78, not
// the float noise underneath.

import type { QueryJson, SelectionJson } from "./types.js";

export function fmtNumber(x: number | null | undefined): string {
  if (x === null || x === undefined) {
    return "n/a";
  }
  if (!Number.isFinite(x)) {
    return String(x);
  }
  const fixed = x.toFixed(9).replace(/0+$/, "").replace(/\.$/, "");
  return fixed === "" || fixed === "-" ? "0" : fixed;
}

function selectionText(selection: SelectionJson | undefined): string {
  if (selection === undefined || selection === "*") {
    return "*";
  }
  return [...selection].sort().join(",");
}

/** One-line query rendering in dimension order: `Year=2011,2012; Supplier=*`. */
export function queryText(query: QueryJson, dimensions: string[]): string {
  return dimensions
    .map((d) => `${d}=${selectionText(query[d])}`)
    .join("; ");
}

/** `Volume=3, Cost=0.9` in measure order. */
export function factorsText(
  factors: Record<string, number>,
  measures: string[],
): string {
  return measures.map((m) => `${m}=${fmtNumber(factors[m] ?? 1)}`).join(", ");
}
