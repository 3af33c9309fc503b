import { formatNumber } from "./color.js";
import type { FrameEntry, MapMode } from "./types.js";

/** Hover detail for one region.  In surprise mode the popup carries four
 * data fields (raw, per-capita, signed surprise in bits, consensus
 * expectation); in original mode just the two value fields. */

export interface TooltipModel {
  heading: string;
  fields: { label: string; value: string }[];
  noData: boolean;
}

export function buildTooltip(
  mode: MapMode,
  name: string,
  raw: number | undefined,
  perCapita: number | undefined,
  entry: FrameEntry | undefined,
): TooltipModel {
  if (mode === "original" && raw === undefined) {
    return { heading: name, fields: [], noData: true };
  }
  if (mode === "surprise" && entry === undefined) {
    return { heading: name, fields: [], noData: true };
  }
  const fields: { label: string; value: string }[] = [
    { label: "raw", value: raw === undefined ? "n/a" : formatNumber(raw) },
    {
      label: "per 100k",
      value: perCapita === undefined ? "n/a" : formatNumber(perCapita),
    },
  ];
  if (mode === "surprise" && entry !== undefined) {
    fields.push({ label: "surprise (bits)", value: formatNumber(entry.signed) });
    fields.push({ label: "expected rate", value: formatNumber(entry.expected) });
  }
  return { heading: name, fields, noData: false };
}
