/** Colormaps: a sequential ramp for raw values, a diverging ramp centered
 * at zero for signed surprise so the hue always carries the sign. */

export const NO_DATA_FILL = "#d9d9d9";

type Rgb = [number, number, number];

const SEQ_LOW: Rgb = [247, 251, 255];
const SEQ_HIGH: Rgb = [8, 81, 156];

const DIV_NEG: Rgb = [33, 102, 172]; // blue: below expectation
const DIV_MID: Rgb = [247, 247, 247];
const DIV_POS: Rgb = [178, 24, 43]; // red: above expectation

function mix(a: Rgb, b: Rgb, t: number): string {
  const clamped = Math.max(0, Math.min(1, t));
  const channel = (i: number) => Math.round(a[i] + (b[i] - a[i]) * clamped);
  return `rgb(${channel(0)},${channel(1)},${channel(2)})`;
}

/** Sequential fill for a non-negative value against a maximum. */
export function sequentialFill(value: number, max: number): string {
  if (!isFinite(value)) {
    return NO_DATA_FILL;
  }
  if (max <= 0) {
    return mix(SEQ_LOW, SEQ_HIGH, 0);
  }
  return mix(SEQ_LOW, SEQ_HIGH, value / max);
}

/** Diverging fill for a signed value against a symmetric extent. */
export function divergingFill(value: number, extent: number): string {
  if (!isFinite(value)) {
    return NO_DATA_FILL;
  }
  if (extent <= 0 || value === 0) {
    return mix(DIV_MID, DIV_MID, 0);
  }
  return value > 0
    ? mix(DIV_MID, DIV_POS, value / extent)
    : mix(DIV_MID, DIV_NEG, -value / extent);
}

export interface LegendModel {
  title: string;
  stops: { color: string; label: string }[];
}

export function sequentialLegend(max: number, title: string): LegendModel {
  const stops = [0, 0.25, 0.5, 0.75, 1].map((t) => ({
    color: sequentialFill(t * max, max),
    label: formatNumber(t * max),
  }));
  return { title, stops };
}

export function divergingLegend(extent: number): LegendModel {
  const stops = [-1, -0.5, 0, 0.5, 1].map((t) => ({
    color: divergingFill(t * extent, extent),
    label: formatNumber(t * extent),
  }));
  return { title: "signed surprise (bits)", stops };
}

export function formatNumber(value: number): string {
  if (value === 0) {
    return "0";
  }
  const magnitude = Math.abs(value);
  if (magnitude >= 1000) {
    return value.toLocaleString("en-US", { maximumFractionDigits: 0 });
  }
  if (magnitude >= 1) {
    return value.toFixed(2).replace(/\.?0+$/, "");
  }
  return value.toPrecision(3);
}
