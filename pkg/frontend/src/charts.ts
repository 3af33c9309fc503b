/** Render models for the per-state line charts.  Pure: date/value series
 * in, pixel-space polylines and axis ticks out.  Drag-to-zoom crops the
 * x-domain; a null zoom restores the full extent. */

export const STATE_COLORS = [
  "#1b6ca8", "#d1495b", "#66a182", "#edae49", "#8d6cab",
  "#2e4057", "#00798c", "#d96c06", "#6b4226", "#9a8c98",
];

export interface ChartSeries {
  label: string;
  color: string;
  polyline: string; // SVG points attribute
  lastValue: number | null;
}

export interface ChartModel {
  title: string;
  series: ChartSeries[];
  xTicks: { x: number; label: string }[];
  yTicks: { y: number; label: string }[];
  xDomain: [string, string] | null;
  emptyMessage: string | null;
}

export interface ChartLayout {
  width: number;
  height: number;
  marginLeft: number;
  marginBottom: number;
  marginTop: number;
  marginRight: number;
}

export const DEFAULT_LAYOUT: ChartLayout = {
  width: 420,
  height: 150,
  marginLeft: 52,
  marginBottom: 22,
  marginTop: 8,
  marginRight: 10,
};

export function buildChartModel(
  title: string,
  seriesByLabel: Map<string, [string, number][]>,
  zoom: [string, string] | null,
  layout: ChartLayout = DEFAULT_LAYOUT,
): ChartModel {
  if (seriesByLabel.size === 0) {
    return { title, series: [], xTicks: [], yTicks: [], xDomain: null,
             emptyMessage: "select at least one state" };
  }

  const cropped = new Map<string, [string, number][]>();
  for (const [label, points] of seriesByLabel) {
    const kept = zoom
      ? points.filter(([date]) => date >= zoom[0] && date <= zoom[1])
      : points;
    cropped.set(label, kept);
  }

  let minDate: string | null = null;
  let maxDate: string | null = null;
  let maxValue = 0;
  for (const points of cropped.values()) {
    for (const [date, value] of points) {
      if (minDate === null || date < minDate) minDate = date;
      if (maxDate === null || date > maxDate) maxDate = date;
      if (value > maxValue) maxValue = value;
    }
  }
  if (minDate === null || maxDate === null) {
    return { title, series: [], xTicks: [], yTicks: [], xDomain: null,
             emptyMessage: "no data in range" };
  }

  const t0 = Date.parse(minDate);
  const t1 = Math.max(Date.parse(maxDate), t0 + 1);
  const plotWidth = layout.width - layout.marginLeft - layout.marginRight;
  const plotHeight = layout.height - layout.marginTop - layout.marginBottom;
  const x = (date: string) =>
    layout.marginLeft + ((Date.parse(date) - t0) / (t1 - t0)) * plotWidth;
  const y = (value: number) =>
    layout.marginTop + plotHeight - (maxValue > 0 ? (value / maxValue) * plotHeight : 0);

  const series: ChartSeries[] = [];
  let colorIndex = 0;
  for (const [label, points] of cropped) {
    const polyline = points
      .map(([date, value]) => `${round1(x(date))},${round1(y(value))}`)
      .join(" ");
    series.push({
      label,
      color: STATE_COLORS[colorIndex++ % STATE_COLORS.length]!,
      polyline,
      lastValue: points.length ? points[points.length - 1]![1] : null,
    });
  }

  const xTicks = [0, 0.5, 1].map((t) => {
    const when = new Date(t0 + t * (t1 - t0)).toISOString().slice(0, 10);
    return { x: round1(layout.marginLeft + t * plotWidth), label: when };
  });
  const yTicks = [0, 0.5, 1].map((t) => ({
    y: round1(y(t * maxValue)),
    label: compact(t * maxValue),
  }));

  return { title, series, xTicks, yTicks, xDomain: [minDate, maxDate],
           emptyMessage: null };
}

function compact(value: number): string {
  if (value >= 1_000_000) return `${(value / 1_000_000).toFixed(1)}M`;
  if (value >= 1_000) return `${(value / 1_000).toFixed(1)}k`;
  if (Number.isInteger(value)) return String(value);
  return value.toFixed(1);
}

function round1(x: number): number {
  return Math.round(x * 10) / 10;
}
