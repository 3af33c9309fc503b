import type { Api } from "./api.js";
import {
  divergingFill,
  divergingLegend,
  NO_DATA_FILL,
  sequentialFill,
  sequentialLegend,
  type LegendModel,
} from "./color.js";
import { buildChartModel, type ChartModel } from "./charts.js";
import {
  initialState,
  setChartStates,
  setChartZoom,
  setGroup,
  setMetric,
  setModels,
  setRange,
  toggleMode,
  type ViewState,
} from "./state.js";
import { buildTooltip, type TooltipModel } from "./tooltip.js";
import type {
  FeatureCollection,
  FrameEntry,
  FrameValues,
  Meta,
  SurpriseFrame,
} from "./types.js";

/** Chart panels shown for each selected state, all daily and smoothed. */
export const CHART_PANELS: { title: string; metric: string }[] = [
  { title: "cases (daily, 7-day avg)", metric: "cases_daily" },
  { title: "deaths (daily, 7-day avg)", metric: "deaths_daily" },
  { title: "vaccine doses (daily, 7-day avg)", metric: "vax_doses_daily" },
];

const STATE_FIPS: Record<string, string> = {
  AL: "01", AK: "02", AZ: "04", AR: "05", CA: "06", CO: "08", CT: "09",
  DE: "10", DC: "11", FL: "12", GA: "13", HI: "15", ID: "16", IL: "17",
  IN: "18", IA: "19", KS: "20", KY: "21", LA: "22", ME: "23", MD: "24",
  MA: "25", MI: "26", MN: "27", MS: "28", MO: "29", MT: "30", NE: "31",
  NV: "32", NH: "33", NJ: "34", NM: "35", NY: "36", NC: "37", ND: "38",
  OH: "39", OK: "40", OR: "41", PA: "42", RI: "44", SC: "45", SD: "46",
  TN: "47", TX: "48", UT: "49", VT: "50", VA: "51", WA: "53", WV: "54",
  WI: "55", WY: "56",
};

export interface MapRenderModel {
  mode: "original" | "surprise";
  fills: Record<string, string>;
  legend: LegendModel;
}

/** Orchestrates fetches against the API and exposes render models.
 * Every number that reaches the screen is read straight off an API
 * response; stale responses are discarded by sequence tokens. */
export class Controller {
  state!: ViewState;
  meta: Meta | null = null;
  regions: FeatureCollection = { type: "FeatureCollection", features: [] };
  frameRaw: FrameValues = {};
  framePerCapita: FrameValues = {};
  surpriseFrames: SurpriseFrame[] = [];
  chartSeries: Map<string, Map<string, [string, number][]>> = new Map();
  mapError: string | null = null;
  chartError: string | null = null;
  notify: () => void = () => {};

  private mapToken = 0;
  private chartToken = 0;
  private regionToken = 0;

  constructor(private api: Api) {}

  async init(): Promise<void> {
    this.meta = await this.api.meta();
    this.state = initialState(this.meta);
    await Promise.all([this.refreshRegions(), this.refreshMap()]);
    this.notify();
  }

  /** Slider bounds come from /meta and nowhere else. */
  sliderBounds(): { min: string; max: string } | null {
    if (!this.meta || !this.meta.dates.min || !this.meta.dates.max) {
      return null;
    }
    return { min: this.meta.dates.min, max: this.meta.dates.max };
  }

  async setRange(from: string, to: string): Promise<void> {
    this.state = setRange(this.state, from, to);
    await Promise.all([this.refreshMap(), this.refreshCharts()]);
    this.notify();
  }

  async setMetric(metric: string): Promise<void> {
    this.state = setMetric(this.state, metric);
    await this.refreshMap();
    this.notify();
  }

  async toggleMode(): Promise<void> {
    this.state = toggleMode(this.state);
    await this.refreshMap();
    this.notify();
  }

  async setModels(models: string[]): Promise<void> {
    this.state = setModels(this.state, models);
    if (this.state.mode === "surprise") {
      await this.refreshMap();
    }
    this.notify();
  }

  async setGroup(group: string | null): Promise<void> {
    this.state = setGroup(this.state, group);
    await this.refreshRegions();
    this.notify();
  }

  async setChartStates(states: string[]): Promise<void> {
    this.state = setChartStates(this.state, states);
    await this.refreshCharts();
    this.notify();
  }

  setChartZoom(zoom: [string, string] | null): void {
    this.state = setChartZoom(this.state, zoom);
    this.notify();
  }

  async refreshRegions(): Promise<void> {
    const token = ++this.regionToken;
    const collection = await this.api.regions(this.state.group);
    if (token === this.regionToken) {
      this.regions = collection;
    }
  }

  /** Refetch what the current mode displays; surprise mode fetches the
   * surprise frames exactly once per refresh. */
  async refreshMap(): Promise<void> {
    const token = ++this.mapToken;
    const { metric, from, to, mode, models } = this.state;
    try {
      const promises: [Promise<FrameValues>, Promise<FrameValues>,
                       Promise<SurpriseFrame[]> | null] = [
        this.api.frame(metric, to, "raw"),
        this.api.frame(metric, to, "per_capita"),
        mode === "surprise" ? this.api.surprise(metric, from, to, models) : null,
      ];
      const [raw, perCapita, frames] = await Promise.all(promises);
      if (token !== this.mapToken) {
        return; // a newer request superseded this one
      }
      this.frameRaw = raw;
      this.framePerCapita = perCapita;
      if (frames !== null) {
        this.surpriseFrames = frames;
      }
      this.mapError = null;
    } catch (err) {
      if (token === this.mapToken) {
        this.mapError = String(err);
      }
    }
  }

  async refreshCharts(): Promise<void> {
    const token = ++this.chartToken;
    const { from, to, chartStates } = this.state;
    try {
      const next: Map<string, Map<string, [string, number][]>> = new Map();
      for (const panel of CHART_PANELS) {
        next.set(panel.metric, new Map());
      }
      await Promise.all(chartStates.flatMap((postal) => {
        const fips = STATE_FIPS[postal];
        if (!fips) {
          return [];
        }
        return CHART_PANELS.map(async (panel) => {
          const response = await this.api.series(fips, panel.metric, from, to,
                                                 "rolling7");
          next.get(panel.metric)!.set(postal, response.points);
        });
      }));
      if (token !== this.chartToken) {
        return;
      }
      this.chartSeries = next;
      this.chartError = null;
    } catch (err) {
      if (token === this.chartToken) {
        this.chartError = String(err); // keep the last good chart data
      }
    }
  }

  /** Entries of the displayed (last) surprise frame, keyed by region. */
  surpriseEntries(): Map<string, FrameEntry> {
    const out = new Map<string, FrameEntry>();
    const last = this.surpriseFrames[this.surpriseFrames.length - 1];
    if (last) {
      for (const entry of last.entries) {
        out.set(entry.fips, entry);
      }
    }
    return out;
  }

  mapRenderModel(): MapRenderModel {
    const fills: Record<string, string> = {};
    if (this.state.mode === "original") {
      let max = 0;
      for (const value of Object.values(this.framePerCapita)) {
        max = Math.max(max, value);
      }
      for (const feature of this.regions.features) {
        const value = this.framePerCapita[feature.properties.fips];
        fills[feature.properties.fips] =
          value === undefined ? NO_DATA_FILL : sequentialFill(value, max);
      }
      return { mode: "original", fills,
               legend: sequentialLegend(max, `${this.state.metric} per 100k`) };
    }
    const entries = this.surpriseEntries();
    let extent = 0;
    for (const entry of entries.values()) {
      extent = Math.max(extent, Math.abs(entry.signed));
    }
    for (const feature of this.regions.features) {
      const entry = entries.get(feature.properties.fips);
      fills[feature.properties.fips] =
        entry === undefined ? NO_DATA_FILL : divergingFill(entry.signed, extent);
    }
    return { mode: "surprise", fills, legend: divergingLegend(extent) };
  }

  tooltipFor(fips: string): TooltipModel {
    const feature = this.regions.features.find((f) => f.properties.fips === fips);
    const name = feature?.properties.name ?? fips;
    return buildTooltip(this.state.mode, name, this.frameRaw[fips],
                        this.framePerCapita[fips],
                        this.surpriseEntries().get(fips));
  }

  chartModels(): ChartModel[] {
    return CHART_PANELS.map((panel) =>
      buildChartModel(panel.title,
                      this.chartSeries.get(panel.metric) ?? new Map(),
                      this.state.chartZoom));
  }
}
