import type { Api } from "../src/api.js";
import type {
  FeatureCollection,
  FrameValues,
  Meta,
  ModelInfo,
  SeriesResponse,
  SurpriseFrame,
} from "../src/types.js";

export const META: Meta = {
  snapshot_version: 5,
  dates: { min: "2020-03-01", max: "2021-04-04" },
  default_dates: { from: null, to: null },
  regions: { counties: 2, states: 1 },
  metrics: ["cases_cum", "cases_daily"],
  models: ["uniform", "population_proportional"],
};

export const REGIONS: FeatureCollection = {
  type: "FeatureCollection",
  features: [
    {
      type: "Feature",
      geometry: { type: "Polygon", coordinates: [[[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]]] },
      properties: { fips: "39001", name: "Adams County", state: "OH", population: 8000 },
    },
    {
      type: "Feature",
      geometry: { type: "Polygon", coordinates: [[[1, 0], [2, 0], [2, 1], [1, 1], [1, 0]]] },
      properties: { fips: "39003", name: "Boone County", state: "OH", population: 15000 },
    },
  ],
};

export const FRAME_RAW: FrameValues = { "39001": 12, "39003": 40 };
export const FRAME_PC: FrameValues = { "39001": 150, "39003": 266.67 };

export const SURPRISE: SurpriseFrame[] = [
  {
    date: "2021-04-04",
    metric: "cases_daily",
    models: ["uniform", "population_proportional"],
    entries: [
      { fips: "39001", observed: 0.0015, expected: 0.001, surprise: 0.4, signed: 0.4 },
      { fips: "39003", observed: 0.0008, expected: 0.001, surprise: 0.9, signed: -0.9 },
    ],
  },
];

export const SERIES_POINTS: [string, number][] = [
  ["2020-03-01", 1], ["2020-03-02", 3], ["2020-03-03", 2],
];

export class FakeApi implements Api {
  calls: string[] = [];
  metaPayload: Meta = META;
  surprisePayload: SurpriseFrame[] = SURPRISE;
  framePayloads: { raw: FrameValues; per_capita: FrameValues } = {
    raw: FRAME_RAW, per_capita: FRAME_PC,
  };
  seriesFailure: Error | null = null;
  surpriseDelay: (() => Promise<void>) | null = null;

  count(prefix: string): number {
    return this.calls.filter((c) => c.startsWith(prefix)).length;
  }

  async meta(): Promise<Meta> {
    this.calls.push("meta");
    return this.metaPayload;
  }

  async models(): Promise<{ models: ModelInfo[] }> {
    this.calls.push("models");
    return {
      models: this.metaPayload.models.map((name) => ({
        name, kind: name, parameters: {},
      })),
    };
  }

  async regions(group: string | null): Promise<FeatureCollection> {
    this.calls.push(`regions:${group ?? "all"}`);
    return REGIONS;
  }

  async frame(metric: string, date: string,
              view: "raw" | "per_capita"): Promise<FrameValues> {
    this.calls.push(`frame:${metric}:${date}:${view}`);
    return this.framePayloads[view];
  }

  async surprise(metric: string, from: string, to: string,
                 models: string[]): Promise<SurpriseFrame[]> {
    this.calls.push(`surprise:${metric}:${from}:${to}:${models.join(",")}`);
    if (this.surpriseDelay) {
      await this.surpriseDelay();
    }
    return this.surprisePayload;
  }

  async series(fips: string, metric: string, from: string, to: string,
               smooth: string | null): Promise<SeriesResponse> {
    this.calls.push(`series:${fips}:${metric}:${from}:${to}:${smooth}`);
    if (this.seriesFailure) {
      throw this.seriesFailure;
    }
    return { fips, metric, smooth, points: SERIES_POINTS };
  }
}

/** Every numeric literal reachable in a JSON payload, as formatted pieces. */
export function numbersIn(value: unknown, out: Set<number> = new Set()): Set<number> {
  if (typeof value === "number") {
    out.add(value);
  } else if (Array.isArray(value)) {
    for (const item of value) {
      numbersIn(item, out);
    }
  } else if (value && typeof value === "object") {
    for (const item of Object.values(value)) {
      numbersIn(item, out);
    }
  }
  return out;
}
