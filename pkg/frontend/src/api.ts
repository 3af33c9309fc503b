import type {
  FeatureCollection,
  FrameValues,
  Meta,
  ModelInfo,
  SeriesResponse,
  SurpriseFrame,
} from "./types.js";

/** URL builders are pure so tests can pin the exact requests issued. */
export function metaUrl(): string {
  return "/meta";
}

export function modelsUrl(): string {
  return "/models";
}

export function regionsUrl(group: string | null): string {
  return group ? `/regions?group=${encodeURIComponent(group)}` : "/regions";
}

export function frameUrl(metric: string, date: string,
                         view: "raw" | "per_capita"): string {
  return `/frame?metric=${encodeURIComponent(metric)}&date=${date}&view=${view}`;
}

export function surpriseUrl(metric: string, from: string, to: string,
                            models: string[]): string {
  const names = models.map(encodeURIComponent).join(",");
  return `/surprise?metric=${encodeURIComponent(metric)}&from=${from}&to=${to}`
    + `&models=${names}`;
}

export function seriesUrl(fips: string, metric: string, from: string, to: string,
                          smooth: string | null): string {
  let url = `/series?fips=${fips}&metric=${encodeURIComponent(metric)}`
    + `&from=${from}&to=${to}`;
  if (smooth) {
    url += `&smooth=${smooth}`;
  }
  return url;
}

/** Everything the dashboard knows arrives through this interface. */
export interface Api {
  meta(): Promise<Meta>;
  models(): Promise<{ models: ModelInfo[] }>;
  regions(group: string | null): Promise<FeatureCollection>;
  frame(metric: string, date: string, view: "raw" | "per_capita"): Promise<FrameValues>;
  surprise(metric: string, from: string, to: string,
           models: string[]): Promise<SurpriseFrame[]>;
  series(fips: string, metric: string, from: string, to: string,
         smooth: string | null): Promise<SeriesResponse>;
}

async function getJson<T>(url: string): Promise<T> {
  const response = await fetch(url);
  if (!response.ok) {
    let detail = `${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) {
        detail = body.error;
      }
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new Error(`${url}: ${detail}`);
  }
  return (await response.json()) as T;
}

export class HttpApi implements Api {
  meta(): Promise<Meta> {
    return getJson(metaUrl());
  }

  models(): Promise<{ models: ModelInfo[] }> {
    return getJson(modelsUrl());
  }

  regions(group: string | null): Promise<FeatureCollection> {
    return getJson(regionsUrl(group));
  }

  frame(metric: string, date: string,
        view: "raw" | "per_capita"): Promise<FrameValues> {
    return getJson(frameUrl(metric, date, view));
  }

  surprise(metric: string, from: string, to: string,
           models: string[]): Promise<SurpriseFrame[]> {
    return getJson(surpriseUrl(metric, from, to, models));
  }

  series(fips: string, metric: string, from: string, to: string,
         smooth: string | null): Promise<SeriesResponse> {
    return getJson(seriesUrl(fips, metric, from, to, smooth));
  }
}
