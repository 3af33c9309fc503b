/** Payload shapes served by the analytics API; the client renders these
 * verbatim and derives nothing statistical on its own. */

export interface Meta {
  snapshot_version: number;
  dates: { min: string | null; max: string | null };
  default_dates: { from: string | null; to: string | null };
  regions: { counties: number; states: number };
  metrics: string[];
  models: string[];
}

export interface ModelInfo {
  name: string;
  kind: string;
  parameters: Record<string, number>;
}

export interface FrameEntry {
  fips: string;
  observed: number;
  expected: number;
  surprise: number;
  signed: number;
}

export interface SurpriseFrame {
  date: string;
  metric: string;
  models: string[];
  entries: FrameEntry[];
}

export type FrameValues = Record<string, number>;

export interface SeriesResponse {
  fips: string;
  metric: string;
  smooth: string | null;
  points: [string, number][];
}

export interface Feature {
  type: "Feature";
  geometry: Geometry | null;
  properties: { fips: string; name?: string; state?: string; population?: number | null };
}

export type Geometry =
  | { type: "Polygon"; coordinates: number[][][] }
  | { type: "MultiPolygon"; coordinates: number[][][][] };

export interface FeatureCollection {
  type: "FeatureCollection";
  features: Feature[];
}

export type MapMode = "original" | "surprise";
