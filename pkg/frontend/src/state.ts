import type { MapMode, Meta } from "./types.js";

/** Single source of truth for what the dashboard shows.  One timeframe
 * drives every view; the mode toggle changes nothing else. */
export interface ViewState {
  metric: string;
  from: string;
  to: string;
  models: string[];
  group: string | null;
  mode: MapMode;
  chartStates: string[];
  chartZoom: [string, string] | null;
}

export const GROUPS = ["West", "Midwest", "South", "East"] as const;

export function initialState(meta: Meta): ViewState {
  const from = meta.default_dates.from ?? meta.dates.min ?? "";
  const to = meta.default_dates.to ?? meta.dates.max ?? "";
  return {
    metric: "cases_daily",
    from,
    to,
    models: meta.models.slice(),
    group: null,
    mode: "original",
    chartStates: [],
    chartZoom: null,
  };
}

function invariants(state: ViewState): ViewState {
  if (state.from > state.to) {
    throw new Error(`range start ${state.from} is after end ${state.to}`);
  }
  if (state.mode === "surprise" && state.models.length < 1) {
    throw new Error("surprise mode requires at least one active model");
  }
  return state;
}

export function setRange(state: ViewState, from: string, to: string): ViewState {
  return invariants({ ...state, from, to });
}

export function setMetric(state: ViewState, metric: string): ViewState {
  return invariants({ ...state, metric });
}

export function toggleMode(state: ViewState): ViewState {
  const mode: MapMode = state.mode === "original" ? "surprise" : "original";
  return invariants({ ...state, mode });
}

export function setModels(state: ViewState, models: string[]): ViewState {
  return invariants({ ...state, models: models.slice() });
}

export function setGroup(state: ViewState, group: string | null): ViewState {
  return invariants({ ...state, group });
}

export function setChartStates(state: ViewState, chartStates: string[]): ViewState {
  return invariants({ ...state, chartStates: chartStates.slice() });
}

export function setChartZoom(state: ViewState,
                             zoom: [string, string] | null): ViewState {
  if (zoom && zoom[0] > zoom[1]) {
    zoom = [zoom[1], zoom[0]];
  }
  return invariants({ ...state, chartZoom: zoom });
}
