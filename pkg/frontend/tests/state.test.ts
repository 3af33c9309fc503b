import { describe, expect, it } from "vitest";

import {
  initialState,
  setChartZoom,
  setModels,
  setRange,
  toggleMode,
} from "../src/state.js";
import { META } from "./helpers.js";

describe("view state", () => {
  it("initializes the range from meta bounds", () => {
    const state = initialState(META);
    expect(state.from).toBe("2020-03-01");
    expect(state.to).toBe("2021-04-04");
    expect(state.mode).toBe("original");
    expect(state.models).toEqual(META.models);
  });

  it("prefers configured default dates when present", () => {
    const meta = { ...META, default_dates: { from: "2020-06-01", to: "2020-07-01" } };
    const state = initialState(meta);
    expect([state.from, state.to]).toEqual(["2020-06-01", "2020-07-01"]);
  });

  it("rejects an inverted range", () => {
    const state = initialState(META);
    expect(() => setRange(state, "2021-01-01", "2020-01-01")).toThrow(/after/);
  });

  it("mode toggle flips only the mode", () => {
    const state = { ...initialState(META), group: "West", chartStates: ["OH"] };
    const toggled = toggleMode(state);
    expect(toggled.mode).toBe("surprise");
    expect({ ...toggled, mode: state.mode }).toEqual(state);
    expect(toggleMode(toggled).mode).toBe("original");
  });

  it("surprise mode requires at least one model", () => {
    const surprise = toggleMode(initialState(META));
    expect(() => setModels(surprise, [])).toThrow(/at least one/);
    expect(setModels(surprise, ["uniform"]).models).toEqual(["uniform"]);
  });

  it("original mode allows clearing models", () => {
    const state = initialState(META);
    expect(setModels(state, []).models).toEqual([]);
  });

  it("normalizes a reversed zoom interval", () => {
    const state = initialState(META);
    const zoomed = setChartZoom(state, ["2020-09-01", "2020-06-01"]);
    expect(zoomed.chartZoom).toEqual(["2020-06-01", "2020-09-01"]);
    expect(setChartZoom(zoomed, null).chartZoom).toBeNull();
  });
});
