import { HttpApi } from "./api.js";
import { DEFAULT_LAYOUT } from "./charts.js";
import { Controller } from "./controller.js";
import { featurePath, fitProjection } from "./geometry.js";
import { GROUPS } from "./state.js";

const MAP_WIDTH = 640;
const MAP_HEIGHT = 420;
const METRICS = ["cases_daily", "deaths_daily"];

const controller = new Controller(new HttpApi());

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function svgEl(tag: string, attrs: Record<string, string> = {}): SVGElement {
  const node = document.createElementNS("http://www.w3.org/2000/svg", tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  return node;
}

function byId(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id}`);
  }
  return node;
}

// ---- filters panel ---------------------------------------------------------

function renderFilters(): void {
  const panel = byId("filters");
  panel.replaceChildren();

  panel.append(el("h3", {}, "metric"));
  const metricSelect = el("select");
  for (const metric of METRICS) {
    const option = el("option", { value: metric }, metric);
    if (metric === controller.state.metric) {
      option.selected = true;
    }
    metricSelect.append(option);
  }
  metricSelect.addEventListener("change", () => {
    void controller.setMetric(metricSelect.value);
  });
  panel.append(metricSelect);

  panel.append(el("h3", {}, "map mode"));
  for (const mode of ["original", "surprise"] as const) {
    const label = el("label", { class: "row" });
    const radio = el("input", { type: "radio", name: "mode" }) as HTMLInputElement;
    radio.checked = controller.state.mode === mode;
    radio.addEventListener("change", () => {
      if (controller.state.mode !== mode) {
        void controller.toggleMode();
      }
    });
    label.append(radio, document.createTextNode(` ${mode}`));
    panel.append(label);
  }

  panel.append(el("h3", {}, "region group"));
  const groupSelect = el("select");
  groupSelect.append(el("option", { value: "" }, "all states"));
  for (const group of GROUPS) {
    const option = el("option", { value: group }, group);
    if (controller.state.group === group) {
      option.selected = true;
    }
    groupSelect.append(option);
  }
  groupSelect.addEventListener("change", () => {
    void controller.setGroup(groupSelect.value || null);
  });
  panel.append(groupSelect);

  panel.append(el("h3", {}, "models (surprise)"));
  for (const model of controller.meta?.models ?? []) {
    const label = el("label", { class: "row" });
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = controller.state.models.includes(model);
    box.addEventListener("change", () => {
      const active = controller.state.models.filter((m) => m !== model);
      if (box.checked) {
        active.push(model);
      }
      if (active.length === 0 && controller.state.mode === "surprise") {
        box.checked = true; // surprise mode needs at least one model
        return;
      }
      void controller.setModels(active);
    });
    label.append(box, document.createTextNode(` ${model}`));
    panel.append(label);
  }

  panel.append(el("h3", {}, "chart states"));
  const states = new Set<string>();
  for (const feature of controller.regions.features) {
    if (feature.properties.state) {
      states.add(feature.properties.state);
    }
  }
  for (const postal of [...states].sort()) {
    const label = el("label", { class: "row" });
    const box = el("input", { type: "checkbox" }) as HTMLInputElement;
    box.checked = controller.state.chartStates.includes(postal);
    box.addEventListener("change", () => {
      const selected = controller.state.chartStates.filter((s) => s !== postal);
      if (box.checked) {
        selected.push(postal);
      }
      void controller.setChartStates(selected);
    });
    label.append(box, document.createTextNode(` ${postal}`));
    panel.append(label);
  }
}

// ---- timeframe selector ----------------------------------------------------

function dayOffset(base: string, date: string): number {
  return Math.round((Date.parse(date) - Date.parse(base)) / 86_400_000);
}

function offsetDay(base: string, offset: number): string {
  return new Date(Date.parse(base) + offset * 86_400_000)
    .toISOString().slice(0, 10);
}

function renderTimeframe(): void {
  const panel = byId("timeframe");
  panel.replaceChildren();
  const bounds = controller.sliderBounds();
  const label = el("div", { id: "range-label" },
                   `${controller.state.from} to ${controller.state.to}`);
  panel.append(label);
  if (!bounds) {
    const disabled = el("input", { type: "range" }) as HTMLInputElement;
    disabled.disabled = true;
    panel.append(disabled, el("span", {}, "no data loaded"));
    return;
  }
  const span = dayOffset(bounds.min, bounds.max);
  const makeSlider = (value: string, onInput: (day: string) => void) => {
    const slider = el("input", {
      type: "range", min: "0", max: String(span),
      value: String(dayOffset(bounds.min, value)),
    }) as HTMLInputElement;
    slider.addEventListener("change", () => {
      onInput(offsetDay(bounds.min, Number(slider.value)));
    });
    return slider;
  };
  panel.append(makeSlider(controller.state.from, (day) => {
    if (day <= controller.state.to) {
      void controller.setRange(day, controller.state.to);
    }
  }));
  panel.append(makeSlider(controller.state.to, (day) => {
    if (day >= controller.state.from) {
      void controller.setRange(controller.state.from, day);
    }
  }));
}

// ---- choropleth ------------------------------------------------------------

let mapScale = 1;

function renderMap(): void {
  const host = byId("map");
  host.replaceChildren();
  if (controller.mapError) {
    host.append(el("div", { class: "banner error" }, controller.mapError));
  }
  const features = controller.regions.features;
  const projection = fitProjection(features, MAP_WIDTH, MAP_HEIGHT);
  const model = controller.mapRenderModel();
  const svg = svgEl("svg", {
    viewBox: `0 0 ${MAP_WIDTH} ${MAP_HEIGHT}`,
    width: String(MAP_WIDTH), height: String(MAP_HEIGHT),
  });
  const layer = svgEl("g", { transform: `scale(${mapScale})` });
  for (const feature of features) {
    const fips = feature.properties.fips;
    const path = svgEl("path", {
      d: featurePath(feature, projection),
      fill: model.fills[fips] ?? "#d9d9d9",
      stroke: "#555", "stroke-width": "0.5", "data-fips": fips,
    });
    path.addEventListener("mousemove", (event) => showTooltip(event, fips));
    path.addEventListener("mouseleave", hideTooltip);
    layer.append(path);
  }
  svg.append(layer);
  svg.addEventListener("wheel", (event) => {
    event.preventDefault();
    mapScale = Math.min(8, Math.max(0.5, mapScale * (event.deltaY < 0 ? 1.15 : 0.87)));
    layer.setAttribute("transform", `scale(${mapScale})`);
  }, { passive: false });
  host.append(svg);

  const legend = el("div", { class: "legend" });
  legend.append(el("span", { class: "legend-title" }, model.legend.title));
  for (const stop of model.legend.stops) {
    const chip = el("span", { class: "legend-stop" });
    const swatch = el("span", { class: "swatch" });
    swatch.style.background = stop.color;
    chip.append(swatch, document.createTextNode(stop.label));
    legend.append(chip);
  }
  host.append(legend);
}

function showTooltip(event: MouseEvent, fips: string): void {
  const tip = byId("tooltip");
  const model = controller.tooltipFor(fips);
  tip.replaceChildren(el("strong", {}, model.heading));
  if (model.noData) {
    tip.append(el("div", {}, "no data"));
  } else {
    for (const field of model.fields) {
      tip.append(el("div", {}, `${field.label}: ${field.value}`));
    }
  }
  tip.style.display = "block";
  tip.style.left = `${event.pageX + 12}px`;
  tip.style.top = `${event.pageY + 12}px`;
}

function hideTooltip(): void {
  byId("tooltip").style.display = "none";
}

// ---- line charts -----------------------------------------------------------

let dragStartX: number | null = null;

function renderCharts(): void {
  const host = byId("charts");
  host.replaceChildren();
  if (controller.chartError) {
    host.append(el("div", { class: "banner error" },
                   `chart fetch failed: ${controller.chartError}`));
  }
  const layout = DEFAULT_LAYOUT;
  for (const model of controller.chartModels()) {
    const block = el("div", { class: "chart" });
    block.append(el("h4", {}, model.title));
    if (model.emptyMessage) {
      block.append(el("div", { class: "empty" }, model.emptyMessage));
      host.append(block);
      continue;
    }
    const svg = svgEl("svg", {
      viewBox: `0 0 ${layout.width} ${layout.height}`,
      width: String(layout.width), height: String(layout.height),
    });
    for (const tick of model.yTicks) {
      svg.append(svgEl("line", {
        x1: String(layout.marginLeft), x2: String(layout.width - layout.marginRight),
        y1: String(tick.y), y2: String(tick.y), stroke: "#eee",
      }));
      const text = svgEl("text", { x: "2", y: String(tick.y + 4), class: "tick" });
      text.textContent = tick.label;
      svg.append(text);
    }
    for (const tick of model.xTicks) {
      const text = svgEl("text", {
        x: String(tick.x), y: String(layout.height - 6),
        class: "tick", "text-anchor": "middle",
      });
      text.textContent = tick.label;
      svg.append(text);
    }
    for (const series of model.series) {
      svg.append(svgEl("polyline", {
        points: series.polyline, fill: "none",
        stroke: series.color, "stroke-width": "1.5",
      }));
    }
    // drag to crop the x-range of every chart
    svg.addEventListener("mousedown", (event) => {
      dragStartX = event.offsetX;
    });
    svg.addEventListener("mouseup", (event) => {
      if (dragStartX === null || !model.xDomain) {
        return;
      }
      const [d0, d1] = model.xDomain;
      const plotWidth = layout.width - layout.marginLeft - layout.marginRight;
      const toDate = (px: number) => {
        const t = Math.min(1, Math.max(0, (px - layout.marginLeft) / plotWidth));
        return new Date(Date.parse(d0) + t * (Date.parse(d1) - Date.parse(d0)))
          .toISOString().slice(0, 10);
      };
      const a = toDate(dragStartX);
      const b = toDate(event.offsetX);
      dragStartX = null;
      if (a !== b) {
        controller.setChartZoom([a, b]);
      }
    });
    const legend = el("div", { class: "chart-legend" });
    for (const series of model.series) {
      const chip = el("span", { class: "legend-stop" });
      const swatch = el("span", { class: "swatch" });
      swatch.style.background = series.color;
      chip.append(swatch, document.createTextNode(series.label));
      legend.append(chip);
    }
    block.append(svg, legend);
    host.append(block);
  }
  const reset = el("button", {}, "reset zoom");
  reset.addEventListener("click", () => controller.setChartZoom(null));
  host.append(reset);
}

// ---- boot ------------------------------------------------------------------

function renderAll(): void {
  renderFilters();
  renderTimeframe();
  renderMap();
  renderCharts();
}

controller.notify = renderAll;

void controller.init().catch((err) => {
  byId("map").textContent = `failed to load: ${err}`;
});
