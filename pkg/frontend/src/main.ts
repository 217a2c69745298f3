/**
 * Wiring: fetch model summaries, build the slider panel, run what-if
 * experiments, and draw the price/quantity charts with the served analytic
 * equilibrium overlaid. All arithmetic on model values happens server-side;
 * this file only moves payload numbers onto the screen.
 */

import { ApiClient, ModelSummary, ServiceError } from "./api.js";
import { buildChart, ChartModel } from "./chart.js";
import { sliderSpecs } from "./controls.js";
import { loopBadges } from "./loops.js";
import {
  beginRun,
  clearRuns,
  ExperimentState,
  failRun,
  finishRun,
  initialState,
  overridesFrom,
  resetSliders,
  runLabel,
  selectModel,
  setSlider,
  toggleVisible,
} from "./state.js";

declare global {
  interface Window {
    STOCKFLOW_API?: string;
  }
}

const api = new ApiClient(window.STOCKFLOW_API ?? "http://127.0.0.1:8000");

let state: ExperimentState = initialState();
let summaries: ModelSummary[] = [];
let faultTimes: number[] = [];

const $ = (id: string) => document.getElementById(id) as HTMLElement;

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function currentSummary(): ModelSummary | undefined {
  return summaries.find((s) => s.id === state.modelId);
}

function showBanner(message: string): void {
  const banner = $("banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
}

// --- controls ---------------------------------------------------------------

function renderControls(): void {
  const summary = currentSummary();
  const panel = $("sliders");
  panel.replaceChildren();
  if (!summary) return;
  for (const spec of sliderSpecs(summary)) {
    const row = el("div", "slider-row");
    const label = el("label", "slider-label", spec.name.replace(/_/g, " "));
    label.htmlFor = `slider-${spec.name}`;
    const input = el("input");
    input.type = "range";
    input.id = `slider-${spec.name}`;
    input.min = String(spec.min);
    input.max = String(spec.max);
    input.step = String(spec.step);
    input.value = String(state.sliders[spec.name]);
    const value = el("span", "slider-value", String(state.sliders[spec.name]));
    input.addEventListener("input", () => {
      state = setSlider(state, summary, spec.name, Number(input.value));
      value.textContent = String(state.sliders[spec.name]);
    });
    const error = el("span", "field-error hidden");
    error.id = `error-${spec.name}`;
    row.append(label, input, value, error);
    panel.append(row);
  }
  syncRunButton();
}

function clearFieldErrors(): void {
  document.querySelectorAll(".field-error").forEach((node) => {
    node.classList.add("hidden");
    node.textContent = "";
  });
  $("run-error").classList.add("hidden");
}

function showFieldErrors(error: ServiceError): void {
  const unplaced: string[] = [];
  for (const field of error.fields) {
    const slider = currentSummary()?.constants.find((c) =>
      field.message.includes(c.name),
    );
    const target = slider && document.getElementById(`error-${slider.name}`);
    if (target) {
      target.textContent = field.message;
      target.classList.remove("hidden");
    } else {
      unplaced.push(`${field.field}: ${field.message}`);
    }
  }
  if (unplaced.length) {
    const general = $("run-error");
    general.textContent = unplaced.join("; ");
    general.classList.remove("hidden");
  }
}

function syncRunButton(): void {
  const run = $("run") as HTMLButtonElement;
  run.disabled = state.pending || !currentSummary();
  run.textContent = state.pending ? "Running…" : "Run";
}

// --- charts -----------------------------------------------------------------

const SVG_NS = "http://www.w3.org/2000/svg";

function svgNode(tag: string, attrs: Record<string, string | number>): SVGElement {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, String(value));
  }
  return node;
}

function drawChart(containerId: string, model: ChartModel, title: string): void {
  const container = $(containerId);
  container.replaceChildren(el("h3", "chart-title", title));
  const svg = svgNode("svg", {
    viewBox: `0 0 ${model.width} ${model.height}`,
    width: "100%",
  }) as SVGSVGElement;

  for (const tick of model.yTicks) {
    svg.append(svgNode("line", {
      x1: 40, x2: model.width - 8, y1: tick.y, y2: tick.y, class: "grid",
    }));
    const label = svgNode("text", { x: 36, y: tick.y + 3, class: "tick" });
    label.textContent = String(tick.value);
    svg.append(label);
  }
  for (const tick of model.xTicks) {
    const label = svgNode("text", {
      x: tick.x, y: model.height - 4, class: "tick tick-x",
    });
    label.textContent = String(tick.value);
    svg.append(label);
  }
  for (const overlay of model.overlays) {
    svg.append(svgNode("line", {
      x1: 40, x2: model.width - 8, y1: overlay.y, y2: overlay.y, class: "overlay",
    }));
    const label = svgNode("text", {
      x: model.width - 10, y: overlay.y - 3, class: "overlay-label",
    });
    label.textContent = `${overlay.label} = ${overlay.value}`;
    svg.append(label);
  }
  for (const fault of model.faults) {
    svg.append(svgNode("line", {
      x1: fault.x, x2: fault.x, y1: 6, y2: model.height - 18, class: "fault",
    }));
    const label = svgNode("text", { x: fault.x + 3, y: 14, class: "fault-label" });
    label.textContent = `fault @ t=${fault.time}`;
    svg.append(label);
  }
  for (const curve of model.curves) {
    svg.append(svgNode("path", {
      d: curve.path, fill: "none", stroke: curve.color, "stroke-width": 1.6,
    }));
  }
  container.append(svg);
}

function isPriceLike(name: string): boolean {
  return name.toLowerCase().includes("price");
}

function renderCharts(): void {
  const summary = currentSummary();
  if (!summary) return;
  const visible = summary.elements.filter((name) => state.visible[name]);
  const priceElements = visible.filter(isPriceLike);
  const quantityElements = visible.filter((name) => !isPriceLike(name));

  const priceOverlays: { label: string; value: number }[] = [];
  const quantityOverlays: { label: string; value: number }[] = [];
  for (const run of state.runs) {
    const analytic = run.payload.analytic_equilibrium;
    if (!analytic) continue;
    if (!priceOverlays.some((o) => o.value === analytic.price)) {
      priceOverlays.push({ label: "P₂", value: analytic.price });
    }
    if (!quantityOverlays.some((o) => o.value === analytic.quantity)) {
      quantityOverlays.push({ label: "Q₂", value: analytic.quantity });
    }
  }

  drawChart("price-chart", buildChart({
    runs: state.runs, elements: priceElements, overlays: priceOverlays,
    faultTimes, width: 640, height: 240,
  }), "Price");
  drawChart("quantity-chart", buildChart({
    runs: state.runs, elements: quantityElements, overlays: quantityOverlays,
    faultTimes, width: 640, height: 240,
  }), "Quantities");
  renderLegend();
}

function renderLegend(): void {
  const legend = $("legend");
  legend.replaceChildren();
  state.runs.forEach((run, index) => {
    legend.append(el("span", "legend-run", `run ${index + 1}: ${run.label}`));
  });
  if (!state.runs.length) {
    legend.append(el("span", "legend-empty", "no runs yet — press Run"));
  }
}

function renderToggles(): void {
  const summary = currentSummary();
  const box = $("toggles");
  box.replaceChildren();
  if (!summary) return;
  for (const name of summary.elements) {
    if (!(name in state.visible)) continue;
    const label = el("label", "toggle");
    const input = el("input");
    input.type = "checkbox";
    input.checked = state.visible[name];
    input.addEventListener("change", () => {
      state = toggleVisible(state, name);
      renderCharts();
    });
    label.append(input, document.createTextNode(" " + name.replace(/_/g, " ")));
    box.append(label);
  }
}

// --- loops panel ------------------------------------------------------------

async function renderLoops(): Promise<void> {
  const panel = $("loops-panel");
  const summary = currentSummary();
  if (!summary) return;
  try {
    const payload = await api.loops(summary.id);
    panel.classList.remove("hidden");
    panel.replaceChildren(el("h3", undefined, "Feedback loops"));
    const badges = loopBadges(payload);
    if (!badges.length) {
      panel.append(el("p", "loops-empty", "no feedback loops"));
      return;
    }
    for (const loop of badges) {
      const row = el("div", "loop-row");
      row.append(
        el("span", `badge badge-${loop.badge === "?" ? "q" : loop.badge}`, loop.badge),
        el("span", "loop-members", loop.members),
        el("span", "loop-delay", loop.delayed ? "delayed" : ""),
      );
      panel.append(row);
    }
  } catch {
    panel.classList.add("hidden");
    showBanner("loop analysis unavailable");
  }
}

// --- run flow ---------------------------------------------------------------

async function runExperiment(): Promise<void> {
  const summary = currentSummary();
  if (!summary) return;
  const next = beginRun(state);
  if (next === null) return; // a run is already in flight
  state = next;
  syncRunButton();
  clearFieldErrors();
  try {
    const overrides = overridesFrom(summary, state.sliders);
    const payload = await api.run(summary.id, { overrides });
    state = finishRun(state, {
      label: runLabel(summary, state.sliders),
      params: { ...state.sliders },
      payload,
    });
    faultTimes = [];
  } catch (error) {
    state = failRun(state);
    if (error instanceof ServiceError && error.faultTime !== null) {
      faultTimes = [...faultTimes, error.faultTime];
    } else if (error instanceof ServiceError) {
      showFieldErrors(error);
    } else {
      showBanner("service unreachable");
    }
  }
  syncRunButton();
  renderCharts();
}

// --- bootstrap ----------------------------------------------------------------

async function selectModelById(id: string): Promise<void> {
  const summary = summaries.find((s) => s.id === id);
  if (!summary) return;
  state = selectModel(state, summary);
  faultTimes = [];
  renderControls();
  renderToggles();
  renderCharts();
  await renderLoops();
}

async function bootstrap(): Promise<void> {
  $("run").addEventListener("click", () => void runExperiment());
  $("reset").addEventListener("click", () => {
    const summary = currentSummary();
    if (!summary) return;
    state = resetSliders(state, summary);
    renderControls();
  });
  $("clear").addEventListener("click", () => {
    state = clearRuns(state);
    faultTimes = [];
    renderCharts();
  });

  try {
    const payload = await api.listModels();
    summaries = payload.models;
  } catch {
    showBanner("service unreachable — start it with: stockflow serve");
    ($("run") as HTMLButtonElement).disabled = true;
    return;
  }
  const select = $("model-select") as HTMLSelectElement;
  if (!summaries.length) {
    $("charts").replaceChildren(el("p", "empty-state", "no models served"));
    return;
  }
  for (const summary of summaries) {
    const option = el("option", undefined, summary.name);
    option.value = summary.id;
    select.append(option);
  }
  select.addEventListener("change", () => void selectModelById(select.value));
  await selectModelById(summaries[0].id);
}

void bootstrap();
