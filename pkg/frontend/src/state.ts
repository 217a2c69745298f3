/**
 * Experiment state: which model is selected, slider values, retained runs,
 * and per-element visibility. All transitions are pure so they can be
 * tested without a DOM; main.ts owns the single mutable reference.
 */

import type { ModelSummary, RunPayload } from "./api.js";

export interface RetainedRun {
  label: string;
  params: Record<string, number>;
  payload: RunPayload;
}

export interface ExperimentState {
  modelId: string | null;
  sliders: Record<string, number>;
  runs: RetainedRun[];
  visible: Record<string, boolean>;
  pending: boolean;
}

export function initialState(): ExperimentState {
  return { modelId: null, sliders: {}, runs: [], visible: {}, pending: false };
}

const DEFAULT_VISIBLE = new Set([
  "Price",
  "Quantity_Supplied",
  "Quantity_Demanded",
]);

export function selectModel(state: ExperimentState, summary: ModelSummary): ExperimentState {
  const sliders: Record<string, number> = {};
  for (const c of summary.constants) sliders[c.name] = c.default;
  const visible: Record<string, boolean> = {};
  for (const name of summary.elements) {
    visible[name] = DEFAULT_VISIBLE.has(name) || summary.elements.length <= 3;
  }
  return { modelId: summary.id, sliders, runs: [], visible, pending: false };
}

function clamp(value: number, min: number, max: number): number {
  return Math.min(max, Math.max(min, value));
}

/** Slider values never leave the served [min, max]. */
export function setSlider(
  state: ExperimentState,
  summary: ModelSummary,
  name: string,
  value: number,
): ExperimentState {
  const constant = summary.constants.find((c) => c.name === name);
  if (!constant) return state;
  return {
    ...state,
    sliders: { ...state.sliders, [name]: clamp(value, constant.min, constant.max) },
  };
}

export function resetSliders(state: ExperimentState, summary: ModelSummary): ExperimentState {
  const sliders: Record<string, number> = {};
  for (const c of summary.constants) sliders[c.name] = c.default;
  return { ...state, sliders };
}

/** At most one in-flight run; returns null if one is already pending. */
export function beginRun(state: ExperimentState): ExperimentState | null {
  if (state.pending) return null;
  return { ...state, pending: true };
}

/** Retained runs are append-only within a session until cleared. */
export function finishRun(state: ExperimentState, run: RetainedRun): ExperimentState {
  return { ...state, pending: false, runs: [...state.runs, run] };
}

export function failRun(state: ExperimentState): ExperimentState {
  return { ...state, pending: false };
}

export function clearRuns(state: ExperimentState): ExperimentState {
  return { ...state, runs: [] };
}

export function toggleVisible(state: ExperimentState, element: string): ExperimentState {
  return {
    ...state,
    visible: { ...state.visible, [element]: !state.visible[element] },
  };
}

/** Short label naming only the sliders that differ from their defaults. */
export function runLabel(summary: ModelSummary, sliders: Record<string, number>): string {
  const parts: string[] = [];
  for (const c of summary.constants) {
    if (sliders[c.name] !== c.default) parts.push(`${c.name}=${sliders[c.name]}`);
  }
  return parts.length ? parts.join(", ") : "defaults";
}

/** Overrides sent to the service: only values that differ from defaults. */
export function overridesFrom(
  summary: ModelSummary,
  sliders: Record<string, number>,
): Record<string, number> {
  const overrides: Record<string, number> = {};
  for (const c of summary.constants) {
    if (sliders[c.name] !== c.default) overrides[c.name] = sliders[c.name];
  }
  return overrides;
}
