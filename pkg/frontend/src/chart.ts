/**
 * Chart geometry as pure data. A chart model carries the raw payload values
 * untouched (series arrays are the payload's own numbers) plus the pixel
 * mapping used to draw them, so tests can verify that what is plotted is
 * exactly what the service returned.
 */

import type { RetainedRun } from "./state.js";

export interface LinearScale {
  domainMin: number;
  domainMax: number;
  rangeMin: number;
  rangeMax: number;
}

export function scaleOf(domainMin: number, domainMax: number, rangeMin: number, rangeMax: number): LinearScale {
  if (domainMax === domainMin) {
    // degenerate domain: pad so a flat series draws mid-range
    domainMin -= 1;
    domainMax += 1;
  }
  return { domainMin, domainMax, rangeMin, rangeMax };
}

export function project(scale: LinearScale, value: number): number {
  const t = (value - scale.domainMin) / (scale.domainMax - scale.domainMin);
  return scale.rangeMin + t * (scale.rangeMax - scale.rangeMin);
}

export interface ChartCurve {
  runLabel: string;
  element: string;
  color: string;
  times: number[]; // payload arrays, by reference
  values: number[];
  path: string; // SVG path in pixel space
}

export interface OverlayLine {
  label: string;
  value: number;
  y: number; // pixel position
}

export interface FaultMark {
  time: number;
  x: number;
}

export interface ChartModel {
  width: number;
  height: number;
  curves: ChartCurve[];
  overlays: OverlayLine[];
  faults: FaultMark[];
  xScale: LinearScale;
  yScale: LinearScale;
  yTicks: { value: number; y: number }[];
  xTicks: { value: number; x: number }[];
}

const COLORS = ["#4d9de0", "#e15554", "#3bb273", "#e1bc29", "#7768ae", "#ce7b91"];

export function colorFor(index: number): string {
  return COLORS[index % COLORS.length];
}

export function pathFor(times: number[], values: number[], x: LinearScale, y: LinearScale): string {
  const pieces: string[] = [];
  for (let i = 0; i < times.length; i++) {
    const px = project(x, times[i]).toFixed(2);
    const py = project(y, values[i]).toFixed(2);
    pieces.push(`${i === 0 ? "M" : "L"}${px},${py}`);
  }
  return pieces.join(" ");
}

function niceTicks(min: number, max: number, count: number): number[] {
  if (max === min) return [min];
  const rawStep = (max - min) / count;
  const power = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 5, 10].map((m) => m * power).find((s) => s >= rawStep) ?? rawStep;
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + 1e-12; v += step) {
    ticks.push(Number(v.toPrecision(12)));
  }
  return ticks;
}

export interface ChartRequest {
  runs: RetainedRun[];
  elements: string[]; // which series to draw, in color order
  overlays: { label: string; value: number }[];
  faultTimes: number[]; // from 422 responses; marked as vertical lines
  width: number;
  height: number;
}

/**
 * Build the drawable model for one chart panel: every visible element of
 * every retained run becomes a curve; overlay lines mark served analytic
 * values; faulted runs get a mark at the fault time.
 */
export function buildChart(request: ChartRequest): ChartModel {
  const { runs, elements, overlays, faultTimes, width, height } = request;
  let tMin = Infinity;
  let tMax = -Infinity;
  let vMin = Infinity;
  let vMax = -Infinity;

  for (const run of runs) {
    const times = run.payload.times;
    if (times.length) {
      tMin = Math.min(tMin, times[0]);
      tMax = Math.max(tMax, times[times.length - 1]);
    }
    for (const element of elements) {
      const series = run.payload.series[element];
      if (!series) continue;
      for (const v of series) {
        vMin = Math.min(vMin, v);
        vMax = Math.max(vMax, v);
      }
    }
  }
  for (const overlay of overlays) {
    vMin = Math.min(vMin, overlay.value);
    vMax = Math.max(vMax, overlay.value);
  }
  for (const time of faultTimes) {
    tMin = Math.min(tMin, time);
    tMax = Math.max(tMax, time);
  }
  if (!isFinite(tMin)) {
    tMin = 0;
    tMax = 1;
  }
  if (!isFinite(vMin)) {
    vMin = 0;
    vMax = 1;
  }
  const pad = (vMax - vMin) * 0.05 || 1;
  const xScale = scaleOf(tMin, tMax, 40, width - 8);
  const yScale = scaleOf(vMin - pad, vMax + pad, height - 18, 6); // y grows downward

  const curves: ChartCurve[] = [];
  runs.forEach((run, runIndex) => {
    elements.forEach((element, elementIndex) => {
      const values = run.payload.series[element];
      if (!values) return;
      curves.push({
        runLabel: run.label,
        element,
        color: colorFor(runIndex * elements.length + elementIndex),
        times: run.payload.times,
        values,
        path: pathFor(run.payload.times, values, xScale, yScale),
      });
    });
  });

  const overlayLines: OverlayLine[] = overlays.map((overlay) => ({
    label: overlay.label,
    value: overlay.value,
    y: project(yScale, overlay.value),
  }));

  const faults: FaultMark[] = faultTimes.map((time) => ({
    time,
    x: project(xScale, time),
  }));

  return {
    width,
    height,
    curves,
    overlays: overlayLines,
    faults,
    xScale,
    yScale,
    yTicks: niceTicks(yScale.domainMin, yScale.domainMax, 5).map((value) => ({
      value,
      y: project(yScale, value),
    })),
    xTicks: niceTicks(xScale.domainMin, xScale.domainMax, 6).map((value) => ({
      value,
      x: project(xScale, value),
    })),
  };
}
