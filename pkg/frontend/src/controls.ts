/** Slider specifications derived from a served model summary. */

import type { ModelSummary } from "./api.js";

export interface SliderSpec {
  name: string;
  min: number;
  max: number;
  default: number;
  step: number;
}

/** One slider per exposed constant, stepping in 1/100ths of its range. */
export function sliderSpecs(summary: ModelSummary): SliderSpec[] {
  return summary.constants.map((constant) => {
    const span = constant.max - constant.min;
    return {
      name: constant.name,
      min: constant.min,
      max: constant.max,
      default: constant.default,
      step: span > 0 ? Number((span / 100).toPrecision(6)) : 1,
    };
  });
}
