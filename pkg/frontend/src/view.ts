/** View model: everything the DOM layer renders is derived here, so the
 * rendering contract is testable without a browser. The console performs no
 * local inference; every displayed number traces to a service response. */

import type { PredictionResponse } from "./api.js";

export const CLINICAL_CUTOFF = 25;

export interface GaugeView {
  model: string;
  probabilityText: string;   // e.g. "73%"
  gaugeFraction: number;     // 0..1 for the bar width
  bandText: string;          // reliable-change band summary
  cutoffText: string;        // clinical cutoff marker label
  fingerprintText: string;
}

export function formatProbability(probability: number): string {
  if (!(probability >= 0 && probability <= 1)) {
    throw new Error(`probability ${probability} outside [0, 1]`);
  }
  return `${Math.round(probability * 100)}%`;
}

export function gaugeView(response: PredictionResponse): GaugeView {
  const band = response.reliable_change_band;
  return {
    model: response.model,
    probabilityText: formatProbability(response.probability_above_mean_improvement),
    gaugeFraction: response.probability_above_mean_improvement,
    bandText:
      `cohort mean delta ${band.mean_delta.toFixed(1)} ` +
      `(reliable improvement above +${band.improve_above.toFixed(0)}, ` +
      `deterioration below ${band.deteriorate_below.toFixed(0)})`,
    cutoffText: `clinical cutoff ${CLINICAL_CUTOFF}`,
    fingerprintText: `model ${response.model_fingerprint} / pipeline ${response.pipeline_fingerprint}`,
  };
}

export type ConsoleStatus = "incomplete" | "waiting" | "ready" | "error";

export interface ConsoleState {
  status: ConsoleStatus;
  blOrsTotal: number | null;
  blSrsTotal: number | null;
  thirdOrsTotal: number | null;
  gauge: GaugeView | null;   // never stale: cleared on error
  errorText: string | null;
  missing: string[];
}
