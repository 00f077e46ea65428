/** Form state: per-item sliders plus demographic selectors.
 *
 * Sliders hold null until the clinician sets them; the request payload is
 * only buildable once every required field is set, which is what gates the
 * submit/auto-query path. Totals are plain sums of the four 0-10 items.
 */

import type { PredictionRequest } from "./api.js";

export type SliderItems = [number | null, number | null, number | null, number | null];

export interface FormState {
  baselineOrs: SliderItems;
  baselineSrs: SliderItems;
  thirdOrs: SliderItems;
  gender: string | null;
  diagCat: string | null;
  age: number | null;
  payorGrp: string | null;
  county: string | null;
  regionType: string | null;
  state: string | null;
  isNew: boolean;
  services: {
    caseMgmt: boolean;
    medical: boolean;
    therapy: boolean;
    indTherapy: boolean;
    grpTherapy: boolean;
  };
  model: string;
}

export function emptyForm(): FormState {
  return {
    baselineOrs: [null, null, null, null],
    baselineSrs: [null, null, null, null],
    thirdOrs: [null, null, null, null],
    gender: null,
    diagCat: null,
    age: null,
    payorGrp: null,
    county: null,
    regionType: null,
    state: null,
    isNew: true,
    services: { caseMgmt: false, medical: false, therapy: true, indTherapy: false, grpTherapy: false },
    model: "ensemble",
  };
}

export function setSlider(items: SliderItems, index: number, value: number): SliderItems {
  if (index < 0 || index > 3) throw new Error(`slider index ${index} out of range`);
  if (value < 0 || value > 10) throw new Error(`slider value ${value} outside 0-10`);
  const next = [...items] as SliderItems;
  next[index] = value;
  return next;
}

/** Sum of the four items, or null while any item is unset. */
export function scaleTotal(items: SliderItems): number | null {
  let total = 0;
  for (const item of items) {
    if (item === null) return null;
    total += item;
  }
  return total;
}

export function missingFields(form: FormState): string[] {
  const missing: string[] = [];
  if (scaleTotal(form.baselineOrs) === null) missing.push("baseline ORS items");
  if (scaleTotal(form.baselineSrs) === null) missing.push("baseline SRS items");
  if (scaleTotal(form.thirdOrs) === null) missing.push("third-visit ORS items");
  if (form.gender === null) missing.push("gender");
  if (form.diagCat === null) missing.push("diagnostic category");
  if (form.age === null) missing.push("age");
  if (form.payorGrp === null) missing.push("payor group");
  if (form.county === null) missing.push("county");
  if (form.regionType === null) missing.push("region type");
  if (form.state === null) missing.push("state");
  return missing;
}

export function isComplete(form: FormState): boolean {
  return missingFields(form).length === 0;
}

/** Map the completed form to the service payload. Deltas derive from the
 * displayed totals; there is no third-visit SRS entry, so that delta is 0. */
export function buildRequest(form: FormState): PredictionRequest {
  const missing = missingFields(form);
  if (missing.length > 0) {
    throw new Error(`form incomplete: ${missing.join(", ")}`);
  }
  const blOrs = scaleTotal(form.baselineOrs) as number;
  const blSrs = scaleTotal(form.baselineSrs) as number;
  const thirdOrs = scaleTotal(form.thirdOrs) as number;
  return {
    bl_ors: blOrs,
    bl_srs: blSrs,
    third_delta_ors: thirdOrs - blOrs,
    third_delta_srs: 0,
    gender: form.gender as string,
    diag_cat: form.diagCat as string,
    age: form.age as number,
    payor_grp: form.payorGrp as string,
    county: form.county as string,
    region_type: form.regionType as string,
    q_case_mgmt_bin: form.services.caseMgmt ? 1 : 0,
    q_medical_bin: form.services.medical ? 1 : 0,
    q_therapy_bin: form.services.therapy ? 1 : 0,
    q_ind_therapy_bin: form.services.indTherapy ? 1 : 0,
    q_grp_therapy_bin: form.services.grpTherapy ? 1 : 0,
    state: form.state as string,
    is_new: form.isNew ? 1 : 0,
    model: form.model,
  };
}
