import { describe, expect, it } from "vitest";

import { buildRequest, emptyForm, isComplete, missingFields, scaleTotal, setSlider } from "../src/form.js";
import type { FormState } from "../src/form.js";

export function completedForm(): FormState {
  const form = emptyForm();
  form.baselineOrs = [5, 5, 5, 5];
  form.baselineSrs = [8, 8, 8, 8];
  form.thirdOrs = [6, 6, 6, 6];
  form.gender = "female";
  form.diagCat = "mood";
  form.age = 34;
  form.payorGrp = "commercial";
  form.county = "davidson";
  form.regionType = "urban";
  form.state = "TN";
  return form;
}

describe("scale totals", () => {
  it("sums the four items", () => {
    expect(scaleTotal([5, 5, 5, 5])).toBe(20);
    expect(scaleTotal([0, 10, 2.5, 7.5])).toBe(20);
  });

  it("is null while any item is unset", () => {
    expect(scaleTotal([5, 5, 5, null])).toBeNull();
  });

  it("rejects out-of-range slider values", () => {
    expect(() => setSlider([null, null, null, null], 0, 11)).toThrow(/0-10/);
    expect(() => setSlider([null, null, null, null], 4, 5)).toThrow(/range/);
  });
});

describe("completeness gate", () => {
  it("empty form is incomplete and names what is missing", () => {
    const form = emptyForm();
    expect(isComplete(form)).toBe(false);
    expect(missingFields(form)).toContain("baseline ORS items");
    expect(missingFields(form)).toContain("gender");
  });

  it("completed form is submittable", () => {
    expect(isComplete(completedForm())).toBe(true);
  });

  it("buildRequest refuses an incomplete form", () => {
    expect(() => buildRequest(emptyForm())).toThrow(/incomplete/);
  });
});

describe("request payload mapping", () => {
  it("baseline items (5,5,5,5) produce bl_ors=20", () => {
    const payload = buildRequest(completedForm());
    expect(payload.bl_ors).toBe(20);
  });

  it("deltas derive from displayed totals and every field maps across", () => {
    const form = completedForm();
    const payload = buildRequest(form);
    expect(payload).toEqual({
      bl_ors: 20,
      bl_srs: 32,
      third_delta_ors: 4,
      third_delta_srs: 0,
      gender: "female",
      diag_cat: "mood",
      age: 34,
      payor_grp: "commercial",
      county: "davidson",
      region_type: "urban",
      q_case_mgmt_bin: 0,
      q_medical_bin: 0,
      q_therapy_bin: 1,
      q_ind_therapy_bin: 0,
      q_grp_therapy_bin: 0,
      state: "TN",
      is_new: 1,
      model: "ensemble",
    });
  });

  it("service flag toggles map to 0/1 fields", () => {
    const form = completedForm();
    form.services.grpTherapy = true;
    form.isNew = false;
    const payload = buildRequest(form);
    expect(payload.q_grp_therapy_bin).toBe(1);
    expect(payload.is_new).toBe(0);
  });
});
