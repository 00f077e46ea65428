/** Thin DOM binding: builds the form controls, forwards edits to the
 * controller, and paints the controller's view state. */

import { fetchModels, fetchTransport } from "./api.js";
import { ConsoleController } from "./controller.js";
import type { ConsoleState } from "./view.js";

const CATEGORICALS: Record<string, string[]> = {
  gender: ["female", "male"],
  diagCat: ["mood", "anxiety", "substance_abuse", "psychotic", "other"],
  payorGrp: ["medicaid", "medicare", "commercial", "safety_net", "other"],
  county: ["davidson", "rutherford", "williamson", "maury", "monroe", "marion", "lake", "porter"],
  regionType: ["urban", "rural"],
  state: ["TN", "IN"],
};

const SERVICE_FLAGS: Array<[string, string]> = [
  ["caseMgmt", "Case management"],
  ["medical", "Medical"],
  ["therapy", "Therapy"],
  ["indTherapy", "Individual therapy"],
  ["grpTherapy", "Group therapy"],
];

function sliderBlock(root: HTMLElement, title: string, prefix: string, onInput: (index: number, value: number) => void): void {
  const section = document.createElement("fieldset");
  const legend = document.createElement("legend");
  legend.textContent = title;
  section.appendChild(legend);
  for (let i = 0; i < 4; i += 1) {
    const label = document.createElement("label");
    label.textContent = `Item ${i + 1}`;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "10";
    slider.step = "0.1";
    slider.value = "5";
    slider.id = `${prefix}-${i}`;
    // sliders count as "set" only once touched
    slider.addEventListener("input", () => onInput(i, Number(slider.value)));
    label.appendChild(slider);
    section.appendChild(label);
  }
  root.appendChild(section);
}

export function mountConsole(root: HTMLElement, baseUrl: string): ConsoleController {
  const form = document.createElement("form");
  form.id = "session-form";
  const results = document.createElement("section");
  results.id = "results";
  const totals = document.createElement("p");
  totals.id = "totals";
  const banner = document.createElement("p");
  banner.id = "error-banner";
  banner.hidden = true;
  root.append(form, totals, banner, results);

  const render = (state: ConsoleState): void => {
    totals.textContent =
      `baseline ORS ${state.blOrsTotal ?? "-"} / 40, ` +
      `baseline SRS ${state.blSrsTotal ?? "-"} / 40, ` +
      `third-visit ORS ${state.thirdOrsTotal ?? "-"} / 40`;
    banner.hidden = state.status !== "error";
    banner.textContent = state.errorText ?? "";
    results.replaceChildren();
    if (state.status === "incomplete" && state.missing.length > 0) {
      const hint = document.createElement("p");
      hint.id = "missing-hint";
      hint.textContent = `set: ${state.missing.join(", ")}`;
      results.appendChild(hint);
    }
    if (state.gauge) {
      const card = document.createElement("div");
      card.className = "gauge";
      const title = document.createElement("h3");
      title.textContent = state.gauge.model;
      const probability = document.createElement("strong");
      probability.id = "probability";
      probability.textContent = state.gauge.probabilityText;
      const bar = document.createElement("div");
      bar.className = "gauge-bar";
      bar.style.width = `${state.gauge.gaugeFraction * 100}%`;
      const band = document.createElement("p");
      band.textContent = state.gauge.bandText;
      const cutoff = document.createElement("p");
      cutoff.textContent = state.gauge.cutoffText;
      const fingerprints = document.createElement("small");
      fingerprints.textContent = state.gauge.fingerprintText;
      card.append(title, probability, bar, band, cutoff, fingerprints);
      results.appendChild(card);
    }
  };

  const controller = new ConsoleController(`${baseUrl}/predict`, fetchTransport(), render);

  sliderBlock(form, "Baseline ORS (0-10 per item)", "bl-ors", (i, v) => controller.setBaselineOrs(i, v));
  sliderBlock(form, "Baseline SRS (0-10 per item)", "bl-srs", (i, v) => controller.setBaselineSrs(i, v));
  sliderBlock(form, "Third-visit ORS (0-10 per item)", "third-ors", (i, v) => controller.setThirdOrs(i, v));

  const demo = document.createElement("fieldset");
  const legend = document.createElement("legend");
  legend.textContent = "Client";
  demo.appendChild(legend);
  for (const [field, levels] of Object.entries(CATEGORICALS)) {
    const select = document.createElement("select");
    select.id = `field-${field}`;
    const placeholder = document.createElement("option");
    placeholder.value = "";
    placeholder.textContent = `choose ${field}`;
    select.appendChild(placeholder);
    for (const level of levels) {
      const option = document.createElement("option");
      option.value = level;
      option.textContent = level;
      select.appendChild(option);
    }
    select.addEventListener("change", () => {
      if (select.value) controller.setField(field as never, select.value as never);
    });
    demo.appendChild(select);
  }
  const age = document.createElement("input");
  age.type = "number";
  age.id = "field-age";
  age.min = "14";
  age.max = "120";
  age.placeholder = "age";
  age.addEventListener("change", () => controller.setField("age", Number(age.value)));
  demo.appendChild(age);

  const isNew = document.createElement("input");
  isNew.type = "checkbox";
  isNew.id = "field-is-new";
  isNew.checked = true;
  isNew.addEventListener("change", () => controller.setField("isNew", isNew.checked));
  demo.appendChild(isNew);

  for (const [flag, label] of SERVICE_FLAGS) {
    const box = document.createElement("input");
    box.type = "checkbox";
    box.id = `service-${flag}`;
    box.checked = flag === "therapy";
    box.addEventListener("change", () => controller.setService(flag as never, box.checked));
    const caption = document.createElement("label");
    caption.textContent = label;
    caption.appendChild(box);
    demo.appendChild(caption);
  }
  form.appendChild(demo);

  const modelPicker = document.createElement("select");
  modelPicker.id = "model-picker";
  const defaultOption = document.createElement("option");
  defaultOption.value = "ensemble";
  defaultOption.textContent = "ensemble (default)";
  modelPicker.appendChild(defaultOption);
  modelPicker.addEventListener("change", () => controller.setField("model", modelPicker.value));
  form.appendChild(modelPicker);
  fetchModels(baseUrl)
    .then((models) => {
      for (const model of models) {
        const option = document.createElement("option");
        option.value = model.name;
        option.textContent = `${model.name}${model.cv_auc !== null ? ` (AUC ${model.cv_auc.toFixed(3)})` : ""}`;
        modelPicker.appendChild(option);
      }
    })
    .catch(() => {
      // model list is a convenience; prediction errors surface via the banner
    });

  return controller;
}
