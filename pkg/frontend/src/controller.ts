/** Console controller: form edits flow through the debounced scheduler to
 * the service; responses become view state. No prediction logic lives here. */

import type { PredictionRequest, PredictionResponse, Transport } from "./api.js";
import { buildRequest, emptyForm, FormState, isComplete, missingFields, scaleTotal, setSlider } from "./form.js";
import { DEBOUNCE_MS, QueryScheduler } from "./scheduler.js";
import { ConsoleState, gaugeView } from "./view.js";

export type Renderer = (state: ConsoleState) => void;

export class ConsoleController {
  readonly form: FormState;
  private readonly scheduler: QueryScheduler;
  private state: ConsoleState;

  constructor(
    private readonly predictUrl: string,
    transport: Transport,
    private readonly render: Renderer,
    debounceMs: number = DEBOUNCE_MS,
  ) {
    this.form = emptyForm();
    this.scheduler = new QueryScheduler(
      (payload: PredictionRequest) => transport(this.predictUrl, payload),
      {
        onResult: (response) => this.onResult(response),
        onError: (error) => this.onError(error),
      },
      debounceMs,
    );
    this.state = this.deriveState("incomplete");
    this.render(this.state);
  }

  get currentState(): ConsoleState {
    return this.state;
  }

  get requestsSent(): number {
    return this.scheduler.requestsSent;
  }

  /** Mutators: each one re-renders and (when the form is complete) queues a
   * debounced re-query, keeping at most one request in flight. */

  setBaselineOrs(index: number, value: number): void {
    this.form.baselineOrs = setSlider(this.form.baselineOrs, index, value);
    this.formChanged();
  }

  setBaselineSrs(index: number, value: number): void {
    this.form.baselineSrs = setSlider(this.form.baselineSrs, index, value);
    this.formChanged();
  }

  setThirdOrs(index: number, value: number): void {
    this.form.thirdOrs = setSlider(this.form.thirdOrs, index, value);
    this.formChanged();
  }

  setField<K extends keyof FormState>(field: K, value: FormState[K]): void {
    this.form[field] = value;
    this.formChanged();
  }

  setService(flag: keyof FormState["services"], value: boolean): void {
    this.form.services[flag] = value;
    this.formChanged();
  }

  private formChanged(): void {
    if (!isComplete(this.form)) {
      this.state = this.deriveState("incomplete");
      this.render(this.state);
      return;
    }
    this.state = this.deriveState("waiting", this.state.gauge);
    this.render(this.state);
    this.scheduler.schedule(buildRequest(this.form));
  }

  private onResult(response: PredictionResponse): void {
    this.state = { ...this.deriveState("ready"), gauge: gaugeView(response) };
    this.render(this.state);
  }

  private onError(error: Error): void {
    // visible banner, never stale data
    this.state = { ...this.deriveState("error"), gauge: null, errorText: error.message };
    this.render(this.state);
  }

  private deriveState(status: ConsoleState["status"], gauge: ConsoleState["gauge"] = null): ConsoleState {
    return {
      status,
      blOrsTotal: scaleTotal(this.form.baselineOrs),
      blSrsTotal: scaleTotal(this.form.baselineSrs),
      thirdOrsTotal: scaleTotal(this.form.thirdOrs),
      gauge: status === "error" ? null : gauge,
      errorText: null,
      missing: missingFields(this.form),
    };
  }
}
