/** Debounced single-flight query scheduler.
 *
 * Slider-driven what-if changes restart a 250 ms debounce window; when it
 * fires, at most one request is in flight. A change arriving while a request
 * is pending marks its response stale: the stale result is discarded and the
 * latest payload is sent as soon as the flight settles.
 */

import type { PredictionRequest, PredictionResponse, Transport } from "./api.js";

export const DEBOUNCE_MS = 250;

export interface SchedulerCallbacks {
  onResult: (response: PredictionResponse) => void;
  onError: (error: Error) => void;
}

export class QueryScheduler {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private latestPayload: PredictionRequest | null = null;
  private inFlight = false;
  private supersededWhileInFlight = false;
  private sent = 0;

  constructor(
    private readonly send: (payload: PredictionRequest) => Promise<PredictionResponse>,
    private readonly callbacks: SchedulerCallbacks,
    private readonly delayMs: number = DEBOUNCE_MS,
  ) {}

  /** Number of requests actually dispatched (test hook). */
  get requestsSent(): number {
    return this.sent;
  }

  schedule(payload: PredictionRequest): void {
    this.latestPayload = payload;
    if (this.inFlight) {
      this.supersededWhileInFlight = true;
    }
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      this.fire();
    }, this.delayMs);
  }

  private fire(): void {
    if (this.inFlight || this.latestPayload === null) {
      return; // the settling flight re-fires with the latest payload
    }
    const payload = this.latestPayload;
    this.inFlight = true;
    this.supersededWhileInFlight = false;
    this.sent += 1;
    this.send(payload)
      .then((response) => {
        if (!this.supersededWhileInFlight) {
          this.callbacks.onResult(response);
        }
      })
      .catch((error: unknown) => {
        if (!this.supersededWhileInFlight) {
          this.callbacks.onError(error instanceof Error ? error : new Error(String(error)));
        }
      })
      .finally(() => {
        this.inFlight = false;
        if (this.supersededWhileInFlight && this.timer === null) {
          this.fire(); // stale response discarded above; refresh with latest
        }
      });
  }
}
