/** Service base URL: a runtime config script may set
 * `window.PROMINE_CONSOLE_CONFIG = { baseUrl: "..." }` before main.js loads;
 * otherwise the local service default applies. */

export interface ConsoleConfig {
  baseUrl: string;
}

declare global {
  interface Window {
    PROMINE_CONSOLE_CONFIG?: Partial<ConsoleConfig>;
  }
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8000";

export function resolveConfig(overrides?: Partial<ConsoleConfig>): ConsoleConfig {
  const runtime = typeof window !== "undefined" ? window.PROMINE_CONSOLE_CONFIG : undefined;
  return { baseUrl: overrides?.baseUrl ?? runtime?.baseUrl ?? DEFAULT_BASE_URL };
}
