import { resolveConfig } from "./config.js";
import { mountConsole } from "./dom.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
mountConsole(root, resolveConfig().baseUrl);
