import { ApiClient } from "./api.js";
import { App, parseRoute } from "./app.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app mount point");
  }
  const route = parseRoute(location.pathname, location.search);
  const api = new ApiClient("", undefined, route.mode === "view");
  try {
    const app = await App.fromRoute(root, api, route);
    await app.start();
  } catch (error) {
    root.replaceChildren(document.createTextNode(`failed to load workspace: ${String(error)}`));
  }
}

void boot();
