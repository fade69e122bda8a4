import { OverlayApp } from "./app.js";
import type { EventSourceLike } from "./stream.js";

const params = new URLSearchParams(window.location.search);
const engineUrl = params.get("engine") ?? "http://127.0.0.1:8765";

const root = document.getElementById("overlay-root");
if (!root) {
  throw new Error("missing #overlay-root element");
}

const app = new OverlayApp({
  engineUrl,
  root,
  fetchFn: (url, init) => window.fetch(url, init),
  // the native handler signatures are wider (MessageEvent), which is fine
  eventSourceFactory: (url) => new EventSource(url) as unknown as EventSourceLike,
});

void app.start();
void app.refreshMemory();
