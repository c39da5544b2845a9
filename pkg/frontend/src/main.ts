import { createApp } from "./app.js";

const root = document.getElementById("app");
if (root) {
  const app = createApp(root, {
    baseUrl: "",
    fetchImpl: (input, init) => window.fetch(input, init),
  });
  // A fresh service has no cube yet; that is fine, the status bar says so.
  void app.refresh().catch(() => undefined);
}
