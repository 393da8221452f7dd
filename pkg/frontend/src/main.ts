import { AnnotationApi } from "./api.js";
import { App } from "./app.js";

const baseUrl = new URLSearchParams(window.location.search).get("service") ?? "";
const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
new App(root, new AnnotationApi(baseUrl), `${baseUrl}/stats`).start();
