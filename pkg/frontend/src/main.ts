import { ApiClient } from "./api.js";
import { AnnotationFlow } from "./flow.js";
import { render } from "./dom.js";

// API base URL: same origin by default (the service can mount the built
// assets), overridable at runtime via <meta name="api-base" content="...">.
const meta = document.querySelector('meta[name="api-base"]');
const baseUrl = meta?.getAttribute("content") ?? "";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app container");
}
const flow = new AnnotationFlow(new ApiClient(baseUrl), () => render(root, flow));
render(root, flow);
