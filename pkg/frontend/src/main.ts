import { ApiClient } from "./api.js";
import { App } from "./app.js";

const params = new URLSearchParams(window.location.search);
const app = new App(document.body, new ApiClient(), {
  tileUrl: params.get("tiles") ?? undefined,
});
void app.init();
