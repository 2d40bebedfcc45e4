import { ApiClient } from "./api.js";
import { createApp } from "./app.js";

/** Browser entry point: same-origin API by default, overridable for
 * static hosting via ?api=... or a GEOSQUAD_API_BASE global. */

declare global {
  interface Window {
    GEOSQUAD_API_BASE?: string;
  }
}

const params = new URLSearchParams(window.location.search);
const base = window.GEOSQUAD_API_BASE ?? params.get("api") ?? "";
const app = createApp(document, new ApiClient(base));
document.getElementById("app")?.appendChild(app.root);
