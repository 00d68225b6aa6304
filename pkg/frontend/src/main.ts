/** Browser entry point: start the app once the document is parsed. */

import { bootstrap } from "./app.js";

if (document.readyState === "loading") {
  document.addEventListener("DOMContentLoaded", bootstrap);
} else {
  bootstrap();
}
