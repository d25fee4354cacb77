// Bootstrap: read the session id (and API base) from the query string, then
// hand control to the poll-driven controller.

import { ApiClient } from "./api.js";
import { SessionController } from "./session.js";
import { View } from "./view.js";

const params = new URLSearchParams(window.location.search);
const sid = params.get("session");
const base = params.get("api") ?? "";
const root = document.getElementById("app")!;

if (!sid) {
  root.textContent = "missing ?session=<id> in the URL";
} else {
  const controller = new SessionController(new ApiClient(base), sid);
  new View(root, controller);
  void controller.refresh();
  controller.startPolling();
}
