/** Browser entry point: create a session and run it in the page. */

import { ApiClient } from "./api.js";
import { SessionRunner } from "./session.js";
import { DomTrialView } from "./ui.js";

function param(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");

  const api = new ApiClient({ baseUrl: param("api") ?? "" });
  const participant = param("participant") ?? `anon-${Date.now()}`;
  let sessionId = param("session");
  if (!sessionId) {
    const scheduleUrl = param("schedule");
    if (!scheduleUrl) {
      root.textContent = "Provide ?session=<id> or ?schedule=<url>&participant=<id>.";
      return;
    }
    const schedule = await (await fetch(scheduleUrl)).json();
    const info = await api.createSession(participant, schedule);
    sessionId = info.session_id;
  }

  const view = new DomTrialView(root);
  const runner = new SessionRunner(api, sessionId, view);
  await runner.run();
}

boot().catch((err) => {
  const root = document.getElementById("app");
  if (root) root.textContent = `Session failed: ${String(err)}`;
  console.error(err);
});
