// Entry point: route by query string.
//   ?session=<id>            respondent view for an existing session
//   ?session=<id>&view=dash  researcher dashboard
//   (no session)             landing page that starts a new session

import { ApiError, SessionApi } from "./api.js";
import { Dashboard } from "./dashboard.js";
import { RespondentFlow } from "./respondent.js";

function renderPicker(root: HTMLElement, api: SessionApi): void {
  root.innerHTML = `
    <div class="landing">
      <h1>Product survey</h1>
      <p>Answer a short series of either/or questions about products.</p>
      <button id="start">Start a new survey</button>
      <p class="hint">…or open <code>?session=&lt;id&gt;</code> /
      <code>?session=&lt;id&gt;&amp;view=dash</code> directly.</p>
    </div>
  `;
  const button = root.querySelector("#start") as HTMLButtonElement;
  button.addEventListener("click", async () => {
    button.disabled = true;
    const summary = await api.createSession({});
    const url = new URL(window.location.href);
    url.searchParams.set("session", summary.id);
    window.history.replaceState(null, "", url.toString());
    const flow = new RespondentFlow(api, summary.id, root);
    await flow.start(summary.query);
  });
}

export async function boot(root: HTMLElement): Promise<void> {
  const api = new SessionApi("");
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    renderPicker(root, api);
    return;
  }
  if (params.get("view") === "dash") {
    const dash = new Dashboard(api, sessionId, root, {
      onNotFound: () => renderPicker(root, api),
    });
    dash.start();
    return;
  }
  const flow = new RespondentFlow(api, sessionId, root);
  try {
    await flow.start();
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      renderPicker(root, api);
    } else {
      throw err;
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  void boot(document.getElementById("app") as HTMLElement);
}
