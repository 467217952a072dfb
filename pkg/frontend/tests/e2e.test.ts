// @vitest-environment jsdom
//
// End-to-end: a scripted browser session against a real served backend.
// The test spawns the Python service, creates a 10-query session, clicks
// through every query in the respondent view, and checks the dashboard.

import { spawn, ChildProcess } from "node:child_process";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { SessionApi, SessionSummary } from "../src/api";
import { Dashboard } from "../src/dashboard";
import { RespondentFlow } from "../src/respondent";

const PORT = 8973;
const BASE = `http://127.0.0.1:${PORT}`;
let server: ChildProcess;

async function waitForHealth(api: SessionApi, tries = 120): Promise<void> {
  for (let i = 0; i < tries; i++) {
    try {
      await api.health();
      return;
    } catch {
      await new Promise((resolve) => setTimeout(resolve, 500));
    }
  }
  throw new Error("service did not come up");
}

beforeAll(async () => {
  server = spawn(
    "python3",
    ["-m", "acquest.cli", "serve", "--port", String(PORT), "--space", "desk",
     "--J", "150", "--N", "8"],
    { cwd: "..", stdio: "ignore" },
  );
  await waitForHealth(new SessionApi(BASE));
}, 90_000);

afterAll(() => {
  server?.kill();
});

describe("survey ui end to end", () => {
  it("answers 10 queries through the DOM and reaches completion", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app") as HTMLElement;
    const api = new SessionApi(BASE);
    const submitSpy = vi.spyOn(api, "submitResponse");

    const created = await api.createSession({ budget: 10 });
    expect(created.status).toBe("awaiting-response");

    let roundDone: (s: SessionSummary) => void;
    const flow = new RespondentFlow(api, created.id, root, {
      onAnswered: (summary) => roundDone(summary),
    });
    await flow.start(created.query);

    let summary: SessionSummary | null = null;
    for (let round = 0; round < 10; round++) {
      // the outstanding id rendered in the DOM must match the service's
      const serverQuery = await api.getQuery(created.id);
      const card = root.querySelector(".product-card") as HTMLElement;
      expect(card.dataset.queryId).toBe(serverQuery.query_id);

      const answered = new Promise<SessionSummary>((resolve) => {
        roundDone = resolve;
      });
      card.click();
      summary = await answered;
      expect(summary.q).toBe(round + 1);
    }

    expect(summary!.status).toBe("complete");
    expect(root.querySelector(".completion")).not.toBeNull();
    expect(root.textContent).toContain("All done");

    // every submission echoed the id of the query it answered: q1..q10
    const usedIds = submitSpy.mock.calls.map((call) => call[1]);
    expect(usedIds).toEqual(
      Array.from({ length: 10 }, (_, i) => `q${i + 1}`),
    );

    // dashboard: entropy series has responses + 1 points and freezes
    const dashRoot = document.createElement("div");
    const dash = new Dashboard(api, created.id, dashRoot, {}, 50);
    await dash.tick();
    dash.stop();
    expect(dash.lastState?.entropy_trajectory.length).toBe(11);
    expect(dashRoot.querySelectorAll(".bar-row").length).toBe(10);
    expect(dashRoot.textContent).toContain("complete");
  }, 120_000);

  it("recovers from a stale query id by refetching", async () => {
    document.body.innerHTML = '<main id="app"></main>';
    const root = document.getElementById("app") as HTMLElement;
    const api = new SessionApi(BASE);
    const created = await api.createSession({ budget: 3 });

    // answer out of band to make the UI's rendered query stale
    const flow = new RespondentFlow(api, created.id, root);
    await flow.start(created.query);
    const stale = created.query!;
    await api.submitResponse(created.id, stale.query_id, stale.left.design_index);

    await flow.choose(stale.right.design_index, stale.query_id);
    // the flow refetched the now-outstanding query instead of double-submitting
    const card = root.querySelector(".product-card") as HTMLElement;
    expect(card.dataset.queryId).toBe("q2");
    const state = await api.getState(created.id);
    expect(state.q).toBe(1);
  }, 60_000);
});
