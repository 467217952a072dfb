// Respondent view: one pairwise choice at a time, as two product cards.
//
// Forced choice (no skip); card order is shuffled per display to avoid
// position bias, but the submitted design identity always comes from the
// card the respondent clicked, echoed with the outstanding query id.  An
// in-flight guard makes double clicks submit once; stale-query conflicts
// refetch the current query instead of re-submitting.

import { ApiError, ProductCard, QueryPayload, SessionApi, SessionSummary } from "./api.js";

export interface RespondentCallbacks {
  onAnswered?: (summary: SessionSummary) => void;
  onComplete?: (summary: SessionSummary) => void;
}

export class RespondentFlow {
  private busy = false;
  private current: QueryPayload | null = null;

  constructor(
    private api: SessionApi,
    private sessionId: string,
    private root: HTMLElement,
    private callbacks: RespondentCallbacks = {},
    private shuffle: () => number = Math.random,
  ) {}

  async start(initial?: QueryPayload): Promise<void> {
    if (initial) {
      this.renderQuery(initial);
      return;
    }
    try {
      this.renderQuery(await this.api.getQuery(this.sessionId));
    } catch (err) {
      if (err instanceof ApiError && err.code === "session-complete") {
        this.renderCompletion(await this.api.getState(this.sessionId));
        return;
      }
      throw err;
    }
  }

  get outstandingQueryId(): string | null {
    return this.current?.query_id ?? null;
  }

  private renderQuery(query: QueryPayload): void {
    this.current = query;
    this.busy = false;
    const cards: ProductCard[] = [query.left, query.right];
    if (this.shuffle() < 0.5) {
      cards.reverse();
    }
    this.root.innerHTML = `
      <div class="progress">question ${query.asked + 1} of ${query.budget}</div>
      <p class="prompt">Which product would you rather buy?</p>
      <div class="cards"></div>
    `;
    const host = this.root.querySelector(".cards") as HTMLElement;
    for (const card of cards) {
      host.appendChild(this.buildCard(card, query.query_id));
    }
  }

  private buildCard(card: ProductCard, queryId: string): HTMLElement {
    const el = document.createElement("button");
    el.className = "product-card";
    el.dataset.designIndex = String(card.design_index);
    el.dataset.queryId = queryId;
    const rows = card.attributes
      .map((row) => {
        const price = row.attribute === "Price" ? " price-row" : "";
        return `<tr class="attribute-row${price}"><td>${row.attribute}</td>` +
          `<td>${row.level}${row.unit && row.unit !== "-" ? " " + row.unit : ""}</td></tr>`;
      })
      .join("");
    el.innerHTML = `
      <table>${rows}</table>
      <div class="price-tag">$${card.price.toFixed(2)}</div>
      <div class="choose">choose</div>
    `;
    el.addEventListener("click", () => void this.choose(card.design_index, queryId));
    return el;
  }

  async choose(designIndex: number, queryId: string): Promise<void> {
    if (this.busy || queryId !== this.current?.query_id) {
      return; // double click or a card from an already-answered query
    }
    this.busy = true;
    let summary: SessionSummary;
    try {
      summary = await this.api.submitResponse(this.sessionId, queryId, designIndex);
    } catch (err) {
      this.busy = false;
      if (err instanceof ApiError && (err.code === "stale-query" || err.code === "session-complete")) {
        await this.start(); // refetch instead of re-submitting
        return;
      }
      this.renderError(err as Error);
      return;
    }
    this.callbacks.onAnswered?.(summary);
    if (summary.status === "complete") {
      this.renderCompletion(summary);
      this.callbacks.onComplete?.(summary);
    } else if (summary.query) {
      this.renderQuery(summary.query);
    } else {
      await this.start();
    }
  }

  private renderCompletion(summary: SessionSummary): void {
    this.current = null;
    const best = summary.top[0];
    const rows = summary.top
      .slice(0, 5)
      .map((t) => `<li>design #${t.design_index}: ${(t.pi * 100).toFixed(1)}%</li>`)
      .join("");
    this.root.innerHTML = `
      <div class="completion">
        <h2>All done, thank you!</h2>
        <p>Most likely best product: <strong>design #${best.design_index}</strong>
        (${(best.pi * 100).toFixed(1)}% of posterior mass)</p>
        <ol class="top-list">${rows}</ol>
      </div>
    `;
  }

  private renderError(err: Error): void {
    const note = document.createElement("p");
    note.className = "error";
    note.textContent = `Something went wrong (${err.message}); pick again.`;
    this.root.prepend(note);
  }
}
