// Researcher dashboard: polls /state and renders the evolving mass
// histogram (top 10), the entropy-vs-query curve, and the query count.
// Sessions are low-frequency human interactions, so 1 s polling is plenty.

import { ApiError, SessionApi, SessionState } from "./api.js";

export interface DashboardCallbacks {
  onUpdate?: (state: SessionState) => void;
  onNotFound?: () => void;
}

export class Dashboard {
  private timer: ReturnType<typeof setInterval> | null = null;
  lastState: SessionState | null = null;

  constructor(
    private api: SessionApi,
    private sessionId: string,
    private root: HTMLElement,
    private callbacks: DashboardCallbacks = {},
    private intervalMs = 1000,
  ) {}

  start(): void {
    void this.tick();
    this.timer = setInterval(() => void this.tick(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  async tick(): Promise<void> {
    let state: SessionState;
    try {
      state = await this.api.getState(this.sessionId);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.stop();
        this.callbacks.onNotFound?.();
        return;
      }
      return; // transient errors: keep polling
    }
    this.lastState = state;
    this.render(state);
    this.callbacks.onUpdate?.(state);
    if (state.status === "complete") {
      this.stop(); // freeze the final state
    }
  }

  private render(state: SessionState): void {
    const bars = state.top
      .map((t) => {
        const width = Math.max(1, Math.round(t.pi * 100));
        return `<div class="bar-row" data-design="${t.design_index}">
          <span class="bar-label">#${t.design_index}</span>
          <div class="bar" style="width:${width}%"></div>
          <span class="bar-value">${(t.pi * 100).toFixed(1)}%</span>
        </div>`;
      })
      .join("");
    this.root.innerHTML = `
      <div class="dash-header">
        <span class="strategy">${state.strategy}</span>
        <span class="count">${state.q} / ${state.budget} answered</span>
        <span class="status ${state.status}">${state.status}</span>
      </div>
      <h3>Probability of being most profitable (top ${state.top.length})</h3>
      <div class="histogram">${bars}</div>
      <h3>Posterior entropy (bits)</h3>
      ${entropySvg(state.entropy_trajectory)}
    `;
  }
}

export function entropySvg(series: number[], width = 420, height = 120): string {
  if (series.length === 0) {
    return `<svg class="entropy" width="${width}" height="${height}"></svg>`;
  }
  const maxY = Math.max(...series, 1e-9);
  const stepX = series.length > 1 ? width / (series.length - 1) : 0;
  const points = series
    .map((h, i) => {
      const x = (i * stepX).toFixed(1);
      const y = (height - (h / maxY) * (height - 8) - 4).toFixed(1);
      return `${x},${y}`;
    })
    .join(" ");
  return `<svg class="entropy" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">
    <polyline fill="none" stroke="currentColor" stroke-width="2" points="${points}" />
  </svg>`;
}
