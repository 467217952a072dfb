// Typed client for the questionnaire session service (HTTP+JSON).

export interface AttributeRow {
  attribute: string;
  unit: string;
  level: string;
}

export interface ProductCard {
  design_index: number;
  attributes: AttributeRow[];
  price: number;
}

export interface QueryPayload {
  query_id: string;
  left: ProductCard;
  right: ProductCard;
  asked: number;
  budget: number;
}

export interface MassEntry {
  design_index: number;
  pi: number;
  levels: number[];
}

export interface SessionSummary {
  id: string;
  status: "awaiting-response" | "complete";
  q: number;
  budget: number;
  entropy_bits: number;
  top: MassEntry[];
  query?: QueryPayload;
}

export interface SessionState extends SessionSummary {
  strategy: string;
  entropy_trajectory: number[];
  map_partworth: number[];
  recommendation: MassEntry;
}

export interface ServiceErrorBody {
  code: string;
  message: string;
}

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const res = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  if (!res.ok) {
    let body: ServiceErrorBody = { code: "http-error", message: res.statusText };
    try {
      body = (await res.json()) as ServiceErrorBody;
    } catch {
      // non-JSON error body: keep the fallback
    }
    throw new ApiError(res.status, body.code, body.message);
  }
  return (await res.json()) as T;
}

export class SessionApi {
  constructor(private base: string = "") {}

  createSession(config: Record<string, unknown> = {}): Promise<SessionSummary> {
    return request<SessionSummary>(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify(config),
    });
  }

  getQuery(sessionId: string): Promise<QueryPayload> {
    return request<QueryPayload>(this.base, `/sessions/${sessionId}/query`);
  }

  submitResponse(sessionId: string, queryId: string, chosen: number): Promise<SessionSummary> {
    return request<SessionSummary>(this.base, `/sessions/${sessionId}/responses`, {
      method: "POST",
      body: JSON.stringify({ query_id: queryId, chosen }),
    });
  }

  getState(sessionId: string): Promise<SessionState> {
    return request<SessionState>(this.base, `/sessions/${sessionId}/state`);
  }

  health(): Promise<{ status: string }> {
    return request<{ status: string }>(this.base, "/healthz");
  }
}
