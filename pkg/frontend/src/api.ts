/** Typed wrappers over the labeling service's HTTP+JSON endpoints. */

export interface Query {
  example_id: number;
  meta: string | null;
}

export interface LabeledRow {
  example_id: number;
  class: number;
  provenance: string;
}

export interface Summary {
  id_label_fraction: number;
  labels_used: number;
}

export interface Snapshot {
  session_id: string;
  k: number | null;
  state: "awaiting-label" | "batch-complete" | "exhausted";
  next: Query | null;
  labeled: LabeledRow[];
  ord: number | null;
  batch_index: number;
  batch_progress: number;
  config: Record<string, unknown>;
  metrics: Summary;
}

export type LabelResponse =
  | { next: Query }
  | { state: string; summary: Summary };

export class HttpError extends Error {
  constructor(readonly status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function asError(res: Response): Promise<HttpError> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (body && typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  return new HttpError(res.status, detail);
}

export class Api {
  constructor(private readonly base: string = "") {}

  async getSession(sessionId: string): Promise<Snapshot> {
    const res = await fetch(`${this.base}/sessions/${sessionId}`);
    if (!res.ok) throw await asError(res);
    return res.json();
  }

  async submitLabel(
    sessionId: string,
    exampleId: number,
    cls: number,
  ): Promise<LabelResponse> {
    const res = await fetch(`${this.base}/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ example_id: exampleId, class: cls }),
    });
    if (!res.ok) throw await asError(res);
    return res.json();
  }

  async createSession(body: unknown): Promise<{ session_id: string; next: Query | null }> {
    const res = await fetch(`${this.base}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!res.ok) throw await asError(res);
    return res.json();
  }
}
