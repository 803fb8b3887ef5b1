// HTTP client and the server-sent-event consumer for attack progress.

import type {
  AttackEvent,
  CampaignDetail,
  DatasetSummary,
  ModelPayload,
  RunPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function parseError(response: Response): Promise<never> {
  let code = "error";
  let message = response.statusText;
  try {
    const body = await response.json();
    if (body?.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, code, message);
}

export class ApiClient {
  constructor(private base: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await fetch(this.base + path, init);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  health(): Promise<{ status: string }> {
    return this.request("/health");
  }

  loadDataset(body: Record<string, unknown>): Promise<DatasetSummary> {
    return this.post("/datasets", body);
  }

  dataset(id: string): Promise<DatasetSummary> {
    return this.request(`/datasets/${id}`);
  }

  images(id: string, split: string, indices: number[]) {
    const query = new URLSearchParams({ split, indices: indices.join(",") });
    return this.request<{ images: import("./types.js").ImagePayload[] }>(
      `/datasets/${id}/images?${query}`,
    );
  }

  trainModel(body: Record<string, unknown>): Promise<ModelPayload> {
    return this.post("/models", body);
  }

  selectTargets(body: Record<string, unknown>) {
    return this.post<{ targets: { object_id: number; correct: boolean }[] }>(
      "/targets/select",
      body,
    );
  }

  startAttack(body: Record<string, unknown>): Promise<{ campaign_id: string }> {
    return this.post("/attacks", body);
  }

  cancelAttack(datasetId: string, campaignId: string) {
    return this.post<{ status: string }>(
      `/datasets/${datasetId}/attacks/${campaignId}/cancel`,
      {},
    );
  }

  campaign(datasetId: string, campaignId: string): Promise<CampaignDetail> {
    return this.request(`/datasets/${datasetId}/attacks/${campaignId}`);
  }

  runTest(body: Record<string, unknown>): Promise<RunPayload> {
    return this.post("/runs", body);
  }

  saveSession(body: Record<string, unknown>): Promise<{ path: string }> {
    return this.post("/sessions/save", body);
  }

  eventsUrl(datasetId: string, campaignId: string): string {
    return `${this.base}/datasets/${datasetId}/attacks/${campaignId}/events`;
  }
}

/**
 * Ordered log of attack progress events.
 *
 * Feed it raw SSE text (possibly in arbitrary chunks); it parses complete
 * `data: {...}` frames, keeps iteration events in arrival order and holds
 * the terminal frame (`done` / `cancelled` / `error`) separately.
 */
export class SseEventLog {
  readonly events: AttackEvent[] = [];
  terminal: AttackEvent | null = null;
  private buffer = "";
  private listeners: ((event: AttackEvent) => void)[] = [];

  onEvent(listener: (event: AttackEvent) => void): void {
    this.listeners.push(listener);
  }

  feed(chunk: string): void {
    this.buffer += chunk;
    let boundary = this.buffer.indexOf("\n\n");
    while (boundary >= 0) {
      const frame = this.buffer.slice(0, boundary);
      this.buffer = this.buffer.slice(boundary + 2);
      this.handleFrame(frame);
      boundary = this.buffer.indexOf("\n\n");
    }
  }

  private handleFrame(frame: string): void {
    const data = frame
      .split("\n")
      .filter((line) => line.startsWith("data: "))
      .map((line) => line.slice("data: ".length))
      .join("\n");
    if (!data) return;
    const event = JSON.parse(data) as AttackEvent;
    if (event.type === "iteration") {
      this.events.push(event);
    } else {
      this.terminal = event;
    }
    for (const listener of this.listeners) listener(event);
  }

  iterationEvents(): AttackEvent[] {
    return this.events.filter((event) => event.type === "iteration");
  }

  /** True when every run's iteration numbers arrive strictly increasing. */
  isOrderedPerRun(): boolean {
    const last = new Map<string, number>();
    for (const event of this.iterationEvents()) {
      const key = `${event.target ?? 0}:${event.run ?? 0}`;
      const previous = last.get(key) ?? 0;
      if ((event.iteration ?? 0) <= previous) return false;
      last.set(key, event.iteration ?? 0);
    }
    return true;
  }
}

/** Stream a live progress response into a log until the terminal frame. */
export async function consumeEventStream(
  response: Response,
  log: SseEventLog,
): Promise<void> {
  const reader = response.body?.getReader();
  if (!reader) throw new Error("response has no readable body");
  const decoder = new TextDecoder();
  for (;;) {
    const { value, done } = await reader.read();
    if (value) log.feed(decoder.decode(value, { stream: true }));
    if (done) break;
  }
}
