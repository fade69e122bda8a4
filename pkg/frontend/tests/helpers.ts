import { OverlayApp } from "../src/app.js";
import type { FetchLike, ResponseLike } from "../src/api.js";
import type { EventSourceLike } from "../src/stream.js";
import type { Card } from "../src/types.js";

export class FakeEventSource implements EventSourceLike {
  static instances: FakeEventSource[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: string }) => void) | null = null;
  onerror: (() => void) | null = null;
  closed = false;

  constructor(readonly url: string) {
    FakeEventSource.instances.push(this);
  }

  close(): void {
    this.closed = true;
  }

  open(): void {
    this.onopen?.();
  }

  deliver(payload: unknown): void {
    this.onmessage?.({ data: JSON.stringify(payload) });
  }

  drop(): void {
    this.onerror?.();
  }

  static latest(): FakeEventSource {
    const source = FakeEventSource.instances.at(-1);
    if (!source) {
      throw new Error("no event source created yet");
    }
    return source;
  }

  static reset(): void {
    FakeEventSource.instances = [];
  }
}

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export interface FakeBackend {
  fetchFn: FetchLike;
  requests: RecordedRequest[];
  on(route: string, handler: (request: RecordedRequest) => { status: number; body: unknown }): void;
}

export function makeBackend(): FakeBackend {
  const requests: RecordedRequest[] = [];
  const handlers = new Map<string, (request: RecordedRequest) => { status: number; body: unknown }>();
  const fetchFn: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body) : null;
    const request: RecordedRequest = { url, method, body };
    requests.push(request);
    const route = `${method} ${new URL(url).pathname}`;
    const handler = handlers.get(route);
    if (!handler) {
      return fakeResponse(500, { detail: `no handler for ${route}` });
    }
    const { status, body: responseBody } = handler(request);
    return fakeResponse(status, responseBody);
  };
  return {
    fetchFn,
    requests,
    on: (route, handler) => handlers.set(route, handler),
  };
}

function fakeResponse(status: number, body: unknown): ResponseLike {
  return { ok: status < 400, status, json: async () => body };
}

export function sampleCard(cardId: string, overrides: Partial<Card> = {}): Card {
  const questions = [1, 2, 3].map((rank) => ({
    text: `What related work addresses latency in the context of streaming? (${rank})`,
    intent: "explore" as const,
    rank,
    results: [1, 2, 3].map((resultRank) => ({
      doc_id: `p${rank}${resultRank}`,
      score: 1 - resultRank / 10,
      rank: resultRank,
      title: `Paper ${rank}.${resultRank}`,
      authors: ["A. Author", "B. Writer"],
      year: 2020 + resultRank,
      url: `https://example.org/p${rank}${resultRank}`,
    })),
  }));
  return {
    card_id: cardId,
    created_at: 11.0,
    status: "pending",
    trigger: {
      kind: "sustained_attention",
      fired_at: 11.0,
      anchor_at: 0.0,
      similarity: 1.0,
      threshold_used: 10.0,
    },
    questions,
    ...overrides,
  };
}

export interface Harness {
  app: OverlayApp;
  root: HTMLElement;
  backend: FakeBackend;
}

export async function buildApp(options: {
  suggestions?: Card[];
  idleCollapseMs?: number;
  baseDelayMs?: number;
  maxDelayMs?: number;
} = {}): Promise<Harness> {
  const backend = makeBackend();
  backend.on("GET /v1/suggestions", () => ({
    status: 200,
    body: { cards: options.suggestions ?? [] },
  }));
  const root = document.createElement("div");
  document.body.append(root);
  const app = new OverlayApp({
    engineUrl: "http://engine.test",
    root,
    fetchFn: backend.fetchFn,
    eventSourceFactory: (url) => new FakeEventSource(url),
    idleCollapseMs: options.idleCollapseMs,
    baseDelayMs: options.baseDelayMs ?? 500,
    maxDelayMs: options.maxDelayMs ?? 10_000,
  });
  await app.start();
  return { app, root, backend };
}

/** let pending promise chains settle without advancing any timers */
export async function flush(): Promise<void> {
  for (let i = 0; i < 5; i += 1) {
    await Promise.resolve();
  }
}
