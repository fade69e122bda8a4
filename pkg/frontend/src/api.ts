import type { Card, FeedbackStatus, StateSnapshot } from "./types.js";

// structural subset of fetch/Response so tests can hand in plain objects
export interface ResponseLike {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<ResponseLike>;

export class ApiError extends Error {
  constructor(
    message: string,
    readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface FeedbackAck {
  card_id: string;
  status: FeedbackStatus;
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike,
  ) {}

  async getState(): Promise<StateSnapshot> {
    return (await this.get("/v1/state")) as StateSnapshot;
  }

  async getSuggestions(limit = 50): Promise<Card[]> {
    const body = (await this.get(`/v1/suggestions?limit=${limit}`)) as { cards: Card[] };
    return body.cards;
  }

  async sendFeedback(cardId: string, status: FeedbackStatus): Promise<FeedbackAck> {
    const response = await this.fetchFn(`${this.baseUrl}/v1/feedback`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ card_id: cardId, status }),
    });
    return (await this.unwrap(response)) as FeedbackAck;
  }

  private async get(path: string): Promise<unknown> {
    return this.unwrap(await this.fetchFn(`${this.baseUrl}${path}`));
  }

  private async unwrap(response: ResponseLike): Promise<unknown> {
    if (!response.ok) {
      let detail = `HTTP ${response.status}`;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body?.detail === "string") {
          detail = body.detail;
        }
      } catch {
        // non-JSON error body; the status code is all we have
      }
      throw new ApiError(detail, response.status);
    }
    return response.json();
  }
}
