// Event-stream client with explicit reconnection. Instead of relying on the
// browser's opaque EventSource retry behavior, a drop closes the source and
// schedules a fresh connection with exponential backoff, so the app always
// knows whether it is connected.

export interface EventSourceLike {
  onopen: (() => void) | null;
  onmessage: ((event: { data: string }) => void) | null;
  onerror: (() => void) | null;
  close(): void;
}

export type EventSourceFactory = (url: string) => EventSourceLike;

export interface EventStreamOptions {
  baseDelayMs?: number;
  maxDelayMs?: number;
}

export class EventStream {
  private source: EventSourceLike | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private attempts = 0;
  private stopped = false;
  private readonly baseDelayMs: number;
  private readonly maxDelayMs: number;

  constructor(
    private readonly url: string,
    private readonly factory: EventSourceFactory,
    private readonly onEvent: (payload: unknown) => void,
    private readonly onStatus: (connected: boolean) => void,
    options: EventStreamOptions = {},
  ) {
    this.baseDelayMs = options.baseDelayMs ?? 500;
    this.maxDelayMs = options.maxDelayMs ?? 10_000;
  }

  connect(): void {
    if (this.stopped || this.source !== null) {
      return;
    }
    const source = this.factory(this.url);
    this.source = source;
    source.onopen = () => {
      this.attempts = 0;
      this.onStatus(true);
    };
    source.onmessage = (event) => {
      let payload: unknown;
      try {
        payload = JSON.parse(event.data);
      } catch {
        return; // not ours to interpret
      }
      this.onEvent(payload);
    };
    source.onerror = () => {
      this.handleDrop();
    };
  }

  delayFor(attempt: number): number {
    return Math.min(this.baseDelayMs * 2 ** attempt, this.maxDelayMs);
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.source?.close();
    this.source = null;
  }

  private handleDrop(): void {
    if (this.stopped) {
      return;
    }
    this.source?.close();
    this.source = null;
    this.onStatus(false);
    const delay = this.delayFor(this.attempts);
    this.attempts += 1;
    this.timer = setTimeout(() => {
      this.timer = null;
      this.connect();
    }, delay);
  }
}
