// Connection-loss behavior: the banner, exponential backoff, and duplicate
// suppression across reconnects.

import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { EventStream } from "../src/stream.js";
import { buildApp, sampleCard, FakeEventSource } from "./helpers.js";

beforeEach(() => {
  vi.useFakeTimers();
  FakeEventSource.reset();
});

afterEach(() => {
  vi.useRealTimers();
  document.body.innerHTML = "";
});

describe("stream resilience", () => {
  it("shows the banner on drop, reconnects with backoff, resumes without duplicates", async () => {
    const { root } = await buildApp({ baseDelayMs: 500 });
    const banner = root.querySelector<HTMLElement>('[data-role="banner"]')!;
    expect(banner.hidden).toBe(false); // nothing confirmed yet

    const first = FakeEventSource.latest();
    first.open();
    expect(banner.hidden).toBe(true);
    first.deliver({ type: "card", card: sampleCard("card-1") });
    expect(root.querySelectorAll("article").length).toBe(1);

    first.drop();
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("disconnected");
    expect(first.closed).toBe(true);

    vi.advanceTimersByTime(499);
    expect(FakeEventSource.instances).toHaveLength(1); // still waiting
    vi.advanceTimersByTime(1);
    expect(FakeEventSource.instances).toHaveLength(2);

    const second = FakeEventSource.latest();
    second.open();
    expect(banner.hidden).toBe(true);

    // the engine (or a proxy) may replay the last card on reconnect
    second.deliver({ type: "card", card: sampleCard("card-1") });
    second.deliver({ type: "card", card: sampleCard("card-2") });
    expect(root.querySelectorAll('article[data-card-id="card-1"]')).toHaveLength(1);
    expect(root.querySelectorAll('article[data-card-id="card-2"]')).toHaveLength(1);
    expect(root.querySelectorAll("article")).toHaveLength(2);
  });

  it("doubles the retry delay up to the cap while the engine stays down", async () => {
    await buildApp({ baseDelayMs: 500, maxDelayMs: 2000 });
    FakeEventSource.latest().drop();

    vi.advanceTimersByTime(500); // attempt 0 -> 500 ms
    expect(FakeEventSource.instances).toHaveLength(2);
    FakeEventSource.latest().drop();

    vi.advanceTimersByTime(999);
    expect(FakeEventSource.instances).toHaveLength(2);
    vi.advanceTimersByTime(1); // attempt 1 -> 1000 ms
    expect(FakeEventSource.instances).toHaveLength(3);
    FakeEventSource.latest().drop();

    vi.advanceTimersByTime(2000); // attempt 2 -> 2000 ms
    expect(FakeEventSource.instances).toHaveLength(4);
    FakeEventSource.latest().drop();

    vi.advanceTimersByTime(1999);
    expect(FakeEventSource.instances).toHaveLength(4);
    vi.advanceTimersByTime(1); // attempt 3 -> still capped at 2000 ms
    expect(FakeEventSource.instances).toHaveLength(5);
  });

  it("a successful reconnect resets the backoff", async () => {
    await buildApp({ baseDelayMs: 500, maxDelayMs: 10_000 });
    FakeEventSource.latest().drop();
    vi.advanceTimersByTime(500);
    FakeEventSource.latest().drop();
    vi.advanceTimersByTime(1000);
    expect(FakeEventSource.instances).toHaveLength(3);

    FakeEventSource.latest().open(); // back to a healthy connection
    FakeEventSource.latest().drop();
    vi.advanceTimersByTime(500); // base delay again, not 2000
    expect(FakeEventSource.instances).toHaveLength(4);
  });

  it("stopping the app cancels any pending reconnect", async () => {
    const { app } = await buildApp({ baseDelayMs: 500 });
    FakeEventSource.latest().drop();
    app.stop();
    vi.advanceTimersByTime(60_000);
    expect(FakeEventSource.instances).toHaveLength(1);
  });

  it("the stream computes the documented delay schedule", () => {
    const stream = new EventStream(
      "http://engine.test/v1/events",
      (url) => new FakeEventSource(url),
      () => {},
      () => {},
      { baseDelayMs: 500, maxDelayMs: 10_000 },
    );
    expect([0, 1, 2, 3, 4, 5, 6].map((n) => stream.delayFor(n))).toEqual([
      500, 1000, 2000, 4000, 8000, 10_000, 10_000,
    ]);
  });

  it("ignores malformed stream payloads", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    source.onmessage?.({ data: "not json{" });
    source.deliver({ type: "card", card: sampleCard("card-1") });
    expect(root.querySelectorAll("article")).toHaveLength(1);
  });
});
