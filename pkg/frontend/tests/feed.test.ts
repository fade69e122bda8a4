// Live feed behavior: cards arrive over the event stream, render fully, and
// accept/dismiss round-trips through the feedback endpoint.

import { afterEach, beforeEach, describe, expect, it } from "vitest";

import { buildApp, flush, sampleCard, FakeEventSource } from "./helpers.js";

beforeEach(() => {
  FakeEventSource.reset();
});

afterEach(() => {
  document.body.innerHTML = "";
});

describe("live feed", () => {
  it("shows an empty state before any cards arrive", async () => {
    const { root } = await buildApp();
    expect(root.querySelector('[data-role="feed"] .empty')).not.toBeNull();
  });

  it("renders a delivered card immediately with badge, questions, and results", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });

    // no awaiting: rendering happens within the delivery itself
    const card = root.querySelector('article[data-card-id="card-1"]');
    expect(card).not.toBeNull();
    expect(root.querySelector('[data-role="feed"] article[data-card-id="card-1"]')).not.toBeNull();
    expect(card!.querySelector(".badge")!.textContent).toBe("Explore");

    const questions = card!.querySelectorAll(".question");
    expect(questions).toHaveLength(3);
    for (const question of questions) {
      const results = question.querySelectorAll(".result");
      expect(results.length).toBeLessThanOrEqual(3);
      expect(results.length).toBeGreaterThan(0);
    }
    const link = card!.querySelector<HTMLAnchorElement>(".result a")!;
    expect(link.getAttribute("href")).toBe("https://example.org/p11");
    expect(link.getAttribute("target")).toBe("_blank");
    expect(link.getAttribute("rel")).toBe("noopener");
    expect(link.textContent).toBe("Paper 1.1");
    expect(card!.querySelector('[data-role="status"]')!.textContent).toBe("pending");
    expect(root.querySelector('[data-role="feed"] .empty')).toBeNull();
  });

  it("renders a clarify badge for revisit triggers", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    const card = sampleCard("card-1");
    card.trigger = { ...card.trigger, kind: "content_revisit" };
    source.deliver({ type: "card", card });
    expect(root.querySelector(".badge")!.textContent).toBe("Clarify");
  });

  it("puts the newest card on top", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });
    source.deliver({ type: "card", card: sampleCard("card-2") });
    const feed = root.querySelector('[data-role="feed"]')!;
    expect(feed.firstElementChild!.getAttribute("data-card-id")).toBe("card-2");
  });

  it("dismiss posts feedback and moves the card to history", async () => {
    const { root, backend } = await buildApp();
    backend.on("POST /v1/feedback", (request) => ({
      status: 200,
      body: { card_id: (request.body as { card_id: string }).card_id, status: "dismissed" },
    }));
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });

    root
      .querySelector<HTMLButtonElement>('article[data-card-id="card-1"] button[data-action="dismissed"]')!
      .click();
    await flush();

    const feedback = backend.requests.find((r) => r.url.endsWith("/v1/feedback"));
    expect(feedback).toBeDefined();
    expect(feedback!.method).toBe("POST");
    expect(feedback!.body).toEqual({ card_id: "card-1", status: "dismissed" });

    const card = root.querySelector('article[data-card-id="card-1"]')!;
    expect(card.classList.contains("card--dismissed")).toBe(true);
    expect(card.querySelector('[data-role="status"]')!.textContent).toBe("dismissed");
    expect(root.querySelector('[data-role="history"] article[data-card-id="card-1"]')).not.toBeNull();
    for (const button of card.querySelectorAll<HTMLButtonElement>("button[data-action]")) {
      expect(button.disabled).toBe(true);
    }
  });

  it("a reload renders the dismissed card in history, mirroring the engine", async () => {
    // what GET /v1/suggestions reports after the round trip is what a fresh
    // panel shows: status is engine-owned
    const dismissed = sampleCard("card-1", { status: "dismissed" });
    const { root } = await buildApp({ suggestions: [dismissed] });
    expect(root.querySelector('[data-role="history"] article[data-card-id="card-1"]')).not.toBeNull();
    expect(root.querySelector('[data-role="feed"] article')).toBeNull();
  });

  it("accept pins the card", async () => {
    const { root, backend } = await buildApp();
    backend.on("POST /v1/feedback", () => ({
      status: 200,
      body: { card_id: "card-1", status: "accepted" },
    }));
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });

    root
      .querySelector<HTMLButtonElement>('button[data-action="accepted"]')!
      .click();
    await flush();

    const card = root.querySelector('article[data-card-id="card-1"]')!;
    expect(card.classList.contains("card--accepted")).toBe(true);
    expect(root.querySelector('[data-role="pinned"] article[data-card-id="card-1"]')).not.toBeNull();
  });

  it("rejected feedback shows a toast and leaves the card untouched", async () => {
    const { root, backend } = await buildApp();
    backend.on("POST /v1/feedback", () => ({
      status: 404,
      body: { detail: "unknown card some-old-card" },
    }));
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });

    root.querySelector<HTMLButtonElement>('button[data-action="dismissed"]')!.click();
    await flush();

    const toast = root.querySelector<HTMLElement>('[data-role="toast"]')!;
    expect(toast.hidden).toBe(false);
    expect(toast.textContent).toContain("unknown card");
    const card = root.querySelector('article[data-card-id="card-1"]')!;
    expect(card.classList.contains("card--pending")).toBe(true);
    expect(root.querySelector('[data-role="feed"] article[data-card-id="card-1"]')).not.toBeNull();
    for (const button of card.querySelectorAll<HTMLButtonElement>("button[data-action]")) {
      expect(button.disabled).toBe(false); // usable again
    }
  });

  it("applies feedback events announced by the stream", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    source.deliver({ type: "card", card: sampleCard("card-1") });
    source.deliver({ type: "feedback", card_id: "card-1", status: "accepted" });
    expect(root.querySelector('[data-role="pinned"] article[data-card-id="card-1"]')).not.toBeNull();
  });

  it("escapes payload text instead of interpreting it", async () => {
    const { root } = await buildApp();
    const source = FakeEventSource.latest();
    source.open();
    const card = sampleCard("card-1");
    card.questions[0]!.text = '<img src=x onerror="boom()"> question';
    source.deliver({ type: "card", card });
    expect(root.querySelector("img")).toBeNull();
    expect(root.querySelector(".question-text")!.textContent).toContain("<img");
  });
});
