// Renderer units: badge vocabulary, escaping, fallbacks, memory ordering.

import { describe, expect, it } from "vitest";

import { badgeLabel, renderCard, renderMemory, renderResult } from "../src/render.js";
import type { CardResult, StateSnapshot } from "../src/types.js";
import { sampleCard } from "./helpers.js";

const bareResult: CardResult = {
  doc_id: "p07",
  score: 0.5,
  rank: 1,
  title: null,
  authors: [],
  year: null,
  url: null,
};

describe("renderers", () => {
  it("maps trigger kinds to badge labels", () => {
    expect(badgeLabel("sustained_attention")).toBe("Explore");
    expect(badgeLabel("content_revisit")).toBe("Clarify");
  });

  it("escapes angle brackets and quotes in payload text", () => {
    const card = sampleCard("card-1");
    card.questions[0]!.text = `<script>alert("x")</script>`;
    const html = renderCard(card);
    expect(html).not.toContain("<script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("falls back to the doc id when metadata is missing", () => {
    const html = renderResult(bareResult);
    expect(html).toContain("p07");
    expect(html).not.toContain("<a ");
    expect(html).not.toContain("null");
  });

  it("links titles in a new browsing context", () => {
    const html = renderResult({
      ...bareResult,
      title: "A Paper",
      url: "https://example.org/a",
    });
    expect(html).toContain('target="_blank"');
    expect(html).toContain('rel="noopener"');
  });

  it("disables action buttons on decided cards", () => {
    expect(renderCard(sampleCard("c", { status: "accepted" }))).toContain("disabled");
    expect(renderCard(sampleCard("c"))).not.toContain("disabled");
  });

  it("shows memory stacks newest first", () => {
    const state: StateSnapshot = {
      frame_count: 4,
      buffer_chars: 120,
      profile: { id: "profile-1", layer: "profile", t: 600, text: "likes caching", sources: [] },
      session: [
        { id: "session-1", layer: "session", t: 300, text: "older session", sources: [] },
        { id: "session-2", layer: "session", t: 600, text: "newer session", sources: [] },
      ],
      local: [
        { id: "local-1", layer: "local", t: 200, text: "older local", sources: [] },
        { id: "local-2", layer: "local", t: 400, text: "newer local", sources: [] },
      ],
      card_count: 0,
    };
    const html = renderMemory(state);
    expect(html).toContain("likes caching");
    expect(html.indexOf("newer session")).toBeLessThan(html.indexOf("older session"));
    expect(html.indexOf("newer local")).toBeLessThan(html.indexOf("older local"));
  });
});
