// Pure HTML-string renderers. Every visible string is escaped payload text;
// nothing is synthesized client-side.

import type {
  Card,
  CardQuestion,
  CardResult,
  MemoryEntry,
  StateSnapshot,
  TriggerKind,
} from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function badgeLabel(kind: TriggerKind): string {
  return kind === "content_revisit" ? "Clarify" : "Explore";
}

export function renderResult(result: CardResult): string {
  const title = escapeHtml(result.title ?? result.doc_id);
  const link = result.url
    ? `<a href="${escapeHtml(result.url)}" target="_blank" rel="noopener">${title}</a>`
    : title;
  const authors = result.authors.length > 0 ? escapeHtml(result.authors.join(", ")) : "";
  const year = result.year !== null ? `(${result.year})` : "";
  const meta = [authors, year].filter(Boolean).join(" ");
  const metaHtml = meta ? ` <span class="result-meta">${meta}</span>` : "";
  return `<li class="result" data-doc-id="${escapeHtml(result.doc_id)}">${link}${metaHtml}</li>`;
}

export function renderQuestion(question: CardQuestion): string {
  const results = question.results.map(renderResult).join("");
  const list = results ? `<ul class="results">${results}</ul>` : "";
  return (
    `<section class="question" data-intent="${question.intent}">` +
    `<p class="question-text">${escapeHtml(question.text)}</p>${list}</section>`
  );
}

export function renderCard(card: Card): string {
  const badge = badgeLabel(card.trigger.kind);
  const questions = card.questions.map(renderQuestion).join("");
  const disabled = card.status === "pending" ? "" : " disabled";
  return (
    `<article class="card card--${card.status}" data-card-id="${escapeHtml(card.card_id)}">` +
    `<header class="card-header">` +
    `<span class="badge badge--${card.trigger.kind}">${badge}</span>` +
    `<span class="card-time">t=${card.created_at.toFixed(1)}s</span>` +
    `<span class="status" data-role="status">${card.status}</span>` +
    `</header>` +
    `<div class="questions">${questions}</div>` +
    `<footer class="card-actions">` +
    `<button type="button" data-action="accepted"${disabled}>Accept</button>` +
    `<button type="button" data-action="dismissed"${disabled}>Dismiss</button>` +
    `</footer>` +
    `</article>`
  );
}

export function renderEmpty(): string {
  return `<p class="empty">No suggestions yet. Keep reading; cards appear here when the engine notices something worth chasing.</p>`;
}

function renderEntry(entry: MemoryEntry): string {
  return (
    `<li class="memory-entry" data-entry-id="${escapeHtml(entry.id)}">` +
    `<span class="memory-time">t=${entry.t.toFixed(1)}s</span> ` +
    `<span class="memory-text">${escapeHtml(entry.text)}</span></li>`
  );
}

export function renderMemory(state: StateSnapshot): string {
  // newest first in both stacks; the engine reports oldest first
  const sessions = [...state.session].reverse().map(renderEntry).join("");
  const locals = [...state.local].reverse().map(renderEntry).join("");
  const profile = state.profile
    ? `<p class="memory-profile">${escapeHtml(state.profile.text)}</p>`
    : `<p class="memory-profile memory-profile--empty">No profile yet.</p>`;
  return (
    `<div class="memory-view">` +
    `<h3>Profile</h3>${profile}` +
    `<h3>Sessions</h3><ul class="memory-list" data-role="sessions">${sessions}</ul>` +
    `<h3>Recent reading</h3><ul class="memory-list" data-role="locals">${locals}</ul>` +
    `</div>`
  );
}
