import { ApiClient, ApiError, type FetchLike } from "./api.js";
import { renderCard, renderEmpty, renderMemory } from "./render.js";
import { EventStream, type EventSourceFactory } from "./stream.js";
import type { Card, CardStatus, EngineEvent, FeedbackStatus } from "./types.js";

export interface OverlayOptions {
  engineUrl: string;
  root: HTMLElement;
  fetchFn: FetchLike;
  eventSourceFactory: EventSourceFactory;
  /** pending cards visually collapse (never delete) after this idle time */
  idleCollapseMs?: number;
  baseDelayMs?: number;
  maxDelayMs?: number;
}

const MAX_WARNINGS = 20;

export class OverlayApp {
  readonly api: ApiClient;
  private readonly stream: EventStream;
  private readonly doc: Document;
  private readonly known = new Set<string>();
  private readonly inFlight = new Set<string>();
  private readonly collapseTimers = new Map<string, ReturnType<typeof setTimeout>>();
  private readonly idleCollapseMs: number;

  private banner!: HTMLElement;
  private toastBox!: HTMLElement;
  private pinnedCards!: HTMLElement;
  private feedCards!: HTMLElement;
  private historyCards!: HTMLElement;
  private memoryView!: HTMLElement;
  private warningList!: HTMLElement;

  constructor(private readonly options: OverlayOptions) {
    this.doc = options.root.ownerDocument;
    this.api = new ApiClient(options.engineUrl, options.fetchFn);
    this.idleCollapseMs = options.idleCollapseMs ?? 120_000;
    this.stream = new EventStream(
      `${options.engineUrl}/v1/events`,
      options.eventSourceFactory,
      (payload) => this.handleEvent(payload as EngineEvent),
      (connected) => this.setConnected(connected),
      { baseDelayMs: options.baseDelayMs, maxDelayMs: options.maxDelayMs },
    );
    this.buildSkeleton();
  }

  /** render any cards the engine already holds, then go live */
  async start(): Promise<void> {
    try {
      const cards = await this.api.getSuggestions();
      // suggestions arrive newest first; insert oldest first so prepending
      // leaves the newest card on top
      for (const card of [...cards].reverse()) {
        this.addCard(card);
      }
    } catch {
      this.toast("could not load existing suggestions");
    }
    this.stream.connect();
  }

  stop(): void {
    this.stream.close();
    for (const timer of this.collapseTimers.values()) {
      clearTimeout(timer);
    }
    this.collapseTimers.clear();
  }

  // -- events ---------------------------------------------------------------

  private handleEvent(event: EngineEvent): void {
    if (event.type === "card") {
      this.addCard(event.card);
    } else if (event.type === "feedback") {
      this.applyStatus(event.card_id, event.status);
    } else if (event.type === "warning") {
      this.logWarning(event.t, event.message);
    }
  }

  private addCard(card: Card): void {
    if (this.known.has(card.card_id)) {
      return; // replayed delivery (e.g. across a reconnect): render once
    }
    this.known.add(card.card_id);
    const template = this.doc.createElement("template");
    template.innerHTML = renderCard(card).trim();
    const node = template.content.firstElementChild as HTMLElement;
    this.containerFor(card.status).prepend(node);
    if (card.status === "pending") {
      this.scheduleCollapse(card.card_id, node);
    }
    this.updateEmptyState();
  }

  private applyStatus(cardId: string, status: FeedbackStatus): void {
    const node = this.options.root.querySelector<HTMLElement>(
      `article[data-card-id="${cardId}"]`,
    );
    if (node === null || node.classList.contains(`card--${status}`)) {
      return;
    }
    node.classList.remove("card--pending", "card--accepted", "card--dismissed", "card--idle");
    node.classList.add(`card--${status}`);
    const statusEl = node.querySelector<HTMLElement>('[data-role="status"]');
    if (statusEl) {
      statusEl.textContent = status;
    }
    for (const button of node.querySelectorAll("button[data-action]")) {
      (button as HTMLButtonElement).disabled = true;
    }
    const timer = this.collapseTimers.get(cardId);
    if (timer !== undefined) {
      clearTimeout(timer);
      this.collapseTimers.delete(cardId);
    }
    this.containerFor(status).prepend(node);
    this.updateEmptyState();
  }

  // -- feedback -------------------------------------------------------------

  private async submitFeedback(cardId: string, status: FeedbackStatus): Promise<void> {
    if (this.inFlight.has(cardId)) {
      return; // one request per card at a time
    }
    this.inFlight.add(cardId);
    this.setButtonsDisabled(cardId, true);
    try {
      const ack = await this.api.sendFeedback(cardId, status);
      this.applyStatus(ack.card_id, ack.status);
    } catch (error) {
      this.setButtonsDisabled(cardId, false); // state unchanged on rejection
      this.toast(
        error instanceof ApiError
          ? `feedback rejected: ${error.message}`
          : "feedback failed: engine unreachable",
      );
    } finally {
      this.inFlight.delete(cardId);
    }
  }

  private setButtonsDisabled(cardId: string, disabled: boolean): void {
    const node = this.options.root.querySelector(`article[data-card-id="${cardId}"]`);
    if (node === null) {
      return;
    }
    for (const button of node.querySelectorAll("button[data-action]")) {
      (button as HTMLButtonElement).disabled = disabled;
    }
  }

  // -- memory inspector -----------------------------------------------------

  async refreshMemory(): Promise<void> {
    try {
      const state = await this.api.getState();
      this.memoryView.innerHTML = renderMemory(state);
    } catch {
      this.toast("could not load memory state");
    }
  }

  // -- plumbing -------------------------------------------------------------

  private containerFor(status: CardStatus): HTMLElement {
    if (status === "accepted") {
      return this.pinnedCards;
    }
    if (status === "dismissed") {
      return this.historyCards;
    }
    return this.feedCards;
  }

  private scheduleCollapse(cardId: string, node: HTMLElement): void {
    const timer = setTimeout(() => {
      node.classList.add("card--idle");
      this.collapseTimers.delete(cardId);
    }, this.idleCollapseMs);
    this.collapseTimers.set(cardId, timer);
  }

  private updateEmptyState(): void {
    const hasCards = this.feedCards.querySelector("article") !== null;
    const placeholder = this.feedCards.querySelector(".empty");
    if (hasCards && placeholder) {
      placeholder.remove();
    } else if (!hasCards && !placeholder) {
      const template = this.doc.createElement("template");
      template.innerHTML = renderEmpty();
      this.feedCards.append(template.content);
    }
  }

  private setConnected(connected: boolean): void {
    this.banner.hidden = connected;
    if (!connected) {
      this.banner.textContent = "Engine disconnected. Retrying…";
    }
  }

  private toast(message: string): void {
    this.toastBox.textContent = message;
    this.toastBox.hidden = false;
    setTimeout(() => {
      this.toastBox.hidden = true;
    }, 4000);
  }

  private logWarning(t: number, message: string): void {
    const item = this.doc.createElement("li");
    item.textContent = `t=${t.toFixed(1)}s ${message}`;
    this.warningList.prepend(item);
    while (this.warningList.children.length > MAX_WARNINGS) {
      this.warningList.lastElementChild?.remove();
    }
  }

  private buildSkeleton(): void {
    const root = this.options.root;
    root.classList.add("overlay");
    root.innerHTML =
      `<div class="banner" data-role="banner">Connecting to engine…</div>` +
      `<div class="toast" data-role="toast" hidden></div>` +
      `<section class="pinned"><h2>Pinned</h2><div class="cards" data-role="pinned"></div></section>` +
      `<section class="feed"><h2>Suggestions</h2><div class="cards" data-role="feed"></div></section>` +
      `<section class="history"><h2>History</h2><div class="cards" data-role="history"></div></section>` +
      `<section class="memory"><h2>Memory</h2>` +
      `<button type="button" data-action="refresh-memory">Refresh</button>` +
      `<div data-role="memory-view"></div>` +
      `<ul class="warnings" data-role="warnings"></ul></section>`;
    this.banner = root.querySelector<HTMLElement>('[data-role="banner"]')!;
    this.toastBox = root.querySelector<HTMLElement>('[data-role="toast"]')!;
    this.pinnedCards = root.querySelector<HTMLElement>('[data-role="pinned"]')!;
    this.feedCards = root.querySelector<HTMLElement>('[data-role="feed"]')!;
    this.historyCards = root.querySelector<HTMLElement>('[data-role="history"]')!;
    this.memoryView = root.querySelector<HTMLElement>('[data-role="memory-view"]')!;
    this.warningList = root.querySelector<HTMLElement>('[data-role="warnings"]')!;
    this.updateEmptyState();

    root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement | null;
      const button = target?.closest<HTMLButtonElement>("button[data-action]");
      if (!button || button.disabled) {
        return;
      }
      const action = button.dataset.action;
      if (action === "refresh-memory") {
        void this.refreshMemory();
        return;
      }
      if (action !== "accepted" && action !== "dismissed") {
        return;
      }
      const article = button.closest<HTMLElement>("article[data-card-id]");
      const cardId = article?.dataset.cardId;
      if (cardId) {
        void this.submitFeedback(cardId, action);
      }
    });
  }
}
