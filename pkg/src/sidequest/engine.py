"""The end-to-end pipeline: frames in, suggestion cards out.

Each tick runs delta extraction, memory maintenance, and trigger detection
in logical time (the frame's own timestamp drives every period).  When a
trigger fires, card production -- context assembly, question generation,
literature search -- runs either inline (replay) or on a single background
worker (serve), with at most one card in flight; triggers arriving while a
card is being produced are dropped, not queued.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .adapters import (
    AdapterError,
    AuditLog,
    Embedder,
    HashingEmbedder,
    IdentityLlmStub,
    LlmAdapter,
    TemplateLlmStub,
)
from .config import EngineConfig
from .frames import FrameIngester, LineDelta, TextFrame, extract_delta
from .memory import HierarchicalMemory, JournalWriter, MemoryConfig
from .qgen import GeneratedQuestion, assemble_context, generate_questions
from .retrieval import MetadataStore, SearchResult, VectorIndex, embed_query
from .textdyn import ReadingSpeedEstimator
from .triggers import TriggerDetector, TriggerEvent, TriggerKind

__all__ = [
    "CardStatus",
    "StageTimings",
    "CardQuestion",
    "SuggestionCard",
    "Engine",
    "FeedbackError",
    "card_to_dict",
    "event_to_dict",
]

log = logging.getLogger(__name__)


class CardStatus(Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    DISMISSED = "dismissed"


class FeedbackError(ValueError):
    """Feedback for an unknown card or an already-decided one."""

    def __init__(self, message: str, unknown: bool = False):
        super().__init__(message)
        self.unknown = unknown


@dataclass(frozen=True)
class StageTimings:
    sensing_memory: float
    question_gen: float
    search: float
    total: float


@dataclass(frozen=True)
class CardQuestion:
    question: GeneratedQuestion
    results: tuple[SearchResult, ...]


@dataclass
class SuggestionCard:
    card_id: str
    trigger: TriggerEvent
    questions: tuple[CardQuestion, ...]
    created_at: float
    timings: StageTimings
    status: CardStatus = CardStatus.PENDING


@dataclass
class TickDiagnostics:
    """Per-frame numbers worth plotting: similarity, speed, trigger marks."""

    timestamp: float
    similarity: float
    speed: float
    anchor_at: float | None
    event_kind: str | None
    buffer_chars: int


def _build_llm(config: EngineConfig, audit: AuditLog | None) -> LlmAdapter:
    if config.llm_adapter == "identity":
        return IdentityLlmStub(audit=audit, timeout=config.adapter_timeout)
    return TemplateLlmStub(audit=audit, timeout=config.adapter_timeout)


class Engine:
    def __init__(
        self,
        config: EngineConfig,
        llm: LlmAdapter | None = None,
        embedder: Embedder | None = None,
        index: VectorIndex | None = None,
        metadata: MetadataStore | None = None,
        journal: JournalWriter | None = None,
        audit: AuditLog | None = None,
        async_cards: bool = False,
    ):
        self.config = config
        self.audit = audit
        self.llm = llm if llm is not None else _build_llm(config, audit)
        self.embedder = (
            embedder
            if embedder is not None
            else HashingEmbedder(config.embed_dimension, audit=audit)
        )
        self.index = index
        self.metadata = metadata
        if journal is None and config.journal_path:
            journal = JournalWriter(config.journal_path)
        self.memory = HierarchicalMemory(
            MemoryConfig(
                flush_threshold=config.flush_threshold,
                session_period=config.session_period,
                k_local=config.k_local,
                k_session=config.k_session,
            ),
            self.llm,
            self.embedder,
            journal=journal,
        )
        if config.profile_seed:
            self.memory.seed_profile(config.profile_seed)
        self.estimator = ReadingSpeedEstimator(
            default_speed=config.default_speed,
            min_speed=config.min_speed,
            max_speed=config.max_speed,
            capacity=config.speed_window,
        )
        self.detector = TriggerDetector(
            sustained_sim=config.sustained_sim,
            revisit_sim=config.revisit_sim,
            horizon=config.history_horizon,
            refractory=config.refractory,
            min_age=config.min_age,
            threshold_lo=config.threshold_min,
            threshold_hi=config.threshold_max,
            on_scroll=self.estimator.observe,
        )
        self.ingester = FrameIngester()
        self.cards: list[SuggestionCard] = []
        self.events: list[TriggerEvent] = []
        self.warnings: list[dict] = []
        self.listeners: list[Callable[[dict], None]] = []
        self.diagnostics_listener: Callable[[TickDiagnostics], None] | None = None
        self.feedback_log_path: str | None = None
        self._prev_frame: TextFrame | None = None
        self._frame_count = 0
        self._card_seq = 0
        self._async_cards = async_cards
        self._card_lock = threading.Lock()
        self._card_in_flight = False

    # -- frame path ---------------------------------------------------------

    def ingest(self, raw_text: str, timestamp: float) -> SuggestionCard | None:
        """Normalize and process one raw capture. Raises SequencingError if stale."""
        return self.tick(self.ingester.ingest(raw_text, timestamp))

    def tick(self, frame: TextFrame) -> SuggestionCard | None:
        started = time.perf_counter()
        delta = extract_delta(self._prev_frame, frame)
        self._prev_frame = frame
        self._frame_count += 1

        try:
            self.memory.append_delta(delta)
        except AdapterError as exc:
            self._warn(frame.timestamp, f"local summary failed: {exc}")
        try:
            session_entry = self.memory.synthesize_session(frame.timestamp)
        except AdapterError as exc:
            session_entry = None
            self._warn(frame.timestamp, f"session synthesis failed: {exc}")
        if session_entry is not None:
            try:
                self.memory.update_profile(frame.timestamp)
            except AdapterError as exc:
                self._warn(frame.timestamp, f"profile update failed: {exc}")

        speed = self.estimator.estimate()
        event = self.detector.step(frame, speed, delta.char_count)
        sensing_elapsed = time.perf_counter() - started

        if self.diagnostics_listener is not None:
            self.diagnostics_listener(
                TickDiagnostics(
                    timestamp=frame.timestamp,
                    similarity=self.detector.last_similarity,
                    speed=speed,
                    anchor_at=self.detector.anchor_at,
                    event_kind=event.kind.value if event else None,
                    buffer_chars=self.memory.buffer_chars,
                )
            )
        if event is None:
            return None
        self.events.append(event)
        if not self._async_cards:
            return self._produce_card(event, frame, sensing_elapsed)
        with self._card_lock:
            if self._card_in_flight:  # single card in flight; drop, don't queue
                self._warn(frame.timestamp, "trigger dropped: card already in flight")
                return None
            self._card_in_flight = True
        threading.Thread(
            target=self._produce_card_async,
            args=(event, frame, sensing_elapsed),
            daemon=True,
        ).start()
        return None

    def _produce_card_async(
        self, event: TriggerEvent, frame: TextFrame, sensing_elapsed: float
    ) -> None:
        try:
            self._produce_card(event, frame, sensing_elapsed)
        finally:
            with self._card_lock:
                self._card_in_flight = False

    def _produce_card(
        self, event: TriggerEvent, frame: TextFrame, sensing_elapsed: float
    ) -> SuggestionCard | None:
        produce_start = time.perf_counter()
        try:
            ctx = assemble_context(
                frame,
                self.memory,
                event.kind,
                self.embedder,
                per_layer=self.config.context_per_layer,
                screen_cap=self.config.screen_text_cap,
            )
            questions = generate_questions(
                ctx, self.llm, n=self.config.questions_per_trigger
            )
            qgen_elapsed = time.perf_counter() - produce_start
            if not questions:
                self._warn(frame.timestamp, "card suppressed: no questions generated")
                return None
            search_start = time.perf_counter()
            card_questions = []
            for q in questions:
                results: tuple[SearchResult, ...] = ()
                if self.index is not None:
                    hits = self.index.search(
                        embed_query(q.text, self.embedder),
                        self.config.results_per_question,
                        self.metadata,
                    )
                    results = tuple(hits)
                card_questions.append(CardQuestion(question=q, results=results))
            search_elapsed = time.perf_counter() - search_start
        except (AdapterError, ValueError) as exc:
            self._warn(frame.timestamp, f"card suppressed: {exc}")
            return None
        total = sensing_elapsed + (time.perf_counter() - produce_start)
        self._card_seq += 1
        card = SuggestionCard(
            card_id=f"card-{self._card_seq}",
            trigger=event,
            questions=tuple(card_questions),
            created_at=frame.timestamp,
            timings=StageTimings(
                sensing_memory=sensing_elapsed,
                question_gen=qgen_elapsed,
                search=search_elapsed,
                total=total,
            ),
        )
        self.cards.append(card)
        self._emit({"type": "card", "card": card_to_dict(card)})
        return card

    # -- feedback and state -------------------------------------------------

    def feedback(self, card_id: str, status: str) -> SuggestionCard:
        if status not in (CardStatus.ACCEPTED.value, CardStatus.DISMISSED.value):
            raise ValueError(f"status must be 'accepted' or 'dismissed', got {status!r}")
        card = next((c for c in self.cards if c.card_id == card_id), None)
        if card is None:
            raise FeedbackError(f"unknown card {card_id!r}", unknown=True)
        if card.status is not CardStatus.PENDING:
            raise FeedbackError(
                f"card {card_id} already {card.status.value}; feedback is final"
            )
        card.status = CardStatus(status)
        if self.feedback_log_path:
            with open(self.feedback_log_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({"card_id": card_id, "status": status}) + "\n")
                fh.flush()
        self._emit({"type": "feedback", "card_id": card_id, "status": status})
        return card

    def snapshot_state(self) -> dict:
        mem = self.memory
        return {
            "frame_count": self._frame_count,
            "buffer_chars": mem.buffer_chars,
            "profile": _entry_to_dict(mem.profile) if mem.profile else None,
            "session": [_entry_to_dict(e) for e in mem.session_entries],
            "local": [_entry_to_dict(e) for e in mem.local_entries],
            "card_count": len(self.cards),
        }

    # -- events -------------------------------------------------------------

    def _warn(self, timestamp: float, message: str) -> None:
        log.warning("[t=%.1f] %s", timestamp, message)
        record = {"type": "warning", "t": timestamp, "message": message}
        self.warnings.append(record)
        self._emit(record)

    def _emit(self, payload: dict) -> None:
        for listener in list(self.listeners):
            try:
                listener(payload)
            except Exception:  # a bad listener must not take down the pipeline
                log.exception("event listener failed")


def _entry_to_dict(entry) -> dict:
    return {
        "id": entry.entry_id,
        "layer": entry.layer,
        "t": entry.created_at,
        "text": entry.text,
        "sources": list(entry.source_ids),
    }


def _result_to_dict(result: SearchResult) -> dict:
    doc = result.metadata
    return {
        "doc_id": result.doc_id,
        "score": result.score,
        "rank": result.rank,
        "title": doc.title if doc else None,
        "authors": list(doc.authors) if doc else [],
        "year": doc.year if doc else None,
        "url": doc.url if doc else None,
    }


def event_to_dict(event: TriggerEvent) -> dict:
    return {
        "kind": event.kind.value,
        "fired_at": event.fired_at,
        "anchor_at": event.anchor_at,
        "similarity": event.similarity,
        "threshold_used": event.threshold_used,
    }


def card_to_dict(card: SuggestionCard, include_timings: bool = False) -> dict:
    out = {
        "card_id": card.card_id,
        "created_at": card.created_at,
        "status": card.status.value,
        "trigger": event_to_dict(card.trigger),
        "questions": [
            {
                "text": cq.question.text,
                "intent": cq.question.intent.value,
                "rank": cq.question.rank,
                "results": [_result_to_dict(r) for r in cq.results],
            }
            for cq in card.questions
        ],
    }
    if include_timings:
        out["timings"] = {
            "sensing_memory": card.timings.sensing_memory,
            "question_gen": card.timings.question_gen,
            "search": card.timings.search,
            "total": card.timings.total,
        }
    return out
