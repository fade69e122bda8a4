"""Reading-behavior triggers.

Two events drive the pipeline: SustainedAttention (the screen has stayed
similar to its anchor frame longer than an adaptive threshold) and
ContentRevisit (the user left some recent content and came back to it).
Detection is pure text dynamics -- no gaze, no DOM, no model calls.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .frames import TextFrame
from .textdyn import adaptive_threshold, jaccard

__all__ = [
    "TriggerKind",
    "TriggerEvent",
    "HistoryEntry",
    "FrameHistory",
    "TriggerDetector",
    "prune",
]


class TriggerKind(Enum):
    SUSTAINED_ATTENTION = "sustained_attention"
    CONTENT_REVISIT = "content_revisit"


@dataclass(frozen=True)
class TriggerEvent:
    kind: TriggerKind
    fired_at: float
    anchor_at: float  # start of the stable run, or the matched past frame
    similarity: float
    threshold_used: float | None  # sustained-attention only


@dataclass(frozen=True)
class HistoryEntry:
    timestamp: float
    bigrams: frozenset[str]
    char_count: int


class FrameHistory:
    """Rolling window of recent frames, bounded by a time horizon."""

    def __init__(self, horizon: float = 180.0):
        if horizon <= 0:
            raise ValueError("horizon must be positive")
        self.horizon = horizon
        self.entries: deque[HistoryEntry] = deque()

    def append(self, entry: HistoryEntry) -> None:
        self.entries.append(entry)

    def prune(self, now: float) -> None:
        cutoff = now - self.horizon
        while self.entries and self.entries[0].timestamp < cutoff:
            self.entries.popleft()

    def __len__(self) -> int:
        return len(self.entries)


def prune(history: FrameHistory, now: float) -> None:
    history.prune(now)


@dataclass
class TriggerDetector:
    """Per-frame trigger evaluation with anchor, history, and refractory state.

    ``on_scroll(timestamp, chars)`` is called whenever the anchor resets
    (content changed).  The reported characters are those accumulated since
    the previous reset, excluding the current frame's own delta -- new
    content that just appeared has not been read yet, so it seeds the next
    interval instead.
    """

    sustained_sim: float = 0.9
    revisit_sim: float = 0.8
    horizon: float = 180.0
    refractory: float = 120.0
    min_age: float = 20.0
    threshold_lo: float = 10.0
    threshold_hi: float = 60.0
    on_scroll: Callable[[float, int], None] | None = None

    history: FrameHistory = field(init=False)
    anchor_at: float | None = field(init=False, default=None)
    anchor_bigrams: frozenset[str] | None = field(init=False, default=None)
    fired_for_anchor: bool = field(init=False, default=False)
    last_fire_at: float | None = field(init=False, default=None)
    last_similarity: float = field(init=False, default=1.0)
    _pending_chars: int = field(init=False, default=0)

    def __post_init__(self) -> None:
        self.history = FrameHistory(self.horizon)

    def step(self, frame: TextFrame, speed: float, delta_chars: int = 0) -> TriggerEvent | None:
        now = frame.timestamp

        # (a) anchor maintenance
        if self.anchor_bigrams is None:
            similarity = 0.0
            boundary = True
        else:
            similarity = jaccard(frame.bigrams, self.anchor_bigrams).value
            boundary = similarity <= self.sustained_sim
        if boundary:
            if self.on_scroll is not None:
                self.on_scroll(now, self._pending_chars)
            self._pending_chars = delta_chars
            self.anchor_at = now
            self.anchor_bigrams = frame.bigrams
            self.fired_for_anchor = False
        else:
            self._pending_chars += delta_chars
        self.last_similarity = similarity

        refractory_ok = (
            self.last_fire_at is None or now - self.last_fire_at >= self.refractory
        )
        event: TriggerEvent | None = None

        # (b) sustained attention
        if (
            not boundary
            and not self.fired_for_anchor
            and refractory_ok
            and similarity > self.sustained_sim
        ):
            threshold = adaptive_threshold(
                frame.char_count, speed, self.threshold_lo, self.threshold_hi
            )
            assert self.anchor_at is not None
            if now - self.anchor_at > threshold:
                event = TriggerEvent(
                    TriggerKind.SUSTAINED_ATTENTION,
                    fired_at=now,
                    anchor_at=self.anchor_at,
                    similarity=similarity,
                    threshold_used=threshold,
                )
                self.fired_for_anchor = True

        # (c) content revisit: similar to a sufficiently old entry, with some
        # dissimilar content in between (the user left and returned)
        if event is None and refractory_ok:
            left_since = False
            for entry in reversed(self.history.entries):
                sim = jaccard(frame.bigrams, entry.bigrams).value
                if sim <= self.revisit_sim:
                    left_since = True
                    continue
                if entry.timestamp > now - self.min_age:
                    continue
                if entry.timestamp < now - self.horizon:
                    continue
                if left_since:
                    event = TriggerEvent(
                        TriggerKind.CONTENT_REVISIT,
                        fired_at=now,
                        anchor_at=entry.timestamp,
                        similarity=sim,
                        threshold_used=None,
                    )
                    break

        if event is not None:
            self.last_fire_at = now

        # (d) history update
        self.history.append(HistoryEntry(now, frame.bigrams, frame.char_count))
        self.history.prune(now)
        return event
