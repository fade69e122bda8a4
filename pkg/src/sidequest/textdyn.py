"""Text dynamics: bigram similarity, reading-speed estimation, adaptive dwell threshold."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

__all__ = [
    "SimilarityReport",
    "jaccard",
    "ReadingSpeedEstimator",
    "adaptive_threshold",
]


@dataclass(frozen=True)
class SimilarityReport:
    value: float
    a_size: int
    b_size: int
    intersection: int
    union: int


def jaccard(a: frozenset[str] | set[str], b: frozenset[str] | set[str]) -> SimilarityReport:
    """Jaccard similarity of two bigram sets.  Two empty sets count as identical."""
    intersection = len(a & b)
    union = len(a | b)
    value = 1.0 if union == 0 else intersection / union
    return SimilarityReport(
        value=value,
        a_size=len(a),
        b_size=len(b),
        intersection=intersection,
        union=union,
    )


class ReadingSpeedEstimator:
    """Characters-per-second estimate from recent scroll observations.

    Each observation records how many new characters appeared by some
    timestamp.  The estimate is the ratio of characters observed after the
    window's first event to the elapsed time between first and last event
    (the least-squares slope through the origin of cumulative characters vs
    elapsed time), clamped to [min_speed, max_speed].  Fewer than three events
    fall back to the default.
    """

    def __init__(
        self,
        default_speed: float = 100.0,
        min_speed: float = 10.0,
        max_speed: float = 500.0,
        capacity: int = 20,
    ) -> None:
        if not (0 < min_speed <= default_speed <= max_speed):
            raise ValueError("require 0 < min_speed <= default_speed <= max_speed")
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.default_speed = default_speed
        self.min_speed = min_speed
        self.max_speed = max_speed
        self._events: deque[tuple[float, int]] = deque(maxlen=capacity)

    def observe(self, timestamp: float, new_chars: int) -> None:
        if new_chars < 0:
            raise ValueError("new_chars must be >= 0")
        if self._events and timestamp <= self._events[-1][0]:
            raise ValueError(
                f"scroll observation at {timestamp} is not after {self._events[-1][0]}"
            )
        self._events.append((timestamp, new_chars))

    def __len__(self) -> int:
        return len(self._events)

    def estimate(self) -> float:
        if len(self._events) < 3:
            return self.default_speed
        t_first = self._events[0][0]
        t_last = self._events[-1][0]
        span = t_last - t_first
        if span <= 0:  # degenerate window; cannot happen with monotone events
            return self.default_speed
        # The first event anchors the window: its characters appeared before
        # the measured interval, so they are excluded from the numerator.
        chars = sum(c for _, c in list(self._events)[1:])
        return min(max(chars / span, self.min_speed), self.max_speed)


def adaptive_threshold(
    char_count: int, speed: float, lo: float = 10.0, hi: float = 60.0
) -> float:
    """Dwell time (seconds) considered deliberate for a screen of given size.

    Expected reading time char_count/speed, clamped to [lo, hi].
    """
    if speed <= 0:
        raise ValueError("speed must be positive")
    if lo > hi:
        raise ValueError("lo must be <= hi")
    return max(lo, min(hi, char_count / speed))
