"""Screen-text frames: normalization, bigram fingerprints, line deltas, redaction.

Everything downstream (memory, triggers, question generation) consumes the
frame types defined here, never raw capture text.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

__all__ = [
    "TextFrame",
    "LineDelta",
    "FrameIngester",
    "SequencingError",
    "build_frame",
    "extract_delta",
    "normalize_lines",
    "bigrams_of",
    "sanitize",
    "contains_redactable",
]


class SequencingError(ValueError):
    """A frame (or any timestamped observation) arrived out of order."""


def normalize_lines(raw: str) -> list[str]:
    """Split raw capture text into normalized lines.

    Runs of spaces/tabs collapse to a single space, line edges are stripped,
    and blank lines are dropped.  Normalization is idempotent.
    """
    out = []
    for line in raw.replace("\r\n", "\n").replace("\r", "\n").split("\n"):
        line = re.sub(r"[ \t]+", " ", line).strip()
        if line:
            out.append(line)
    return out


def bigrams_of(text: str) -> frozenset[str]:
    """Set of contiguous two-character substrings of ``text``.

    Bigrams that would span a line boundary (i.e. contain a newline) are
    excluded, so a frame's bigram set is the union of its lines' bigrams.
    """
    return frozenset(
        text[i : i + 2] for i in range(len(text) - 1) if "\n" not in text[i : i + 2]
    )


@dataclass(frozen=True)
class TextFrame:
    """One normalized snapshot of on-screen text at a point in time."""

    timestamp: float  # seconds since session start
    text: str  # lines joined with single newlines
    lines: tuple[str, ...]
    bigrams: frozenset[str]
    char_count: int  # len(text), i.e. after whitespace normalization


def build_frame(raw_text: str, timestamp: float) -> TextFrame:
    lines = normalize_lines(raw_text)
    text = "\n".join(lines)
    return TextFrame(
        timestamp=timestamp,
        text=text,
        lines=tuple(lines),
        bigrams=bigrams_of(text),
        char_count=len(text),
    )


class FrameIngester:
    """Session-scoped frame factory enforcing strictly increasing timestamps."""

    def __init__(self) -> None:
        self._last: float | None = None

    def ingest(self, raw_text: str, timestamp: float) -> TextFrame:
        if self._last is not None and timestamp <= self._last:
            raise SequencingError(
                f"frame timestamp {timestamp} is not after previous {self._last}"
            )
        self._last = timestamp
        return build_frame(raw_text, timestamp)


@dataclass(frozen=True)
class LineDelta:
    """Lines of the current frame that were not on screen in the previous one."""

    timestamp: float
    new_lines: tuple[str, ...]
    char_count: int  # sum of new-line lengths, separators excluded


def extract_delta(prev: TextFrame | None, curr: TextFrame) -> LineDelta:
    """Multiset line difference, preserving the current frame's order.

    A line occurring twice in ``curr`` but once in ``prev`` counts as new
    once.  ``prev=None`` means a cold start: every line is new.
    """
    remaining = Counter(prev.lines) if prev is not None else Counter()
    new_lines = []
    for line in curr.lines:
        if remaining[line] > 0:
            remaining[line] -= 1
        else:
            new_lines.append(line)
    return LineDelta(
        timestamp=curr.timestamp,
        new_lines=tuple(new_lines),
        char_count=sum(len(line) for line in new_lines),
    )


# Redaction: heuristic, deliberately replaceable.  Order matters -- URLs can
# contain emails and digits, emails contain digits, so broader patterns run
# first and the digit sweep runs last.
_URL_RE = re.compile(r"(?:[a-z][a-z0-9+.\-]*://\S+|www\.\S+)", re.IGNORECASE)
_EMAIL_RE = re.compile(r"[A-Za-z0-9._%+\-]+@[A-Za-z0-9.\-]+\.[A-Za-z]{2,}")
# Two or more capitalized words separated by single spaces, required to be
# whole tokens so replacement placeholders never re-trigger a match.
_NAME_RE = re.compile(r"(?<![A-Za-z0-9⟩])[A-Z][a-z]+(?: [A-Z][a-z]+)+(?![A-Za-z0-9⟨])")
_DIGITS_RE = re.compile(r"[0-9]+")


def sanitize(text: str) -> str:
    """Replace URLs, emails, likely person names, and digit runs with placeholders.

    Idempotent: sanitize(sanitize(x)) == sanitize(x).  All other characters
    are preserved.
    """
    text = _URL_RE.sub("⟨URL⟩", text)
    text = _EMAIL_RE.sub("⟨EMAIL⟩", text)
    text = _NAME_RE.sub("⟨NAME⟩", text)
    text = _DIGITS_RE.sub("⟨NUM⟩", text)
    return text


def contains_redactable(text: str) -> bool:
    """True if the URL, email, or digit-run patterns still match ``text``."""
    return bool(
        _URL_RE.search(text) or _EMAIL_RE.search(text) or _DIGITS_RE.search(text)
    )
