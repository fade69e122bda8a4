"""Model adapters: completion and embedding contracts plus deterministic offline stubs.

The pipeline only ever talks to these interfaces.  The stubs below are pure
functions of their inputs, which keeps every test and replay reproducible
without model weights.  Real backends (a llama.cpp server, a sentence
encoder) implement the same two methods and drop in via configuration.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Protocol, Sequence

import numpy as np

__all__ = [
    "PromptKind",
    "AdapterError",
    "AdapterCallRecord",
    "AuditLog",
    "LlmAdapter",
    "Embedder",
    "IdentityLlmStub",
    "TemplateLlmStub",
    "HashingEmbedder",
    "CLARIFY_MARKER",
    "top_keywords",
]

DEFAULT_TIMEOUT = 30.0  # seconds per adapter call; local stubs never hit it


class PromptKind(Enum):
    SUMMARIZE = "summarize"
    INTEGRATE = "integrate"
    UPDATE_PROFILE = "update_profile"
    ASK_EXPLORE = "ask_explore"
    ASK_CLARIFY = "ask_clarify"


class AdapterError(RuntimeError):
    """A completion or embedding backend failed or violated its contract."""


@dataclass(frozen=True)
class AdapterCallRecord:
    kind: PromptKind
    inputs: tuple[str, ...]
    output: str
    elapsed: float


@dataclass
class AuditLog:
    """Optional side-channel recording every adapter call the pipeline makes."""

    llm_calls: list[AdapterCallRecord] = field(default_factory=list)
    embed_calls: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.llm_calls) + len(self.embed_calls)


class LlmAdapter(Protocol):
    def complete(self, kind: PromptKind, inputs: Sequence[str]) -> str: ...


class Embedder(Protocol):
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...


def _check_inputs(inputs: Sequence[str]) -> None:
    if not inputs:
        raise AdapterError("completion called with no inputs")


class IdentityLlmStub:
    """Extractive stub: outputs are truncations/joins of the inputs.

    Summaries are a deterministic function of their sources, so memory
    provenance stays auditable end to end.
    """

    def __init__(self, audit: AuditLog | None = None, timeout: float = DEFAULT_TIMEOUT):
        self.audit = audit
        self.timeout = timeout

    def complete(self, kind: PromptKind, inputs: Sequence[str]) -> str:
        _check_inputs(inputs)
        started = time.perf_counter()
        if kind is PromptKind.SUMMARIZE:
            out = inputs[0][:200]
        elif kind in (PromptKind.INTEGRATE, PromptKind.UPDATE_PROFILE):
            out = " | ".join(inputs)[:400]
        elif kind is PromptKind.ASK_EXPLORE:
            out = f"What should I read next about: {_head(inputs[-1])}?"
        else:  # ASK_CLARIFY
            out = f"{CLARIFY_MARKER} what does this mean: {_head(inputs[-1])}?"
        if self.audit is not None:
            self.audit.llm_calls.append(
                AdapterCallRecord(kind, tuple(inputs), out, time.perf_counter() - started)
            )
        return out


def _head(text: str, limit: int = 60) -> str:
    return " ".join(text[:limit].split())


CLARIFY_MARKER = "Clarify:"

# Tokens too common to be informative as question keywords.
_STOPWORDS = frozenset(
    """a an the and or of in on for to is are was were be been with as by at
    from it its this that these those we our their they you your not into
    over under about between during than then there here when what which who
    how why can could should would may might will has have had do does did
    also such more most some any each per via using used new""".split()
)


def top_keywords(text: str, k: int = 3) -> list[str]:
    """Highest-frequency non-stopword alphabetic tokens, ties alphabetical."""
    counts: dict[str, int] = {}
    for token in re.findall(r"[a-z]+", text.lower()):
        if len(token) > 2 and token not in _STOPWORDS:
            counts[token] = counts.get(token, 0) + 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return [token for token, _ in ranked[:k]]


class TemplateLlmStub(IdentityLlmStub):
    """Keyword-echo stub: questions echo the top profile and on-screen keywords.

    Question kinds expect the first input to be the profile text (possibly
    empty) and the last input to be the on-screen text; memory kinds behave
    like the identity stub.
    """

    def complete(self, kind: PromptKind, inputs: Sequence[str]) -> str:
        if kind not in (PromptKind.ASK_EXPLORE, PromptKind.ASK_CLARIFY):
            return super().complete(kind, inputs)
        _check_inputs(inputs)
        started = time.perf_counter()
        profile_kw = (top_keywords(inputs[0], 1) or ["this topic"])[0]
        screen_kws = top_keywords(inputs[-1], 3) or ["this passage"]
        screen_kws = (screen_kws * 3)[:3]  # cycle when the screen is keyword-poor
        if kind is PromptKind.ASK_EXPLORE:
            lines = [
                f"What related work addresses {profile_kw} in the context of {kw}?"
                for kw in screen_kws
            ]
        else:
            lines = [
                f"{CLARIFY_MARKER} how is {kw} defined in relation to {profile_kw}?"
                for kw in screen_kws
            ]
        out = "\n".join(lines)
        if self.audit is not None:
            self.audit.llm_calls.append(
                AdapterCallRecord(kind, tuple(inputs), out, time.perf_counter() - started)
            )
        return out


class HashingEmbedder:
    """Character 3-gram hashing embedder.

    Hashes each 3-gram of the lowercased text into one of ``dimension``
    buckets (multiplicative hashing), counts occurrences, and L2-normalizes.
    Deterministic and fast; retrieval quality is whatever n-gram overlap
    buys, which is all the offline tests need.  Text shorter than three
    characters hashes as a single gram.
    """

    def __init__(self, dimension: int = 384, audit: AuditLog | None = None):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.audit = audit

    @staticmethod
    def _bucket(gram: str, dimension: int) -> int:
        h = 0
        for ch in gram:
            h = (h * 31 + ord(ch)) % 4294967296
        return h % dimension

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        if self.audit is not None:
            self.audit.embed_calls.append(text)
        lowered = text.lower()
        grams = (
            [lowered[i : i + 3] for i in range(len(lowered) - 2)]
            if len(lowered) >= 3
            else [lowered]
        )
        vec = np.zeros(self.dimension, dtype=np.float64)
        for gram in grams:
            vec[self._bucket(gram, self.dimension)] += 1.0
        return vec / np.linalg.norm(vec)
