"""Three-layer reading memory.

New screen text accumulates in a character buffer; full buffers are
summarized into a stack of local entries.  Periodically the newest local
entries are synthesized into a session entry, and each new session entry
folds into a single evolving profile.  Every entry is embedded once, at
creation; retrieval only ever compares against those cached vectors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .adapters import Embedder, LlmAdapter, PromptKind
from .frames import LineDelta, sanitize

__all__ = [
    "LOCAL",
    "SESSION",
    "PROFILE",
    "MemoryEntry",
    "MemoryConfig",
    "HierarchicalMemory",
    "JournalWriter",
    "load_journal",
]

LOCAL = "local"
SESSION = "session"
PROFILE = "profile"


@dataclass(frozen=True)
class MemoryEntry:
    entry_id: str
    layer: str
    text: str
    embedding: np.ndarray  # unit norm, cached at creation
    created_at: float
    source_ids: tuple[str, ...]


@dataclass
class MemoryConfig:
    flush_threshold: int = 2000  # buffered chars that force a local summary
    session_period: float = 300.0  # seconds between session syntheses
    k_local: int = 10  # newest local entries per synthesis
    k_session: int = 5  # newest session entries per profile update

    def __post_init__(self) -> None:
        for name in ("flush_threshold", "session_period", "k_local", "k_session"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class JournalWriter:
    """Append-only JSONL journal of memory entries, flushed per line.

    Each line is {"layer", "t", "text", "sources"}; embeddings are not
    persisted and are regenerated on load.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._fh: IO[str] = open(self.path, "a", encoding="utf-8")

    def write(self, entry: MemoryEntry) -> None:
        line = json.dumps(
            {
                "layer": entry.layer,
                "t": entry.created_at,
                "text": entry.text,
                "sources": list(entry.source_ids),
            },
            ensure_ascii=False,
        )
        self._fh.write(line + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "JournalWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class HierarchicalMemory:
    def __init__(
        self,
        config: MemoryConfig,
        llm: LlmAdapter,
        embedder: Embedder,
        journal: JournalWriter | None = None,
        start_time: float = 0.0,
    ):
        self.config = config
        self.llm = llm
        self.embedder = embedder
        self.journal = journal
        self.local_entries: list[MemoryEntry] = []
        self.session_entries: list[MemoryEntry] = []
        self.profile: MemoryEntry | None = None
        self._buffer: list[str] = []
        self._buffer_chars = 0
        self._last_session_time = start_time
        self._clock = start_time
        self._counters = {LOCAL: 0, SESSION: 0, PROFILE: 0}

    @property
    def buffer_chars(self) -> int:
        return self._buffer_chars

    @property
    def buffer_text(self) -> str:
        return "\n".join(self._buffer)

    def _new_entry(
        self, layer: str, text: str, created_at: float, sources: tuple[str, ...]
    ) -> MemoryEntry:
        self._counters[layer] += 1
        entry = MemoryEntry(
            entry_id=f"{layer}-{self._counters[layer]}",
            layer=layer,
            text=text,
            embedding=self.embedder.embed(text),
            created_at=created_at,
            source_ids=sources,
        )
        if self.journal is not None:
            self.journal.write(entry)
        return entry

    def append_delta(self, delta: LineDelta) -> MemoryEntry | None:
        """Buffer the delta's sanitized lines; summarize when the buffer fills.

        Returns the flushed local entry, or None if the buffer has room.  On
        adapter failure the buffer is left intact and the error propagates.
        """
        lines = [sanitize(line) for line in delta.new_lines]
        if not lines:
            return None
        self._clock = max(self._clock, delta.timestamp)
        self._buffer.extend(lines)
        self._buffer_chars += sum(len(line) for line in lines)
        if self._buffer_chars < self.config.flush_threshold:
            return None
        summary = self.llm.complete(PromptKind.SUMMARIZE, [self.buffer_text])
        entry = self._new_entry(LOCAL, summary, delta.timestamp, ())
        self.local_entries.append(entry)
        self._buffer = []
        self._buffer_chars = 0
        return entry

    def synthesize_session(self, now: float) -> MemoryEntry | None:
        """Fold the newest local entries into a session entry, at most once per period."""
        self._clock = max(self._clock, now)
        if now - self._last_session_time < self.config.session_period:
            return None
        if not self.local_entries:
            return None
        picked = self.local_entries[-self.config.k_local :]  # oldest-to-newest
        text = self.llm.complete(PromptKind.INTEGRATE, [e.text for e in picked])
        entry = self._new_entry(
            SESSION, text, now, tuple(e.entry_id for e in picked)
        )
        self.session_entries.append(entry)
        self._last_session_time = now
        return entry

    def update_profile(self, now: float | None = None) -> MemoryEntry:
        """Rebuild the profile from the current profile and newest session entries."""
        if not self.session_entries:
            raise ValueError("cannot update profile with no session entries")
        if now is None:
            now = self._clock
        picked = self.session_entries[-self.config.k_session :]
        inputs = [self.profile.text if self.profile else ""]
        inputs.extend(e.text for e in picked)
        text = self.llm.complete(PromptKind.UPDATE_PROFILE, inputs)
        sources = tuple(
            ([self.profile.entry_id] if self.profile else [])
            + [e.entry_id for e in picked]
        )
        entry = self._new_entry(PROFILE, text, now, sources)
        self.profile = entry
        return entry

    def seed_profile(self, text: str, now: float = 0.0) -> MemoryEntry:
        """Install an initial profile directly (e.g. from configuration)."""
        entry = self._new_entry(PROFILE, sanitize(text), now, ())
        self.profile = entry
        return entry

    def retrieve_context(
        self, query_vec: np.ndarray, per_layer: int = 2
    ) -> tuple[list[MemoryEntry], list[MemoryEntry], MemoryEntry | None]:
        """Top entries per layer by inner product against cached embeddings.

        Nothing is re-embedded here.  Ties break toward newer entries.
        """

        def top(stack: list[MemoryEntry]) -> list[MemoryEntry]:
            scored = [
                (float(np.dot(query_vec, e.embedding)), i, e)
                for i, e in enumerate(stack)
            ]
            scored.sort(key=lambda t: (-t[0], -t[1]))
            return [e for _, _, e in scored[:per_layer]]

        return top(self.local_entries), top(self.session_entries), self.profile


def load_journal(
    path: str | Path,
    config: MemoryConfig,
    llm: LlmAdapter,
    embedder: Embedder,
    journal: JournalWriter | None = None,
) -> HierarchicalMemory:
    """Reconstruct memory stacks from a journal file, re-embedding each entry.

    The character buffer is not journaled; recovery starts with an empty
    buffer.  The session clock resumes from the newest session entry so a
    restart does not trigger an immediate synthesis.
    """
    mem = HierarchicalMemory(config, llm, embedder, journal=None)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
                layer, t, text = rec["layer"], float(rec["t"]), rec["text"]
                sources = tuple(rec.get("sources", []))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad journal line {lineno} in {path}: {exc}") from exc
            entry = mem._new_entry(layer, text, t, sources)
            if layer == LOCAL:
                mem.local_entries.append(entry)
            elif layer == SESSION:
                mem.session_entries.append(entry)
                mem._last_session_time = max(mem._last_session_time, t)
            elif layer == PROFILE:
                mem.profile = entry
            else:
                raise ValueError(f"bad journal line {lineno}: unknown layer {layer!r}")
            mem._clock = max(mem._clock, t)
    mem.journal = journal
    return mem
