"""Deterministic trace replay and report rendering.

A trace is a JSONL file of {"t": seconds, "text": screen text} records in
ascending time.  Replay drives the whole pipeline in logical time and writes
a report directory: delimited tables (events, warnings, timings, per-frame
diagnostics), the card and memory JSONL files, a summary, and rendered
figures.  Everything except wall-clock timing fields is byte-identical
across runs of the same trace.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from .config import EngineConfig
from .engine import Engine, SuggestionCard, TickDiagnostics, card_to_dict
from .memory import JournalWriter
from .retrieval import MetadataStore, VectorIndex, metadata_path_for
from .triggers import TriggerEvent

__all__ = ["TraceError", "ReplayResult", "iter_trace", "replay", "write_report"]


class TraceError(ValueError):
    """A trace line failed to parse or violated the trace contract."""


def iter_trace(path: str | Path) -> Iterator[tuple[float, str]]:
    """Yield (timestamp, raw_text) pairs; abort with line number on bad input."""
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise TraceError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
            if not isinstance(rec, dict) or "t" not in rec or "text" not in rec:
                raise TraceError(f'{path}:{lineno}: want {{"t", "text"}} object')
            t, text = rec["t"], rec["text"]
            if not isinstance(t, (int, float)) or isinstance(t, bool):
                raise TraceError(f"{path}:{lineno}: t must be a number")
            if not isinstance(text, str):
                raise TraceError(f"{path}:{lineno}: text must be a string")
            yield float(t), text


@dataclass
class ReplayResult:
    frames: int = 0
    events: list[TriggerEvent] = field(default_factory=list)
    cards: list[SuggestionCard] = field(default_factory=list)
    warnings: list[dict] = field(default_factory=list)
    diagnostics: list[TickDiagnostics] = field(default_factory=list)


def build_engine_for_replay(config: EngineConfig, out_dir: Path) -> Engine:
    index = None
    metadata = None
    if config.index_path:
        if not Path(config.index_path).exists():
            raise FileNotFoundError(f"index not found: {config.index_path}")
        index = VectorIndex.load(config.index_path)
        meta_path = metadata_path_for(config.index_path)
        metadata = MetadataStore(meta_path) if meta_path.exists() else None
    journal_path = config.journal_path or str(out_dir / "journal.jsonl")
    return Engine(
        config,
        index=index,
        metadata=metadata,
        journal=JournalWriter(journal_path),
        async_cards=False,  # inline production keeps replay deterministic
    )


def replay(
    trace_path: str | Path,
    config: EngineConfig,
    out_dir: str | Path,
    figures: bool = True,
    abort_after_frames: int | None = None,
) -> ReplayResult:
    """Replay a trace through a fresh engine and write the report.

    ``abort_after_frames`` hard-exits the process mid-run (no cleanup); it
    exists to exercise crash recovery from the journal.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    engine = build_engine_for_replay(config, out)
    result = ReplayResult()
    engine.diagnostics_listener = result.diagnostics.append

    for t, text in iter_trace(trace_path):
        engine.ingest(text, t)
        result.frames += 1
        if abort_after_frames is not None and result.frames >= abort_after_frames:
            os._exit(3)  # simulated crash: no flushing beyond the journal's own

    result.events = list(engine.events)
    result.cards = list(engine.cards)
    result.warnings = list(engine.warnings)
    write_report(result, out, figures=figures)
    return result


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(value)


def write_report(result: ReplayResult, out_dir: str | Path, figures: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "events.tsv", "w", encoding="utf-8") as fh:
        fh.write("kind\tfired_at\tanchor_at\tsimilarity\tthreshold_used\n")
        for e in result.events:
            fh.write(
                f"{e.kind.value}\t{_fmt(e.fired_at)}\t{_fmt(e.anchor_at)}"
                f"\t{_fmt(e.similarity)}\t{_fmt(e.threshold_used)}\n"
            )

    with open(out / "warnings.tsv", "w", encoding="utf-8") as fh:
        fh.write("t\tmessage\n")
        for w in result.warnings:
            fh.write(f"{_fmt(w['t'])}\t{w['message']}\n")

    with open(out / "diagnostics.tsv", "w", encoding="utf-8") as fh:
        fh.write("t\tsimilarity\tspeed\tanchor_at\tevent\tbuffer_chars\n")
        for d in result.diagnostics:
            fh.write(
                f"{_fmt(d.timestamp)}\t{_fmt(d.similarity)}\t{_fmt(d.speed)}"
                f"\t{_fmt(d.anchor_at)}\t{d.event_kind or ''}\t{d.buffer_chars}\n"
            )

    # cards.jsonl carries no timing fields so reruns are byte-identical
    with open(out / "cards.jsonl", "w", encoding="utf-8") as fh:
        for card in result.cards:
            fh.write(json.dumps(card_to_dict(card), ensure_ascii=False, sort_keys=True) + "\n")

    with open(out / "timings.tsv", "w", encoding="utf-8") as fh:
        fh.write("card_id\tsensing_memory\tquestion_gen\tsearch\ttotal\n")
        sums = [0.0, 0.0, 0.0, 0.0]
        for card in result.cards:
            t = card.timings
            row = [t.sensing_memory, t.question_gen, t.search, t.total]
            for i, v in enumerate(row):
                sums[i] += v
            fh.write(f"{card.card_id}\t" + "\t".join(f"{v:.6f}" for v in row) + "\n")
        fh.write("TOTAL\t" + "\t".join(f"{v:.6f}" for v in sums) + "\n")

    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(
            {
                "frames": result.frames,
                "events": len(result.events),
                "cards": len(result.cards),
                "warnings": len(result.warnings),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")

    if figures:
        render_figures(result, out / "figures")


def render_figures(result: ReplayResult, fig_dir: str | Path) -> None:
    """Similarity timeline with trigger marks, and per-card stage timings."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig_dir = Path(fig_dir)
    fig_dir.mkdir(parents=True, exist_ok=True)

    fig, ax = plt.subplots(figsize=(10, 4))
    if result.diagnostics:
        ts = [d.timestamp for d in result.diagnostics]
        sims = [d.similarity for d in result.diagnostics]
        ax.plot(ts, sims, lw=1.0, color="#1f77b4", label="similarity to anchor")
    colors = {"sustained_attention": "#d62728", "content_revisit": "#2ca02c"}
    seen_kinds = set()
    for e in result.events:
        kind = e.kind.value
        ax.axvline(
            e.fired_at,
            color=colors.get(kind, "gray"),
            ls="--",
            lw=1.2,
            label=None if kind in seen_kinds else kind,
        )
        seen_kinds.add(kind)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("Jaccard similarity")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title("Screen stability and triggers")
    if result.diagnostics or result.events:
        ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(fig_dir / "timeline.png", dpi=110)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(8, 4))
    if result.cards:
        labels = [c.card_id for c in result.cards]
        stages = ["sensing_memory", "question_gen", "search"]
        bottoms = [0.0] * len(result.cards)
        for stage in stages:
            values = [getattr(c.timings, stage) for c in result.cards]
            ax.bar(labels, values, bottom=bottoms, label=stage)
            bottoms = [b + v for b, v in zip(bottoms, values)]
        ax.set_ylabel("seconds")
        ax.legend(fontsize=8)
    else:
        ax.text(0.5, 0.5, "no cards produced", ha="center", va="center")
        ax.set_axis_off()
    ax.set_title("Card production time by stage")
    fig.tight_layout()
    fig.savefig(fig_dir / "stage_timings.png", dpi=110)
    plt.close(fig)
