"""Question generation: trigger + memory context -> explicit search questions."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum

from .adapters import AdapterError, Embedder, LlmAdapter, PromptKind
from .frames import TextFrame, sanitize
from .memory import HierarchicalMemory
from .triggers import TriggerKind

__all__ = [
    "QuestionIntent",
    "PromptContext",
    "GeneratedQuestion",
    "assemble_context",
    "generate_questions",
]

log = logging.getLogger(__name__)

SCREEN_TEXT_CAP = 1500  # chars of on-screen text forwarded to the model


class QuestionIntent(Enum):
    EXPLORE = "explore"  # from sustained attention: go broader
    CLARIFY = "clarify"  # from content revisit: pin down what was unclear


_INTENT_BY_TRIGGER = {
    TriggerKind.SUSTAINED_ATTENTION: QuestionIntent.EXPLORE,
    TriggerKind.CONTENT_REVISIT: QuestionIntent.CLARIFY,
}

_PROMPT_BY_INTENT = {
    QuestionIntent.EXPLORE: PromptKind.ASK_EXPLORE,
    QuestionIntent.CLARIFY: PromptKind.ASK_CLARIFY,
}


@dataclass(frozen=True)
class PromptContext:
    intent: QuestionIntent
    on_screen: str
    local_snippets: tuple[str, ...]
    session_snippets: tuple[str, ...]
    profile_text: str | None


@dataclass(frozen=True)
class GeneratedQuestion:
    text: str
    intent: QuestionIntent
    rank: int  # 1-based


def assemble_context(
    frame: TextFrame,
    memory: HierarchicalMemory,
    trigger_kind: TriggerKind,
    embedder: Embedder,
    per_layer: int = 2,
    screen_cap: int = SCREEN_TEXT_CAP,
) -> PromptContext:
    """Gather the sanitized screen plus the most relevant memory per layer.

    The screen text is embedded once as the retrieval query; memory entries
    are matched against their cached embeddings.  Every field that leaves
    this function has passed the sanitizer.
    """
    on_screen = sanitize(frame.text)[:screen_cap]
    if on_screen:
        query_vec = embedder.embed(on_screen)
        local, session, profile = memory.retrieve_context(query_vec, per_layer)
        local_snips = tuple(e.text for e in local)
        session_snips = tuple(e.text for e in session)
    else:  # blank screen: nothing to condition retrieval on
        local_snips, session_snips = (), ()
        profile = memory.profile
    return PromptContext(
        intent=_INTENT_BY_TRIGGER[trigger_kind],
        on_screen=on_screen,
        local_snippets=tuple(sanitize(s) for s in local_snips),
        session_snippets=tuple(sanitize(s) for s in session_snips),
        profile_text=sanitize(profile.text) if profile is not None else None,
    )


def generate_questions(
    ctx: PromptContext, llm: LlmAdapter, n: int = 3
) -> list[GeneratedQuestion]:
    """Ask the model for up to ``n`` questions, one per output line.

    Inputs are passed in a fixed order -- profile, session snippets, local
    snippets, on-screen text -- so stub runs are reproducible.  Adapter
    failure or an empty completion yields an empty list (logged), never a
    partial crash.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    prompt_kind = _PROMPT_BY_INTENT[ctx.intent]
    inputs = [ctx.profile_text or ""]
    inputs.extend(ctx.session_snippets)
    inputs.extend(ctx.local_snippets)
    inputs.append(ctx.on_screen)
    try:
        completion = llm.complete(prompt_kind, inputs)
    except AdapterError as exc:
        log.warning("question generation failed: %s", exc)
        return []
    lines = [line.strip() for line in completion.splitlines()]
    lines = [line for line in lines if line]
    if not lines:
        log.warning("question generation returned no usable lines")
        return []
    return [
        GeneratedQuestion(text=line, intent=ctx.intent, rank=i + 1)
        for i, line in enumerate(lines[:n])
    ]
