"""sidequest: local-first proactive literature search over your on-screen reading.

Screen text streams in as timestamped frames; a three-layer memory keeps
track of what you've read; dwell and revisit triggers decide when you might
want help; generated questions run against a local paper index; suggestion
cards stream out.
"""

from .config import ConfigError, EngineConfig
from .engine import Engine, SuggestionCard
from .frames import FrameIngester, TextFrame, build_frame, extract_delta, sanitize
from .memory import HierarchicalMemory, MemoryConfig
from .retrieval import VectorIndex, ingest_corpus, mrr_at_k
from .triggers import TriggerDetector, TriggerEvent, TriggerKind

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EngineConfig",
    "Engine",
    "SuggestionCard",
    "FrameIngester",
    "TextFrame",
    "build_frame",
    "extract_delta",
    "sanitize",
    "HierarchicalMemory",
    "MemoryConfig",
    "VectorIndex",
    "ingest_corpus",
    "mrr_at_k",
    "TriggerDetector",
    "TriggerEvent",
    "TriggerKind",
    "__version__",
]
