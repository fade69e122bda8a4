"""Localhost HTTP facade over a running engine.

Endpoints: engine state, recent suggestion cards, a server-sent event feed
of cards/warnings/feedback, frame injection, and card feedback.  CORS is
wide open because the only intended client is an overlay page on the same
machine.
"""

from __future__ import annotations

import json
import queue
from typing import Iterator, Literal

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import StreamingResponse
from pydantic import BaseModel

from .config import EngineConfig
from .engine import Engine, FeedbackError, card_to_dict
from .frames import SequencingError
from .memory import JournalWriter
from .retrieval import MetadataStore, VectorIndex, metadata_path_for

__all__ = ["create_app", "build_engine", "serve"]

SSE_HEARTBEAT_SECONDS = 15.0


class FramePayload(BaseModel):
    t: float
    text: str


class FeedbackPayload(BaseModel):
    card_id: str
    status: Literal["accepted", "dismissed"]


def build_engine(config: EngineConfig) -> Engine:
    """Engine wired for serving: async card production, optional index."""
    index = None
    metadata = None
    if config.index_path:
        index = VectorIndex.load(config.index_path)  # missing file -> startup failure
        meta_path = metadata_path_for(config.index_path)
        metadata = MetadataStore(meta_path) if meta_path.exists() else None
    journal = JournalWriter(config.journal_path) if config.journal_path else None
    engine = Engine(
        config, index=index, metadata=metadata, journal=journal, async_cards=True
    )
    if config.journal_path:
        engine.feedback_log_path = config.journal_path + ".feedback"
    return engine


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="sidequest", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.engine = engine

    @app.get("/v1/state")
    def get_state() -> dict:
        return engine.snapshot_state()

    @app.get("/v1/suggestions")
    def get_suggestions(limit: int = 50) -> dict:
        cards = engine.cards[-limit:][::-1]  # newest first
        return {"cards": [card_to_dict(c) for c in cards]}

    @app.post("/v1/frames")
    def post_frame(payload: FramePayload) -> dict:
        try:
            engine.ingest(payload.text, payload.t)
        except SequencingError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"ok": True, "t": payload.t}

    @app.post("/v1/feedback")
    def post_feedback(payload: FeedbackPayload) -> dict:
        try:
            card = engine.feedback(payload.card_id, payload.status)
        except FeedbackError as exc:
            raise HTTPException(status_code=404 if exc.unknown else 409, detail=str(exc))
        return {"card_id": card.card_id, "status": card.status.value}

    @app.get("/v1/events")
    def get_events() -> StreamingResponse:
        client: queue.Queue[dict] = queue.Queue()
        engine.listeners.append(client.put)

        def stream() -> Iterator[str]:
            try:
                while True:
                    try:
                        payload = client.get(timeout=SSE_HEARTBEAT_SECONDS)
                    except queue.Empty:
                        yield ": keepalive\n\n"
                        continue
                    yield f"data: {json.dumps(payload, ensure_ascii=False)}\n\n"
            finally:
                if client.put in engine.listeners:
                    engine.listeners.remove(client.put)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app


def serve(config: EngineConfig) -> None:
    import uvicorn

    engine = build_engine(config)
    app = create_app(engine)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
