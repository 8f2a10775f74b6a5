"""HTTP API over the annotation store.

Versioned under /api/v1.  Payloads are JSON envelopes; the export endpoint
returns the plain TSV so the file served over HTTP is byte-identical to
the one written by the command-line export.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import FileResponse, PlainTextResponse
from pydantic import BaseModel, Field

from .annostore import CATEGORIES, AnnotationError, AnnotationStore, DuplicateSpanError


class SpanIn(BaseModel):
    sentence_id: int
    token_start: int = Field(ge=0)
    token_end: int = Field(ge=0)
    category: int
    annotator: str = ""


class SessionIn(BaseModel):
    sentences: list[str]
    annotator: str = ""


def create_app(store: AnnotationStore, static_dir=None) -> FastAPI:
    app = FastAPI(title="annotation API", version="1")

    def _err(exc: AnnotationError) -> HTTPException:
        status = 409 if isinstance(exc, DuplicateSpanError) else 400
        if "no such session" in str(exc):
            status = 404
        return HTTPException(status_code=status, detail=str(exc))

    @app.get("/api/v1/categories")
    def categories():
        return [{"code": c, "label": lbl} for c, lbl in sorted(CATEGORIES.items())]

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: SessionIn):
        sid = store.create_session(body.sentences, annotator=body.annotator)
        return {"session_id": sid}

    @app.get("/api/v1/sessions/{sid}/sentences")
    def sentences(sid: str, offset: int = 0, limit: int = 50):
        try:
            sents = store.sentences(sid, offset=offset, limit=limit)
            total = len(store.sessions[sid].sentences)
            spans = store.spans(sid)
        except AnnotationError as exc:
            raise _err(exc)
        lo, hi = offset, offset + len(sents)
        return {
            "offset": offset,
            "total": total,
            "sentences": [
                {
                    "sentence_id": lo + k,
                    "text": text,
                    "spans": [
                        {
                            "span_id": s.span_id,
                            "token_start": s.token_start,
                            "token_end": s.token_end,
                            "category": s.category,
                            "annotator": s.annotator,
                        }
                        for s in spans
                        if s.sentence_id == lo + k
                    ],
                }
                for k, text in enumerate(sents)
            ],
        }

    @app.post("/api/v1/sessions/{sid}/spans", status_code=201)
    def add_span(sid: str, body: SpanIn):
        try:
            span = store.add_span(
                sid,
                sentence_id=body.sentence_id,
                token_start=body.token_start,
                token_end=body.token_end,
                category=body.category,
                annotator=body.annotator,
            )
        except AnnotationError as exc:
            raise _err(exc)
        return {"span_id": span.span_id}

    @app.delete("/api/v1/sessions/{sid}/spans/{span_id}")
    def delete_span(sid: str, span_id: str):
        try:
            store.delete_span(sid, span_id)
        except AnnotationError as exc:
            raise _err(exc)
        return {"deleted": span_id}

    @app.get("/api/v1/sessions/{sid}/export", response_class=PlainTextResponse)
    def export(sid: str):
        try:
            return store.export_tsv(sid)
        except AnnotationError as exc:
            raise _err(exc)

    if static_dir is not None:
        static_dir = Path(static_dir)

        @app.get("/")
        def index():
            return FileResponse(static_dir / "index.html")

        @app.get("/{asset}")
        def asset(asset: str):
            target = (static_dir / asset).resolve()
            if static_dir.resolve() not in target.parents or not target.is_file():
                raise HTTPException(status_code=404)
            return FileResponse(target)

    return app


def serve(store: AnnotationStore, host: str = "127.0.0.1", port: int = 8077,
          static_dir=None) -> None:
    import uvicorn

    uvicorn.run(create_app(store, static_dir=static_dir), host=host, port=port)
