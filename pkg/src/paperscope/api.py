"""HTTP JSON API over the whole service; the web UI's only integration point."""
from __future__ import annotations

import logging
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .analysis import literature_review, summarize
from .corpus import SEARCHABLE_FIELDS, PaperRecord
from .errors import (
    ConfigurationError,
    LlmError,
    NotFoundError,
    OversizeQueryError,
    PaperscopeError,
    ProtocolError,
    TransientProviderError,
    ValidationError,
)
from .index import DEFAULT_K
from .rag import DEFAULT_SESSION_K
from .saved import export_json, saved_bibtex
from .templates import REQUIRED_PLACEHOLDERS
from .workspace import Workspace

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


# -- request bodies --

class SearchBody(BaseModel):
    query: str = ""
    fields: list[str] = Field(default_factory=lambda: list(SEARCHABLE_FIELDS))
    limit: int = 50
    offset: int = 0


class SimilarBody(BaseModel):
    seeds: list[str] = Field(default_factory=list)
    title: str = ""
    abstract: str = ""
    space: str | None = None
    k: int = DEFAULT_K
    threshold: float | None = None
    exact: bool = False


class ChatCreateBody(BaseModel):
    space: str | None = None
    k: int = DEFAULT_SESSION_K


class ChatMessageBody(BaseModel):
    message: str


class SavedCreateBody(BaseModel):
    set_id: str | None = None


class SavePaperBody(BaseModel):
    paper_id: str


class TemplateBody(BaseModel):
    text: str


# -- serialization helpers --

def _record_dict(record: PaperRecord) -> dict:
    return record.to_dict()


def _hit_dict(workspace: Workspace, hit) -> dict:
    row = {"paper_id": hit.paper_id, "score": hit.score}
    if hit.paper_id in workspace.corpus:
        record = workspace.corpus.get_paper(hit.paper_id)
        row.update({"title": record.title, "year": record.year, "venue": record.venue})
    return row


def _session_dict(session) -> dict:
    return {
        "session_id": session.session_id,
        "space": session.space,
        "k": session.k,
        "turns": [t.to_dict() for t in session.turns],
        "condensed_history": session.condensed_history,
    }


def _error(status: int, code: str, message: str, detail=None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": {"code": code, "message": message, "detail": detail}},
    )


def install_error_handlers(app: FastAPI) -> None:
    @app.exception_handler(NotFoundError)
    async def not_found(request: Request, exc: NotFoundError):
        return _error(404, "not_found", str(exc))

    @app.exception_handler(OversizeQueryError)
    async def oversize(request: Request, exc: OversizeQueryError):
        return _error(400, "oversize_query", str(exc))

    @app.exception_handler(ValidationError)
    async def bad_request(request: Request, exc: ValidationError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return _error(400, "bad_request", "malformed request", detail=str(exc))

    @app.exception_handler(LlmError)
    async def llm_failed(request: Request, exc: LlmError):
        return _error(502, "provider_error", str(exc))

    @app.exception_handler(TransientProviderError)
    async def provider_failed(request: Request, exc: TransientProviderError):
        return _error(502, "provider_error", str(exc))

    @app.exception_handler(ProtocolError)
    async def protocol(request: Request, exc: ProtocolError):
        return _error(502, "provider_error", str(exc))

    @app.exception_handler(ConfigurationError)
    async def misconfigured(request: Request, exc: ConfigurationError):
        return _error(500, "internal", str(exc))

    @app.exception_handler(PaperscopeError)
    async def other_domain(request: Request, exc: PaperscopeError):
        return _error(500, "internal", str(exc))

    @app.exception_handler(Exception)
    async def unexpected(request: Request, exc: Exception):
        logger.exception("unhandled error on %s", request.url.path)
        return _error(500, "internal", "internal error")


def create_app(workspace: Workspace, ui_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="paperscope", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    install_error_handlers(app)
    ws = workspace

    @app.get("/health")
    def health() -> dict:
        return {"papers": len(ws.corpus), "spaces": ws.loaded_spaces()}

    @app.get("/meta/schema")
    def schema() -> dict:
        return {"schema_version": SCHEMA_VERSION}

    @app.get("/papers")
    def list_papers(
        query: str | None = None,
        fields: str | None = None,
        limit: int = Query(default=50, ge=1, le=1000),
        offset: int = Query(default=0, ge=0),
    ) -> dict:
        field_list = fields.split(",") if fields else list(SEARCHABLE_FIELDS)
        if query:
            records = ws.corpus.keyword_search(query, fields=field_list)
        else:
            records = sorted(ws.corpus.records(), key=lambda r: r.id)
        page = records[offset : offset + limit]
        return {
            "total": len(records),
            "offset": offset,
            "limit": limit,
            "papers": [_record_dict(r) for r in page],
        }

    @app.post("/papers")
    def search_papers(body: SearchBody) -> dict:
        if body.limit < 1 or body.offset < 0:
            raise ValidationError("limit must be >= 1 and offset >= 0")
        records = ws.corpus.keyword_search(body.query, fields=body.fields)
        page = records[body.offset : body.offset + body.limit]
        return {
            "total": len(records),
            "offset": body.offset,
            "limit": body.limit,
            "papers": [_record_dict(r) for r in page],
        }

    @app.get("/papers/{paper_id}")
    def get_paper(paper_id: str) -> dict:
        return _record_dict(ws.corpus.get_paper(paper_id))

    @app.post("/similar")
    def similar(body: SimilarBody) -> dict:
        space = ws.resolve_space(body.space)
        if body.seeds:
            hits = ws.search.similar_by_papers(
                body.seeds, space, k=body.k, threshold=body.threshold, exact=body.exact
            )
        else:
            hits = ws.search.similar_by_text(
                body.title,
                body.abstract,
                space,
                embed=ws.batch_embedder(space),
                k=body.k,
                exact=body.exact,
            )
            if body.threshold is not None:
                hits = [h for h in hits if h.score > body.threshold]
        return {"space": space, "hits": [_hit_dict(ws, h) for h in hits]}

    @app.get("/projection")
    def projection(space: str | None = None) -> dict:
        name = ws.resolve_space(space)
        points = ws.projection_points(name)
        return {
            "space": name,
            "points": [{"id": p.paper_id, "x": p.x, "y": p.y} for p in points],
        }

    @app.get("/meta")
    def meta(query: str | None = None) -> dict:
        stats = ws.corpus.aggregate_meta(query)
        return {
            "paper_count": stats.paper_count,
            "by_year": {str(year): count for year, count in stats.by_year.items()},
            "by_venue": stats.by_venue,
            "top_keywords": [
                {"keyword": kw, "count": count} for kw, count in stats.top_keywords
            ],
        }

    @app.post("/chat")
    def create_chat(body: ChatCreateBody) -> dict:
        space = ws.resolve_space(body.space)
        session = ws.sessions.create(space=space, k=body.k)
        return {"session_id": session.session_id, "space": session.space, "k": session.k}

    @app.get("/chat/{session_id}")
    def chat_history(session_id: str) -> dict:
        return _session_dict(ws.sessions.get(session_id))

    @app.post("/chat/{session_id}")
    def chat_message(session_id: str, body: ChatMessageBody) -> dict:
        with ws.sessions.locked(session_id) as session:
            result = ws.orchestrator.chat(session, body.message)
        return {
            "session_id": session_id,
            "reply": result.reply.to_dict(),
            "citations": [
                {
                    "surface": m.surface_text,
                    "start": m.start,
                    "end": m.end,
                    "paper_id": m.matched_id,
                    "score": m.match_score,
                }
                for m in result.report.mentions
            ],
            "grounded_count": result.report.grounded_count,
            "ungrounded_count": result.report.ungrounded_count,
            "context_paper_ids": list(result.bundle.context_paper_ids),
            "dropped_paper_ids": list(result.bundle.dropped_paper_ids),
            "token_estimate": result.bundle.token_estimate,
        }

    @app.get("/saved")
    def list_saved() -> dict:
        return {"sets": [s.to_dict() for s in ws.saved.list_sets()]}

    @app.post("/saved")
    def create_saved(body: SavedCreateBody) -> dict:
        return ws.saved.create(body.set_id).to_dict()

    @app.get("/saved/{set_id}")
    def get_saved(set_id: str) -> dict:
        return ws.saved.get(set_id).to_dict()

    @app.post("/saved/{set_id}/papers")
    def add_saved_paper(set_id: str, body: SavePaperBody) -> dict:
        return ws.saved.save_paper(set_id, body.paper_id, ws.corpus).to_dict()

    @app.delete("/saved/{set_id}/papers/{paper_id}")
    def remove_saved_paper(set_id: str, paper_id: str) -> dict:
        return ws.saved.remove_paper(set_id, paper_id).to_dict()

    @app.post("/saved/{set_id}/summarize")
    def summarize_saved(set_id: str) -> dict:
        records = ws.saved.records_for(set_id, ws.corpus)
        entries = summarize(records, ws.templates.get("summarize"), ws.llm, budget=ws.budget)
        return {"set_id": set_id, "summaries": [e.to_dict() for e in entries]}

    @app.post("/saved/{set_id}/litreview")
    def litreview_saved(set_id: str) -> dict:
        records = ws.saved.records_for(set_id, ws.corpus)
        result = literature_review(records, ws.templates, ws.llm, budget=ws.budget)
        return {
            "set_id": set_id,
            "summaries": [e.to_dict() for e in result.per_paper_summaries],
            "synthesis": result.synthesis,
            "synthesis_failed": result.synthesis_failed,
            "bibliography": list(result.bibliography),
        }

    @app.get("/saved/{set_id}/export")
    def export_saved(set_id: str, format: str = Query(default="json")) -> Response:
        saved = ws.saved.get(set_id)
        if format == "json":
            return JSONResponse(content=export_json(saved, ws.corpus))
        if format == "bibtex":
            return Response(
                content=saved_bibtex(saved, ws.corpus), media_type="application/x-bibtex"
            )
        raise ValidationError(f"unknown export format {format!r}; use json or bibtex")

    @app.get("/templates")
    def list_templates() -> dict:
        rows = []
        for name in ws.templates.names():
            template = ws.templates.get(name)
            rows.append(
                {"name": name, "text": template.text, "is_default": template.is_default}
            )
        return {"templates": rows}

    @app.get("/templates/{name}")
    def get_template(name: str) -> dict:
        template = ws.templates.get(name)
        return {
            "name": template.name,
            "text": template.text,
            "is_default": template.is_default,
            "required_placeholders": list(REQUIRED_PLACEHOLDERS[name]),
        }

    @app.put("/templates/{name}")
    def put_template(name: str, body: TemplateBody) -> dict:
        template = ws.templates.set(name, body.text)
        return {"name": template.name, "text": template.text, "is_default": template.is_default}

    @app.delete("/templates/{name}")
    def reset_template(name: str) -> dict:
        template = ws.templates.reset(name)
        return {"name": template.name, "text": template.text, "is_default": template.is_default}

    static_dir = ui_dir or workspace.config.ui_dir
    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(workspace: Workspace, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Validate readiness and run the service until interrupted."""
    import uvicorn

    workspace.validate_ready()
    app = create_app(workspace)
    uvicorn.run(app, host=host, port=port, log_level="info")
