"""FastAPI app exposing /v1/define, /v1/embed and /v1/health."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import __version__


class DefineItem(BaseModel):
    id: str
    prompt: str
    banned_word: str = ""


class DefineRequest(BaseModel):
    items: list[DefineItem]
    decoding: str = "greedy"
    max_new_tokens: int = Field(default=32, ge=1, le=512)


class SpanItem(BaseModel):
    context: str
    start: int
    end: int


class EmbedRequest(BaseModel):
    subject: str = "definition"
    texts: list[str] | None = None
    items: list[SpanItem] | None = None


def create_app(backend) -> FastAPI:
    app = FastAPI(title="defsense-sidecar", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def malformed(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"detail": exc.errors()})

    def _backend():
        if backend is None:
            raise HTTPException(status_code=503, detail="model unavailable")
        return backend

    @app.post("/v1/define")
    def define(req: DefineRequest):
        b = _backend()
        if req.decoding != "greedy":
            raise HTTPException(status_code=400,
                                detail=f"unsupported decoding '{req.decoding}'")
        items = [{"id": item.id,
                  "definition": b.define(item.prompt, item.banned_word,
                                         req.max_new_tokens)}
                 for item in req.items]
        return {"items": items, "generator_id": b.generator_id}

    @app.post("/v1/embed")
    def embed(req: EmbedRequest):
        b = _backend()
        if req.subject == "token-span":
            if not req.items and req.items != []:
                raise HTTPException(status_code=400,
                                    detail="token-span requires 'items'")
            try:
                vectors = [b.embed_token_span(i.context, i.start, i.end)
                           for i in req.items]
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
            provider_id = b.token_model
        elif req.subject in ("definition", "sentence", "label"):
            if req.texts is None:
                raise HTTPException(status_code=400,
                                    detail=f"subject '{req.subject}' "
                                           "requires 'texts'")
            vectors = b.embed_texts(req.texts, req.subject)
            provider_id = b.sentence_model
        else:
            raise HTTPException(status_code=400,
                                detail=f"unknown subject '{req.subject}'")
        dim = len(vectors[0]) if vectors else b.dim
        return {"dim": dim, "vectors": vectors, "provider_id": provider_id}

    @app.get("/v1/health")
    def health():
        if backend is None:
            raise HTTPException(status_code=503, detail="model unavailable")
        return {"status": "ok",
                "generator_id": backend.generator_id,
                "sentence_model": backend.sentence_model,
                "token_model": backend.token_model,
                "dim": backend.dim,
                "version": __version__}

    return app
