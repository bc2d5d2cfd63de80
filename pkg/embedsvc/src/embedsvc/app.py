"""The HTTP surface: GET /models and POST /embed.

Error contract: unknown model 404, malformed request 400, inference
failure 500 — all with an {"error": ...} JSON body. Vector order always
matches request order.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .registry import Registry

logger = logging.getLogger("embedsvc")


class EmbedRequest(BaseModel):
    model: str
    sentences: list[str]


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="embedsvc")

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.exception_handler(StarletteHTTPException)
    async def http_error(request: Request, exc: StarletteHTTPException):
        return JSONResponse(status_code=exc.status_code, content={"error": str(exc.detail)})

    @app.get("/models")
    def models():
        entries = []
        for name in registry.names():
            try:
                e = registry.entry(name)
            except Exception as exc:  # weights unavailable, still list the name
                logger.warning("describing %s failed: %s", name, exc)
                entries.append({"name": name, "dim": -1, "pooling": "unavailable",
                                "source": "unavailable"})
                continue
            entries.append(
                {"name": e.name, "dim": e.dim, "pooling": e.pooling, "source": e.source}
            )
        return {"models": entries}

    @app.post("/embed")
    def embed(request: EmbedRequest):
        if request.model not in registry.names():
            return JSONResponse(
                status_code=404, content={"error": f"unknown model: {request.model}"}
            )
        try:
            vectors = registry.encode(request.model, request.sentences)
        except Exception as exc:
            logger.exception("inference failed for %s", request.model)
            return JSONResponse(status_code=500, content={"error": str(exc)})
        return {
            "model": request.model,
            "dim": int(vectors.shape[1]) if vectors.size else 0,
            "vectors": vectors.tolist(),
        }

    return app
