"""The HTTP surface: /generate, /embed, /score, /healthz.

Request and response bodies follow the pipeline client's wire protocol
exactly: /generate returns {"sequences": [...]} with at most num_return
strings, /embed returns {"vector": [...]} of the advertised dimension,
and /score returns {"logits": [e, n, c]}.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import ServerConfig
from .models import Capabilities, CapabilityDisabled


class GenerateRequest(BaseModel):
    prompt: str = Field(min_length=1)
    beam: int = Field(ge=1)
    num_return: int = Field(ge=1)
    max_fill_tokens: int = Field(default=5, ge=1)


class EmbedRequest(BaseModel):
    sentence: str = Field(min_length=1)


class ScoreRequest(BaseModel):
    premise: str = Field(min_length=1)
    hypothesis: str = Field(min_length=1)


def create_app(cfg: ServerConfig,
               capabilities: Capabilities | None = None) -> FastAPI:
    caps = capabilities or Capabilities(cfg)
    app = FastAPI(title="entgraph model server")

    @app.exception_handler(CapabilityDisabled)
    async def _disabled(request: Request, exc: CapabilityDisabled):
        return JSONResponse(status_code=501, content={"error": str(exc)})

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "capabilities": cfg.capabilities}

    @app.post("/generate")
    def generate(req: GenerateRequest):
        gen = caps.require("generator")
        sequences = gen.generate(req.prompt, req.beam, req.num_return,
                                 req.max_fill_tokens)
        return {"sequences": sequences}

    @app.post("/embed")
    def embed(req: EmbedRequest):
        emb = caps.require("embedder")
        return {"vector": emb.embed(req.sentence)}

    @app.post("/score")
    def score(req: ScoreRequest):
        sc = caps.require("scorer")
        return {"logits": sc.score(req.premise, req.hypothesis)}

    return app
