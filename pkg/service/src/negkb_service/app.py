"""HTTP surface: /embed, /predict_masked, /health."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from .backends import MASK_SLOT, build_backends, dedup_tokens
from .config import MAX_BATCH, MAX_TOP_K, ServiceConfig

MODEL_HEADER = "x-model-id"


class EmbedRequest(BaseModel):
    texts: list[str] = Field(min_length=1)


class EmbedResponse(BaseModel):
    vectors: list[list[float]]
    model: str


class MaskPredictRequest(BaseModel):
    template: str
    top_k: int = Field(default=100, ge=1, le=MAX_TOP_K)


class MaskPredictResponse(BaseModel):
    tokens: list[str]
    model: str


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    embedder, masker = build_backends(config)
    app = FastAPI(title="negkb inference sidecar", version="0.1.0")

    @app.post("/embed", response_model=EmbedResponse)
    def embed(request: EmbedRequest, response: Response) -> EmbedResponse:
        if len(request.texts) > MAX_BATCH:
            raise HTTPException(
                status_code=413,
                detail=f"batch of {len(request.texts)} exceeds the {MAX_BATCH} limit",
            )
        vectors = embedder.embed(request.texts)
        response.headers[MODEL_HEADER] = embedder.model_id
        return EmbedResponse(vectors=[[float(x) for x in row] for row in vectors],
                             model=embedder.model_id)

    @app.post("/predict_masked", response_model=MaskPredictResponse)
    def predict_masked(request: MaskPredictRequest, response: Response) -> MaskPredictResponse:
        slots = request.template.count(MASK_SLOT)
        if slots != 1:
            raise HTTPException(
                status_code=400,
                detail=f"template must contain exactly one {MASK_SLOT} slot, found {slots}",
            )
        raw = masker.predict_raw(request.template, request.top_k)
        response.headers[MODEL_HEADER] = masker.model_id
        return MaskPredictResponse(tokens=dedup_tokens(raw, request.top_k),
                                   model=masker.model_id)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "backend": config.backend,
            "embed_model": embedder.model_id,
            "mask_model": masker.model_id,
            "dimension": embedder.dimension,
        }

    return app
