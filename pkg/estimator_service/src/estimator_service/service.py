"""HTTP surface of the estimation protocol.

POST /estimate  {context, events, perspective} -> {probabilities}
GET  /health    -> {status, model: {...metadata}}
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .data import PERSPECTIVES
from .model import LinearBeliefModel


class EstimateRequest(BaseModel):
    context: str
    events: list[str]
    perspective: str


class EstimateResponse(BaseModel):
    probabilities: list[float]


def create_app(model: LinearBeliefModel) -> FastAPI:
    app = FastAPI(title="belief estimator")

    @app.get("/health")
    def health():
        return {"status": "ok", "model": model.metadata}

    @app.post("/estimate", response_model=EstimateResponse)
    def estimate(req: EstimateRequest):
        if req.perspective not in PERSPECTIVES:
            raise HTTPException(422, f"unknown perspective {req.perspective!r}")
        if not req.events:
            raise HTTPException(422, "events must be non-empty")
        probs = model.predict_proba(
            [(req.context, event, req.perspective) for event in req.events]
        )
        # Guard the contract even against numeric drift.
        clipped = [min(1.0, max(0.0, float(p))) for p in probs]
        return EstimateResponse(probabilities=clipped)

    return app
