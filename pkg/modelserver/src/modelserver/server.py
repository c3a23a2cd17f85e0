"""HTTP serving of a trained model over the shared wire protocol.

``POST /score`` takes ``{"instances": [str, ...]}`` and answers
``{"scores": [float, ...], "errors": [{"index": int, "error": str}, ...]}``
with one score per instance, order preserved, every score finite in
[0, 1]; items without both pair markers score 0.0 and gain an error
entry. Malformed requests get a 400 protocol-error response and the
service stays up. ``/ner`` answers 404 until an entity-tagging head is
trained, which this server does not currently do.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from modelserver.train import ServedModel


def build_app(served: ServedModel) -> FastAPI:
    app = FastAPI(title="interaction scorer", docs_url=None, redoc_url=None)

    # Bodies are parsed by hand: protocol errors must come back as
    # {"error": ...} with the service still up, not as framework 422s.
    @app.post("/score")
    async def score(request: Request) -> JSONResponse:
        try:
            payload = json.loads(await request.body() or b"null")
        except json.JSONDecodeError:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        if not isinstance(payload, dict) or "instances" not in payload:
            return JSONResponse(
                {"error": "body must be a JSON object with an instances list"}, status_code=400
            )
        instances = payload["instances"]
        if not isinstance(instances, list) or not all(isinstance(t, str) for t in instances):
            return JSONResponse(
                {"error": "instances must be a list of strings"}, status_code=400
            )
        scores, errors = served.score_batch(instances)
        return JSONResponse({"scores": scores, "errors": errors})

    @app.get("/ner")
    @app.post("/ner")
    async def ner() -> JSONResponse:
        return JSONResponse(
            {"error": "no entity-tagging head is trained on this server"}, status_code=404
        )

    @app.get("/info")
    async def info() -> dict:
        return {
            "identifier": served.identifier,
            "regimen": served.regimen,
            "head": served.head_description,
        }

    return app


def serve(served: ServedModel, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the scoring service until interrupted."""
    import uvicorn

    uvicorn.run(build_app(served), host=host, port=port, log_level="info")
