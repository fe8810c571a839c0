"""FastAPI application implementing the scoring wire protocol.

Routes:
    POST /score   {"prompt", "image_b64", "model"}  -> {"score": number}
    POST /caption {"image_b64"}                     -> {"caption": str}
    POST /merge   {"captions": [str]}               -> {"caption": str}
    POST /judge   {"prompt", "prediction"}          -> {"raw": str}
    GET  /health                                    -> {"models": [...], ...}

Every non-2xx reply carries {"error": str}. Unknown model ids are 400; a
configured model that failed to load answers 503 while /health keeps working.
"""

from __future__ import annotations

import base64
import binascii
import io

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from PIL import Image, UnidentifiedImageError
from pydantic import BaseModel

from . import __version__
from .config import ServiceConfig
from .llm import LlmProxy, LlmUnavailableError
from .models import make_loader
from .registry import ModelRegistry, ModelUnavailableError, UnknownModelError
from .stub_models import stub_loader
from .templates import MAX_MERGE_CAPTIONS, build_judge_prompt, build_merge_prompt


class ScoreBody(BaseModel):
    prompt: str
    image_b64: str
    model: str


class CaptionBody(BaseModel):
    image_b64: str


class MergeBody(BaseModel):
    captions: list[str]


class JudgeBody(BaseModel):
    prompt: str
    prediction: str


class ClientError(Exception):
    pass


def build_registry(config: ServiceConfig) -> ModelRegistry:
    registry = ModelRegistry(
        device=config.device,
        deterministic=config.deterministic,
        max_batch_size=config.max_batch_size,
    )
    make = stub_loader if config.stub_models else (
        lambda name: make_loader(name, config.checkpoints[name], config.device, config.deterministic)
    )
    for name in config.scorers:
        registry.register(name, "scorer", make(name))
    if config.captioner:
        registry.register(config.captioner, "captioner", make(config.captioner))
    registry.load_all()
    return registry


def decode_image(image_b64: str) -> np.ndarray:
    try:
        raw = base64.b64decode(image_b64, validate=True)
        with Image.open(io.BytesIO(raw)) as img:
            return np.asarray(img.convert("RGB"))
    except (binascii.Error, UnidentifiedImageError, OSError, ValueError) as err:
        raise ClientError(f"image_b64 is not a decodable image: {err}")


def create_app(
    config: ServiceConfig | None = None,
    registry: ModelRegistry | None = None,
    llm: LlmProxy | None = None,
) -> FastAPI:
    config = config or ServiceConfig()
    registry = registry or build_registry(config)
    llm = llm or LlmProxy(config.llm)

    app = FastAPI(title="scorer-service", version=__version__)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, err: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(err)})

    @app.exception_handler(ClientError)
    async def on_client_error(request: Request, err: ClientError):
        return JSONResponse(status_code=400, content={"error": str(err)})

    @app.exception_handler(UnknownModelError)
    async def on_unknown_model(request: Request, err: UnknownModelError):
        return JSONResponse(status_code=400, content={"error": str(err)})

    @app.exception_handler(ModelUnavailableError)
    async def on_unavailable(request: Request, err: ModelUnavailableError):
        return JSONResponse(status_code=503, content={"error": str(err)})

    @app.exception_handler(LlmUnavailableError)
    async def on_llm_unavailable(request: Request, err: LlmUnavailableError):
        return JSONResponse(status_code=503, content={"error": str(err)})

    @app.exception_handler(Exception)
    async def on_internal(request: Request, err: Exception):
        return JSONResponse(status_code=500, content={"error": f"{type(err).__name__}: {err}"})

    @app.get("/health")
    def health():
        return {
            "models": registry.loaded_scorers(),
            "captioner": registry.loaded_captioner(),
            "detail": registry.detail(),
            "device": registry.device,
            "deterministic": registry.deterministic,
            "deterministic_stub": config.stub_models,
            "max_batch_size": registry.max_batch_size,
            "llm_model": config.llm.model if config.llm.base_url else None,
            "service_version": __version__,
        }

    @app.post("/score")
    def score(body: ScoreBody):
        if not body.prompt.strip():
            raise ClientError("prompt must be non-empty")
        image = decode_image(body.image_b64)
        return {"score": registry.run_scorer(body.model, body.prompt, image)}

    @app.post("/caption")
    def caption(body: CaptionBody):
        image = decode_image(body.image_b64)
        name = registry.loaded_captioner()
        if name is None:
            raise ModelUnavailableError("no captioner available")
        text = registry.run_captioner(name, image)
        if not text:
            raise ModelUnavailableError(f"captioner {name!r} produced an empty caption")
        return {"caption": text}

    @app.post("/merge")
    def merge(body: MergeBody):
        if not 1 <= len(body.captions) <= MAX_MERGE_CAPTIONS:
            raise ClientError(f"caption count must be in [1, {MAX_MERGE_CAPTIONS}]")
        if any(not c.strip() for c in body.captions):
            raise ClientError("captions must be non-empty")
        reply = llm.complete(build_merge_prompt(body.captions))
        merged = reply.strip()
        if not merged:
            raise LlmUnavailableError("LLM returned an empty merge reply")
        return {"caption": merged}

    @app.post("/judge")
    def judge(body: JudgeBody):
        if not body.prompt.strip() or not body.prediction.strip():
            raise ClientError("prompt and prediction must be non-empty")
        return {"raw": llm.complete(build_judge_prompt(body.prompt, body.prediction))}

    return app
