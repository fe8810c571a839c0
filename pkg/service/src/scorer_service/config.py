"""Service configuration: which models to load, device, and the LLM endpoint."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

DEFAULT_CHECKPOINTS = {
    "clip": "openai/clip-vit-base-patch32",
    "imagereward": "ImageReward-v1.0",
    "blip": "Salesforce/blip-image-captioning-base",
}


@dataclass(frozen=True)
class LlmConfig:
    base_url: str | None = None  # OpenAI-compatible chat completions endpoint
    model: str = "gpt-4"
    api_key_env: str = "LLM_API_KEY"
    temperature: float = 0.0
    timeout: float = 120.0

    def api_key(self) -> str | None:
        return os.environ.get(self.api_key_env)


@dataclass(frozen=True)
class ServiceConfig:
    scorers: tuple[str, ...] = ("clip", "imagereward")
    captioner: str | None = "blip"
    device: str = "cpu"
    deterministic: bool = True
    max_batch_size: int = 1
    stub_models: bool = False
    checkpoints: dict = field(default_factory=lambda: dict(DEFAULT_CHECKPOINTS))
    llm: LlmConfig = LlmConfig()

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        llm = LlmConfig(**data.pop("llm", {}))
        checkpoints = dict(DEFAULT_CHECKPOINTS)
        checkpoints.update(data.pop("checkpoints", {}))
        data["scorers"] = tuple(data.get("scorers", ("clip", "imagereward")))
        return cls(llm=llm, checkpoints=checkpoints, **data)
