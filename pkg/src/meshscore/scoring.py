"""Scoring backends: text-image scores, captions, caption merging, recall judging.

Two interchangeable backends expose the same four operations. ``MockBackend``
is pure and deterministic (hash-derived values with optional fixture tables),
so whole-pipeline runs are reproducible byte for byte. ``RemoteBackend`` talks
to a model-serving sidecar over HTTP JSON:

    POST /score   {"prompt", "image_b64", "model"}  -> {"score": number}
    POST /caption {"image_b64"}                     -> {"caption": str}
    POST /merge   {"captions": [str]}               -> {"caption": str}
    POST /judge   {"prompt", "prediction"}          -> {"raw": str}
    GET  /health                                    -> {"models": [str]}

Images travel as lossless base64 PNG. Non-2xx replies carry {"error": str}.
"""

from __future__ import annotations

import base64
import hashlib
import io
import re
import threading
import time
import uuid
from dataclasses import dataclass

import numpy as np
import requests
from PIL import Image

from .errors import ProtocolError, TransportError, ValidationError

MODEL_SCORE_RANGES = {
    "clip": (-1.0, 1.0),
    "imagereward": (-2.5, 2.5),
}

MAX_MERGE_CAPTIONS = 32

MERGE_PROMPT_HEADER = (
    "Given a set of descriptions about the same 3D object, distill these "
    "descriptions into one concise caption. The descriptions are as follows:"
)
MERGE_PROMPT_FOOTER = (
    "Avoid describing background, surface, and posture. The caption should be:"
)

JUDGE_PROMPT_TEMPLATE = """You are an assessment expert responsible for prompt-prediction pairs. Your task is to score the prediction according to the following requirements:

1. Evaluate the recall, or how well the prediction covers the information in the prompt. If the prediction contains information that does not appear in the prompt, it should not be considered as bad.

2. If the prediction contains correct information about color or features in the prompt, you should also consider raising your score.

3. Assign a score between 1 and 5, with 5 being the highest. Do not provide a complete answer; give the score in the format: 3

Prompt: {prompt}

Prediction: {prediction}"""

_INT_RE = re.compile(r"-?\d+")


@dataclass(frozen=True)
class ScoreRequest:
    prompt: str
    image: np.ndarray
    model_id: str = "imagereward"

    def __post_init__(self):
        if not self.prompt.strip():
            raise ValidationError("prompt must be non-empty")
        if self.image is None or self.image.size == 0:
            raise ValidationError("image must be non-empty")


@dataclass(frozen=True)
class JudgeVerdict:
    score: int
    raw_response: str

    def __post_init__(self):
        if not 1 <= self.score <= 5:
            raise ValidationError(f"judge score {self.score} outside [1, 5]")


def build_merge_prompt(captions: list[str]) -> str:
    """The caption-merging request sent to the language model, one view per line."""
    if not 1 <= len(captions) <= MAX_MERGE_CAPTIONS:
        raise ValidationError(
            f"caption count must be in [1, {MAX_MERGE_CAPTIONS}], got {len(captions)}"
        )
    if any(not c.strip() for c in captions):
        raise ValidationError("captions must be non-empty")
    lines = "\n".join(f"view{i}: {c}" for i, c in enumerate(captions, start=1))
    return f"{MERGE_PROMPT_HEADER}\n\n{lines}\n\n{MERGE_PROMPT_FOOTER}"


def build_judge_prompt(prompt: str, prediction: str) -> str:
    if not prompt.strip() or not prediction.strip():
        raise ValidationError("prompt and prediction must be non-empty")
    return JUDGE_PROMPT_TEMPLATE.format(prompt=prompt, prediction=prediction)


def parse_judge_score(raw: str) -> int:
    """First integer in [1, 5] appearing in the reply."""
    for token in _INT_RE.findall(raw):
        value = int(token)
        if 1 <= value <= 5:
            return value
    raise ProtocolError(f"no judge score in [1, 5] found in reply: {raw!r}", raw=raw)


def image_fingerprint(image: np.ndarray) -> str:
    image = np.ascontiguousarray(image)
    digest = hashlib.sha256()
    digest.update(str(image.shape).encode())
    digest.update(str(image.dtype).encode())
    digest.update(image.tobytes())
    return digest.hexdigest()


def encode_image_b64(image: np.ndarray) -> str:
    buf = io.BytesIO()
    Image.fromarray(np.asarray(image, dtype=np.uint8)).save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


class MockBackend:
    """Deterministic stand-in for the remote scorers.

    Scores come from ``score_table`` (keyed by :meth:`score_key`) with a
    hash-derived fallback inside the model's native range; captions from
    ``caption_table`` (keyed by image fingerprint) with a deterministic
    fallback. Everything is pure, so repeated runs produce identical output.
    """

    def __init__(
        self,
        score_table: dict[str, float] | None = None,
        caption_table: dict[str, str] | None = None,
        merged_caption: str | None = None,
        judge_reply: str | None = None,
        judge_score: int = 3,
    ):
        self.score_table = dict(score_table or {})
        self.caption_table = dict(caption_table or {})
        self.merged_caption = merged_caption
        self.judge_reply = judge_reply
        self.judge_score = judge_score

    @staticmethod
    def score_key(prompt: str, image: np.ndarray, model: str = "imagereward") -> str:
        digest = hashlib.sha256()
        digest.update(model.encode())
        digest.update(b"\x00")
        digest.update(prompt.encode())
        digest.update(b"\x00")
        digest.update(image_fingerprint(image).encode())
        return digest.hexdigest()

    def score_image(self, prompt: str, image: np.ndarray, model: str = "imagereward") -> float:
        request = ScoreRequest(prompt=prompt, image=image, model_id=model)
        if model not in MODEL_SCORE_RANGES:
            raise ValidationError(f"unknown scoring model {model!r}")
        key = self.score_key(request.prompt, request.image, model)
        if key in self.score_table:
            return float(self.score_table[key])
        lo, hi = MODEL_SCORE_RANGES[model]
        unit = int(key[:12], 16) / float(16**12)
        return lo + (hi - lo) * unit

    def caption_image(self, image: np.ndarray) -> str:
        if image is None or image.size == 0:
            raise ValidationError("image must be non-empty")
        fp = image_fingerprint(image)
        return self.caption_table.get(fp, f"a rendered object, view {fp[:8]}")

    def merge_captions(self, captions: list[str]) -> str:
        build_merge_prompt(list(captions))
        if self.merged_caption is not None:
            return self.merged_caption
        unique = list(dict.fromkeys(captions))
        return "; ".join(unique)

    def judge_recall(self, prompt: str, prediction: str) -> JudgeVerdict:
        build_judge_prompt(prompt, prediction)
        raw = self.judge_reply if self.judge_reply is not None else str(self.judge_score)
        return JudgeVerdict(score=parse_judge_score(raw), raw_response=raw)

    def health(self) -> dict:
        return {"models": sorted(MODEL_SCORE_RANGES), "mode": "mock"}

    def metadata(self) -> dict:
        return {"mode": "mock", "models": sorted(MODEL_SCORE_RANGES)}


class RemoteBackend:
    """HTTP client for the scoring sidecar.

    Requests are retried with exponential backoff on connection failures and
    5xx replies; 4xx replies and malformed bodies raise immediately. At most
    ``max_in_flight`` requests run concurrently per backend instance, and each
    request carries a correlation id header.
    """

    def __init__(
        self,
        base_url: str,
        retries: int = 3,
        backoff: float = 0.5,
        timeout: float = 60.0,
        max_in_flight: int = 8,
        session: requests.Session | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.retries = max(1, retries)
        self.backoff = backoff
        self.timeout = timeout
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._session = session or requests.Session()

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = f"{self.base_url}{path}"
        headers = {"X-Request-Id": str(uuid.uuid4())}
        last_error: Exception | None = None
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                with self._slots:
                    response = self._session.request(
                        method, url, json=payload, timeout=self.timeout, headers=headers
                    )
            except requests.RequestException as err:
                last_error = err
                continue
            if 200 <= response.status_code < 300:
                try:
                    return response.json()
                except ValueError as err:
                    raise ProtocolError(
                        f"{path}: reply is not JSON", raw=response.text
                    ) from err
            if 400 <= response.status_code < 500:
                raise ProtocolError(
                    f"{path}: HTTP {response.status_code}: {_error_text(response)}",
                    raw=response.text,
                )
            last_error = RuntimeError(f"HTTP {response.status_code}: {_error_text(response)}")
        raise TransportError(
            f"{path}: backend unreachable after {self.retries} attempts: {last_error}",
            attempts=self.retries,
            last_error=last_error,
        )

    def score_image(self, prompt: str, image: np.ndarray, model: str = "imagereward") -> float:
        request = ScoreRequest(prompt=prompt, image=image, model_id=model)
        reply = self._request(
            "POST",
            "/score",
            {"prompt": request.prompt, "image_b64": encode_image_b64(request.image), "model": model},
        )
        try:
            return float(reply["score"])
        except (KeyError, TypeError, ValueError) as err:
            raise ProtocolError(f"/score: malformed reply {reply!r}", raw=str(reply)) from err

    def caption_image(self, image: np.ndarray) -> str:
        if image is None or image.size == 0:
            raise ValidationError("image must be non-empty")
        reply = self._request("POST", "/caption", {"image_b64": encode_image_b64(image)})
        caption = reply.get("caption")
        if not isinstance(caption, str) or not caption:
            raise ProtocolError(f"/caption: malformed reply {reply!r}", raw=str(reply))
        return caption

    def merge_captions(self, captions: list[str]) -> str:
        build_merge_prompt(list(captions))  # validates count and contents
        reply = self._request("POST", "/merge", {"captions": list(captions)})
        caption = reply.get("caption")
        if not isinstance(caption, str) or not caption:
            raise ProtocolError(f"/merge: malformed reply {reply!r}", raw=str(reply))
        return caption

    def judge_recall(self, prompt: str, prediction: str) -> JudgeVerdict:
        build_judge_prompt(prompt, prediction)  # validates inputs
        reply = self._request("POST", "/judge", {"prompt": prompt, "prediction": prediction})
        raw = reply.get("raw")
        if not isinstance(raw, str):
            raise ProtocolError(f"/judge: malformed reply {reply!r}", raw=str(reply))
        return JudgeVerdict(score=parse_judge_score(raw), raw_response=raw)

    def health(self) -> dict:
        return self._request("GET", "/health")

    def metadata(self) -> dict:
        info = {"mode": "remote", "url": self.base_url}
        info.update(self.health())
        return info


def _error_text(response) -> str:
    try:
        return response.json().get("error", response.text)
    except ValueError:
        return response.text
