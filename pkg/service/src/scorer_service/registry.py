"""Model registry: load attempts, status tracking, per-model serialization.

Load failures are recorded, not raised: the affected routes answer 503 while
/health keeps working and lists exactly the scorer ids that /score accepts.
Each model runs behind its own lock (a batch queue of depth max_batch_size,
which is 1 for the bundled CPU models), so the service stays safe under the
client default of 8 concurrent requests.
"""

from __future__ import annotations

import threading
import traceback
from dataclasses import dataclass, field
from typing import Callable


class UnknownModelError(Exception):
    """Model id was never configured: a client error (400)."""


class ModelUnavailableError(Exception):
    """Model is configured but failed to load: a service error (503)."""


@dataclass
class ModelEntry:
    name: str
    kind: str  # "scorer" | "captioner"
    loader: Callable[[], object]
    status: str = "pending"  # pending | loaded | failed
    error: str | None = None
    instance: object | None = None
    version: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock)


class ModelRegistry:
    def __init__(self, device: str = "cpu", deterministic: bool = True, max_batch_size: int = 1):
        self.device = device
        self.deterministic = deterministic
        self.max_batch_size = max_batch_size
        self._entries: dict[str, ModelEntry] = {}

    def register(self, name: str, kind: str, loader: Callable[[], object]) -> None:
        self._entries[name] = ModelEntry(name=name, kind=kind, loader=loader)

    def load_all(self) -> None:
        for entry in self._entries.values():
            try:
                entry.instance = entry.loader()
                entry.version = getattr(entry.instance, "version", None)
                entry.status = "loaded"
                entry.error = None
            except Exception as err:
                entry.status = "failed"
                entry.error = f"{type(err).__name__}: {err}"
                traceback.print_exc()

    def _get(self, name: str, kind: str) -> ModelEntry:
        entry = self._entries.get(name)
        if entry is None or entry.kind != kind:
            raise UnknownModelError(f"unknown {kind} id {name!r}")
        if entry.status != "loaded":
            raise ModelUnavailableError(f"{kind} {name!r} unavailable: {entry.error}")
        return entry

    def run_scorer(self, name: str, prompt: str, image) -> float:
        entry = self._get(name, "scorer")
        with entry.lock:
            return float(entry.instance.score(prompt, image))

    def run_captioner(self, name: str, image) -> str:
        entry = self._get(name, "captioner")
        with entry.lock:
            return str(entry.instance.caption(image))

    def loaded_scorers(self) -> list[str]:
        return sorted(
            n for n, e in self._entries.items() if e.kind == "scorer" and e.status == "loaded"
        )

    def loaded_captioner(self) -> str | None:
        for name, entry in sorted(self._entries.items()):
            if entry.kind == "captioner" and entry.status == "loaded":
                return name
        return None

    def detail(self) -> dict:
        return {
            name: {"kind": e.kind, "status": e.status, "version": e.version, "error": e.error}
            for name, e in sorted(self._entries.items())
        }
