"""Deterministic protocol stubs: stand-ins for offline protocol testing.

These produce stable hash-derived values with the right shapes and ranges but
no semantics. /health advertises ``deterministic_stub: true`` when they are
serving, so clients can tell them apart from real models.
"""

from __future__ import annotations

import hashlib

import numpy as np


def _digest(*parts: bytes) -> int:
    h = hashlib.sha256()
    for part in parts:
        h.update(part)
        h.update(b"\x1f")
    return int(h.hexdigest()[:12], 16)


class StubScorer:
    def __init__(self, name: str, lo: float, hi: float):
        self.lo, self.hi = lo, hi
        self.version = f"stub-{name}"
        self._name = name.encode()

    def score(self, prompt: str, image: np.ndarray) -> float:
        image = np.ascontiguousarray(image)
        unit = _digest(self._name, prompt.encode(), image.tobytes()) / float(16**12)
        return self.lo + (self.hi - self.lo) * unit


class StubCaptioner:
    version = "stub-captioner"

    def caption(self, image: np.ndarray) -> str:
        image = np.ascontiguousarray(image)
        tag = _digest(b"caption", image.tobytes()) % 10**6
        return f"a test object, view {tag:06d}"


STUB_RANGES = {"clip": (-1.0, 1.0), "imagereward": (-2.5, 2.5)}


def stub_loader(name: str):
    if name in STUB_RANGES:
        lo, hi = STUB_RANGES[name]
        return lambda: StubScorer(name, lo, hi)
    return lambda: StubCaptioner()
