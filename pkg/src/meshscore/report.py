"""Evaluation reports: a self-describing JSON document per (mesh, prompt) run.

Serialization is canonical (sorted keys, fixed separators, repr floats), so
identical evaluations produce byte-identical documents. Every configuration
knob that influences scores is recorded; timing data is optional and omitted
entirely in deterministic runs so goldens stay stable.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError

REPORT_SCHEMA = "meshscore/report-v1"


@dataclass(frozen=True)
class EvaluationReport:
    report_id: str
    method: str
    mesh: dict
    prompt: dict
    capture: dict
    render: dict
    convolution: dict
    scorer: dict
    quality: dict | None
    alignment: dict | None
    status: str = "final"
    error: dict | None = None
    timings: dict | None = None
    schema: str = REPORT_SCHEMA

    def to_dict(self) -> dict:
        data = asdict(self)
        if data["timings"] is None:
            del data["timings"]
        return _jsonable(data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        if data.get("schema") != REPORT_SCHEMA:
            raise ValidationError(f"unsupported report schema {data.get('schema')!r}")
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in data.items() if k in known})

    @classmethod
    def from_json(cls, text: str) -> "EvaluationReport":
        return cls.from_dict(json.loads(text))


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def report_key(mesh_sha: str, prompt_id: str, method: str, config_fingerprint: str) -> str:
    digest = hashlib.sha256(
        f"{mesh_sha}|{prompt_id}|{method}|{config_fingerprint}".encode()
    )
    return digest.hexdigest()[:16]


def write_report(report: EvaluationReport, out_dir: str | Path, key: str) -> Path:
    """Atomic write: temp file in the target directory, then rename."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    final = out_dir / f"report-{key}.json"
    tmp = out_dir / f".report-{key}.json.tmp"
    tmp.write_text(report.to_json(), encoding="utf-8")
    os.replace(tmp, final)
    return final


def load_reports(directory: str | Path) -> list[EvaluationReport]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"report directory not found: {directory}")
    reports = []
    for path in sorted(directory.glob("report-*.json")):
        reports.append(EvaluationReport.from_json(path.read_text(encoding="utf-8")))
    if not reports:
        raise ValidationError(f"no reports found in {directory}")
    return reports
