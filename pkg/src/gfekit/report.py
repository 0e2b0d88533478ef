"""Machine-readable run reports."""
from __future__ import annotations

import json
import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, Iterator, List, Optional

from . import __version__

SCHEMA_VERSION = "1"
VERDICTS = ("proved", "probable", "failed")
_FROM_STATUS = {"ProvedZero": "proved", "ProbablyZero": "probable", "NonZero": "failed"}


def load_schema() -> Dict[str, object]:
    return json.loads(resources.files("gfekit.schemas").joinpath("report.schema.json").read_text(encoding="utf-8"))


def _clean(v):
    """JSON-safe copy: mp numbers become floats, non-finite floats become strings."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return v
    try:
        f = float(v)
    except (TypeError, ValueError):
        return str(v)
    return f if math.isfinite(f) else repr(f)


@dataclass
class Check:
    name: str
    verdict: str
    tolerance: Optional[float] = None
    max_residual: Optional[float] = None
    witness: Optional[Dict[str, object]] = None
    wall_time: Optional[float] = None
    detail: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")

    @property
    def passed(self) -> bool:
        return self.verdict != "failed"

    def to_json(self) -> Dict[str, object]:
        out = {
            "name": self.name,
            "verdict": self.verdict,
            "tolerance": _clean(self.tolerance),
            "max_residual": _clean(self.max_residual),
            "witness": _clean(self.witness),
            "wall_time": self.wall_time,
        }
        if self.detail:
            out["detail"] = _clean(self.detail)
        return out


def verdict_from_status(status: str) -> str:
    return _FROM_STATUS[status]


def threshold_check(name: str, value: float, tol: float, witness=None, proved: bool = False, **detail) -> Check:
    """``probable`` (or ``proved``) when ``value <= tol``, ``failed`` with ``witness`` otherwise."""
    ok = value is not None and value <= tol
    verdict = ("proved" if proved else "probable") if ok else "failed"
    return Check(name, verdict, tol, value, None if ok else (witness or {"value": value}), detail=detail)


@dataclass
class Report:
    command: str
    parameters: Dict[str, object]
    seed: int
    timings: bool = False
    checks: List[Check] = field(default_factory=list)
    observations: List[Dict[str, object]] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        if any(c.name == check.name for c in self.checks):
            raise ValueError(f"check {check.name!r} already in the report")
        self.checks.append(check)
        return check

    @contextmanager
    def timed(self) -> Iterator[Dict[str, object]]:
        """Collects checks built inside the block and stamps their wall time."""
        slot: Dict[str, object] = {"checks": []}
        start = time.perf_counter()
        yield slot
        elapsed = time.perf_counter() - start
        for c in slot["checks"]:
            if self.timings:
                c.wall_time = round(elapsed, 6)
            self.add(c)

    def observe(self, name: str, detail: Dict[str, object]):
        self.observations.append({"name": name, "detail": _clean(detail)})

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def to_json(self) -> Dict[str, object]:
        out = {
            "schema_version": SCHEMA_VERSION,
            "toolkit_version": __version__,
            "command": self.command,
            "parameters": _clean(self.parameters),
            "seed": self.seed,
            "checks": [c.to_json() for c in self.checks],
            "observations": self.observations,
            "passed": self.passed,
        }
        if self.outputs:
            out["outputs"] = list(self.outputs)
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
