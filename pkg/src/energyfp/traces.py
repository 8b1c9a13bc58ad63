"""Time series of metric values shared by the exact evolutions and the lab."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

TRACE_SCHEMA = "trace-csv/1"
TRACE_COLUMNS = ("run_id", "t", "metric", "alpha", "value", "err")


def spec_hash(obj) -> str:
    """Stable short hash of a JSON-serializable document."""
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class DecayTrace:
    """Samples ``(t, value, err)`` of one metric along one evolution.

    ``columns`` holds extra per-sample series (predicted law, envelope,
    measured derivative, ...) keyed by name; ``meta`` holds provenance.
    """

    metric: str
    t: np.ndarray
    value: np.ndarray
    err: np.ndarray
    alpha: float | None = None
    n: int = 1
    form: str = ""
    run_id: str = "run"
    columns: dict = field(default_factory=dict, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.value, dtype=float)
        e = np.broadcast_to(np.asarray(self.err, dtype=float), t.shape).copy()
        if t.ndim != 1 or v.shape != t.shape:
            raise ValidationError("times and values must be 1D arrays of equal length")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("trace times must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValidationError("trace values must be finite and nonnegative")
        cols = {k: np.asarray(c, dtype=float) for k, c in self.columns.items()}
        for k, c in cols.items():
            if c.shape != t.shape:
                raise ValidationError(f"column {k!r} has the wrong length")
        for name, arr in (("t", t), ("value", v), ("err", e)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "columns", cols)

    def __len__(self) -> int:
        return self.t.size

    def rows(self):
        """CSV rows in the ``run_id,t,metric,alpha,value,err`` schema."""
        a = "" if self.alpha is None else repr(float(self.alpha))
        for t, v, e in zip(self.t, self.value, self.err):
            yield (self.run_id, repr(float(t)), self.metric, a, repr(float(v)), repr(float(e)))

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "metric": self.metric,
            "alpha": self.alpha,
            "n": self.n,
            "form": self.form,
            "t": self.t.tolist(),
            "value": self.value.tolist(),
            "err": self.err.tolist(),
            "columns": {k: c.tolist() for k, c in self.columns.items()},
            "meta": self.meta,
        }
