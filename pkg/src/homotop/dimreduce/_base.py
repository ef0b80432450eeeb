from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .._validation import ValidationError


@dataclass(frozen=True)
class MethodParams:
    """Knobs for the five reduction methods; unused fields are ignored per method."""

    n_components: int = 3
    n_neighbors: int = 10
    epsilon: float = np.inf
    sigma: float | None = None  # LEIM heat-kernel width / Gaussian KRR width
    lam: float = 1e-3  # ridge penalty
    kernel: str = "gaussian"
    contrast: str = "logcosh"
    alpha: float = 1.0  # logcosh contrast parameter, in [1, 2]
    perplexity: float = 30.0
    learning_rate: float = 200.0
    n_iter: int = 1000
    momentum_switch: int = 250
    symmetrize: bool = False
    tol: float = 1e-6
    max_iter: int = 1000
    strict: bool = True  # FastICA: raise on non-convergence instead of keeping the last iterate

    def __post_init__(self):
        if self.n_components < 1:
            raise ValidationError("n_components must be >= 1")
        if self.sigma is not None and not self.sigma > 0:
            raise ValidationError("sigma must be > 0")
        if self.lam < 0:
            raise ValidationError("lam must be >= 0")
        if not self.learning_rate > 0:
            raise ValidationError("learning_rate must be > 0")
        if self.n_iter < 1:
            raise ValidationError("n_iter must be >= 1")
        if not 1.0 <= self.alpha <= 2.0:
            raise ValidationError("alpha must lie in [1, 2]")

    def as_dict(self):
        out = {}
        for key, value in self.__dict__.items():
            if isinstance(value, float) and not np.isfinite(value):
                value = "inf"
            out[key] = value
        return out


def param_hash(params):
    """Short stable digest of a parameter mapping."""
    blob = json.dumps(params, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class Embedding:
    """Low-dimensional coordinates plus provenance."""

    coords: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    support: np.ndarray | None = None  # input rows kept, when a method drops some
    info: dict = field(default_factory=dict, compare=False)  # diagnostics, not serialised

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=np.float64)
        if coords.ndim != 2 or not np.all(np.isfinite(coords)):
            raise ValidationError(f"{self.method}: embedding must be a finite 2-D array")
        object.__setattr__(self, "coords", coords)

    @property
    def n_components(self):
        return self.coords.shape[1]

    def to_csv(self, path=None):
        """CSV with header ``method,param_hash,c1..cm``; JSON sidecar holds the params."""
        digest = param_hash(self.params)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["method", "param_hash"] + [f"c{j + 1}" for j in range(self.n_components)])
        for row in self.coords:
            writer.writerow([self.method, digest] + [repr(float(v)) for v in row])
        text = buf.getvalue()
        if path is not None:
            path = Path(path)
            path.write_text(text, encoding="utf-8")
            sidecar = {"method": self.method, "param_hash": digest, "params": self.params}
            path.with_suffix(".json").write_text(
                json.dumps(sidecar, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or rows[0][:2] != ["method", "param_hash"]:
            raise ValidationError(f"{path}: not an embedding CSV")
        method = rows[1][0] if len(rows) > 1 else ""
        coords = np.array([[float(v) for v in r[2:]] for r in rows[1:]])
        params = {}
        sidecar = path.with_suffix(".json")
        if sidecar.exists():
            params = json.loads(sidecar.read_text(encoding="utf-8")).get("params", {})
        return cls(coords.reshape(len(rows) - 1, len(rows[0]) - 2), method, params)


def fix_signs(vectors):
    """Flip columns so the first non-negligible entry of each is positive."""
    vectors = np.array(vectors, dtype=np.float64, copy=True)
    for j in range(vectors.shape[1]):
        col = vectors[:, j]
        scale = np.max(np.abs(col))
        if scale == 0:
            continue
        first = np.nonzero(np.abs(col) > 1e-10 * scale)[0][0]
        if col[first] < 0:
            vectors[:, j] = -col
    return vectors
