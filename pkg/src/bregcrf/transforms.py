"""Per-coordinate gradient transforms.

Five kinds, all odd with s(0) = 0:

    identity      s(u) = u                          (plain SGD step)
    rational_g1   s(u) = u / (u^2 + eps)            (inverse-variance scaling)
    arctan_g1     s(u) = arctan(u / sqrt(eps))
    erf_g2        s(u) = erf(alpha * u)
    gd_g3         s(u) = 2*arctan(exp(beta*u)) - pi/2   (Gudermannian)

The sigmoid kinds saturate, so shrinking gradient coordinates get a larger
multiplicative boost than large ones.  An optional lookup table trades exact
evaluation for a rounded-grid lookup inside [-range, range]; inputs outside
the range always fall back to exact evaluation.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf as _erf

KINDS = ("identity", "rational_g1", "arctan_g1", "erf_g2", "gd_g3")


@dataclass(frozen=True)
class TransformSpec:
    """Transform kind plus its hyperparameter (eps for rational/arctan,
    alpha for erf, beta for gd; ignored for identity) and optional
    lookup-table settings."""

    kind: str
    hyper: float = 1.0
    table_resolution: int | None = None
    table_range: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind != "identity" and not self.hyper > 0:
            raise ValueError("hyperparameter must be positive")
        if self.table_resolution is not None and self.table_resolution < 2:
            raise ValueError("table resolution must be at least 2")
        if not self.table_range > 0:
            raise ValueError("table range must be positive")


def _exact_fn(spec: TransformSpec):
    h = spec.hyper
    if spec.kind == "identity":
        return lambda u: u
    if spec.kind == "rational_g1":
        return lambda u: u / (u * u + h)
    if spec.kind == "arctan_g1":
        root = math.sqrt(h)
        return lambda u: np.arctan(u / root)
    if spec.kind == "erf_g2":
        return lambda u: _erf(h * u)
    # gd(x) = 2*arctan(exp(x)) - pi/2 == 2*arctan(tanh(x/2)); the tanh form
    # cannot overflow for large |u|.
    return lambda u: 2.0 * np.arctan(np.tanh(0.5 * h * u))


class Transform:
    """Immutable, vectorized transform; thread-safe after construction."""

    def __init__(self, spec: TransformSpec):
        self.spec = spec
        self._fn = _exact_fn(spec)
        self._table = None
        self._step = 0.0
        if spec.table_resolution is not None:
            # resolution+1 samples on [0, range] at spacing range/resolution;
            # oddness covers the negative half.
            self._step = spec.table_range / spec.table_resolution
            grid = np.arange(spec.table_resolution + 1) * self._step
            self._table = np.asarray(self._fn(grid), dtype=np.float64)

    @property
    def kind(self) -> str:
        return self.spec.kind

    @property
    def slope_at_zero(self) -> float:
        """Analytic derivative of the transform at u = 0."""
        h = self.spec.hyper
        if self.spec.kind == "identity":
            return 1.0
        if self.spec.kind == "rational_g1":
            return 1.0 / h
        if self.spec.kind == "arctan_g1":
            return 1.0 / math.sqrt(h)
        if self.spec.kind == "erf_g2":
            return 2.0 * h / math.sqrt(math.pi)
        return h

    def apply(self, u):
        """Evaluate the transform; accepts scalars or arrays, rejects
        non-finite input."""
        arr = np.asarray(u, dtype=np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValueError("transform input must be finite")
        if self._table is None:
            out = self._fn(arr)
        else:
            out = self._table_apply(arr)
        if arr.ndim == 0:
            return float(out)
        return out

    def _table_apply(self, arr: np.ndarray) -> np.ndarray:
        absu = np.abs(arr)
        inside = absu <= self.spec.table_range
        out = np.empty_like(arr, dtype=np.float64)
        if np.any(inside):
            k = np.rint(absu[inside] / self._step).astype(np.int64)
            out[inside] = np.copysign(self._table[k], arr[inside])
        if not np.all(inside):
            outside = ~inside
            out[outside] = self._fn(arr[outside])
        return out

    def __repr__(self) -> str:
        return f"Transform({self.spec!r})"


def make_transform(spec: TransformSpec) -> Transform:
    return Transform(spec)


def build_table(transform: Transform, resolution: int, table_range: float = 1.0) -> Transform:
    """Return a table-backed copy of a transform."""
    spec = dataclasses.replace(
        transform.spec, table_resolution=resolution, table_range=table_range
    )
    return Transform(spec)
