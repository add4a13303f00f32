"""Power-law kernel, pairwise interaction energy and its beta-derivatives.

The kernel is ``W(r) = r**alpha/alpha - r**beta/beta`` and the energy of a
discrete probability measure is half the double sum of the kernel over all
ordered pairs of atoms, self-pairs included.  This pairwise sum is the
reference against which every closed form in the package is checked, so it
is written plainly: one dense distance matrix, no acceleration.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Union

import numpy as np

from .errors import DomainError

ArrayLike = Union[float, np.ndarray]

WEIGHT_SUM_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Exponents and ambient dimension of the kernel.

    Requires ``alpha > beta > -n`` and ``n >= 1``.
    """

    alpha: float
    beta: float
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise DomainError("alpha and beta must be finite")
        if not self.alpha > self.beta:
            raise DomainError(f"need alpha > beta, got alpha={self.alpha}, beta={self.beta}")
        if not self.beta > -self.n:
            raise DomainError(f"need beta > -n, got beta={self.beta}, n={self.n}")


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point configuration in R^n.

    ``points`` has shape ``(k, n)`` and ``weights`` shape ``(k,)``.  Both are
    stored as read-only float arrays.  Weights must be non-negative and sum
    to one within ``1e-12``.
    """

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, copy=True)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DomainError(
                "points must be a non-empty list of vectors of a common dimension"
            )
        k = pts.shape[0]
        if self.weights is None:
            w = np.full(k, 1.0 / k)
        else:
            w = np.array(self.weights, dtype=float, copy=True).reshape(-1)
        if w.shape != (k,):
            raise DomainError(f"expected {k} weights, got {w.shape[0]}")
        if not np.all(np.isfinite(pts)) or not np.all(np.isfinite(w)):
            raise DomainError("points and weights must be finite")
        if np.any(w < 0):
            raise DomainError("weights must be non-negative")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise DomainError(f"weights sum to {total!r}, expected 1 within {WEIGHT_SUM_TOL}")
        pts.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.points.shape[1]

    @property
    def k(self) -> int:
        return self.points.shape[0]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        try:
            points = data["points"]
        except (KeyError, TypeError):
            raise DomainError("measure JSON needs a 'points' array") from None
        if not isinstance(points, list) or not points:
            raise DomainError("measure JSON 'points' must be a non-empty list")
        rows = [p if isinstance(p, list) else [p] for p in points]
        if len({len(p) for p in rows}) != 1:
            raise DomainError("all points must have the same dimension")
        n = data.get("n", len(rows[0]))
        if n != len(rows[0]):
            raise DomainError(f"declared n={n} but points have dimension {len(rows[0])}")
        return cls(np.array(rows, dtype=float), data.get("weights"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "DiscreteMeasure":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"malformed measure JSON: {exc}") from None
        return cls.from_dict(data)

    def save(self, path: Union[str, PathLike]) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path: Union[str, PathLike]) -> "DiscreteMeasure":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _as_output(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def kernel_value(p: Params, r: ArrayLike) -> ArrayLike:
    """Evaluate ``r**alpha/alpha - r**beta/beta``; zero at ``r = 0`` when beta > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(np.isnan(r)):
        raise DomainError("distance must be non-negative")
    zero = r == 0
    if p.beta <= 0 and np.any(zero):
        raise DomainError("kernel is singular at r = 0 when beta <= 0")
    if p.beta == 0:
        raise DomainError("beta = 0 is not a valid power-law exponent")
    with np.errstate(divide="ignore"):
        out = r**p.alpha / p.alpha - r**p.beta / p.beta
    out = np.where(zero, 0.0, out)
    return _as_output(out)


def _require_positive_beta(beta: float) -> None:
    if not beta > 0:
        raise DomainError(f"beta-derivatives require beta > 0, got {beta}")


def kernel_dbeta(p: Params, r: ArrayLike) -> ArrayLike:
    """d/dbeta of the kernel: ``r**b (1 - log r**b) / b**2``, zero at r = 0."""
    _require_positive_beta(p.beta)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("distance must be non-negative")
    b = p.beta
    pos = r > 0
    safe = np.where(pos, r, 1.0)
    s = b * np.log(safe)
    out = np.where(pos, np.exp(s) * (1.0 - s) / b**2, 0.0)
    return _as_output(out)


def kernel_d2beta(p: Params, r: ArrayLike) -> ArrayLike:
    """d^2/dbeta^2 of the kernel: ``-r**b (s**2 - 2 s + 2) / b**3`` with ``s = log r**b``."""
    _require_positive_beta(p.beta)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("distance must be non-negative")
    b = p.beta
    pos = r > 0
    safe = np.where(pos, r, 1.0)
    s = b * np.log(safe)
    out = np.where(pos, -np.exp(s) * (s * s - 2.0 * s + 2.0) / b**3, 0.0)
    return _as_output(out)


def pairwise_distances(points: np.ndarray) -> np.ndarray:
    """Dense Euclidean distance matrix, exactly zero on the diagonal."""
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _check_dims(p: Params, mu: DiscreteMeasure) -> None:
    if mu.n != p.n:
        raise DomainError(f"measure lives in R^{mu.n} but params have n={p.n}")


def _double_sum(w: np.ndarray, matrix: np.ndarray) -> float:
    return 0.5 * float(w @ matrix @ w)


def energy(p: Params, mu: DiscreteMeasure) -> float:
    """Interaction energy: half the weighted sum of the kernel over all ordered pairs."""
    _check_dims(p, mu)
    return _double_sum(mu.weights, kernel_value(p, pairwise_distances(mu.points)))


def energy_dbeta(p: Params, mu: DiscreteMeasure) -> float:
    _check_dims(p, mu)
    return _double_sum(mu.weights, kernel_dbeta(p, pairwise_distances(mu.points)))


def energy_d2beta(p: Params, mu: DiscreteMeasure) -> float:
    """Second beta-derivative of the energy; never positive."""
    _check_dims(p, mu)
    return _double_sum(mu.weights, kernel_d2beta(p, pairwise_distances(mu.points)))


def diameter_bound(beta: float) -> float:
    """Support-diameter bound ``e**(1/beta)`` satisfied by global minimizers."""
    _require_positive_beta(beta)
    return math.exp(1.0 / beta)
