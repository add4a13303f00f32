"""Lower bounds on the minimal energy as a function of beta.

The minimal energy ``E_alpha(beta)`` is concave and non-decreasing in beta,
so any two values known exactly give a lower bound on the chord between
them.  A uniform negative bound on the second beta-derivative sharpens the
chord by ``t(1-t)(c/2)(beta1 - beta0)**2``.  Exact anchor values come from
three sources: ``E_alpha(alpha) = 0``, the sphere minimizer at ``beta = 2``
(n >= 2), and the unit simplex at ``beta1(alpha)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .closed_forms import shell_min_energy_beta2, simplex_energy
from .energy import Params
from .errors import DomainError, UnsupportedRangeError
from .roots import bisect_root

CSV_HEADER = "alpha,beta,n,method,lower_bound,anchor0_beta,anchor0_E,anchor1_beta,anchor1_E"

SOURCE_ZERO = "E(alpha)=0"
SOURCE_SHELL = "sphere minimizer at beta=2"
SOURCE_SIMPLEX = "unit simplex at beta1(alpha)"
SOURCE_USER = "supplied"
SOURCE_TWO_STEP = "intermediate lower bound"


class BoundMethod(str, enum.Enum):
    LINEAR = "LinearInterp"
    STRONG = "StrongConcaveInterp"
    TWO_STEP = "TwoStep"
    EXACT = "Exact"


@dataclass(frozen=True)
class Anchor:
    beta: float
    energy: float
    source: str = SOURCE_USER


@dataclass(frozen=True)
class BoundReport:
    alpha: float
    beta: float
    n: Optional[int]
    lower_bound: float
    method: BoundMethod
    anchors: Tuple[Anchor, ...] = field(default_factory=tuple)
    beta1_prime: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "anchors", tuple(self.anchors))
        for a in self.anchors:
            if not 0 < a.beta <= self.alpha:
                raise DomainError(f"anchor beta={a.beta} outside (0, alpha={self.alpha}]")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "n": self.n,
            "method": self.method.value,
            "lower_bound": self.lower_bound,
            "anchors": [
                {"beta": a.beta, "energy": a.energy, "source": a.source} for a in self.anchors
            ],
            "beta1_prime": self.beta1_prime,
        }

    def csv_row(self) -> str:
        def g(x):
            return "" if x is None else f"{x:.12g}"

        a0 = self.anchors[0] if self.anchors else None
        a1 = self.anchors[1] if len(self.anchors) > 1 else a0
        cells = [
            g(self.alpha), g(self.beta), "" if self.n is None else str(self.n),
            self.method.value, g(self.lower_bound),
            g(a0.beta if a0 else None), g(a0.energy if a0 else None),
            g(a1.beta if a1 else None), g(a1.energy if a1 else None),
        ]
        return ",".join(cells)


def _check_order(alpha, beta0, beta, beta1):
    if not (0 < beta0 <= beta <= beta1 <= alpha and beta0 < beta1):
        raise DomainError(
            f"need 0 < beta0 <= beta <= beta1 <= alpha with beta0 < beta1, got "
            f"beta0={beta0}, beta={beta}, beta1={beta1}, alpha={alpha}"
        )


def _chord(beta0, E0, beta1, E1, beta):
    t = (beta - beta0) / (beta1 - beta0)
    return t, (1 - t) * E0 + t * E1


def linear_interpolation_bound(alpha, beta0, E0, beta1, E1, beta, n=None,
                               sources=(SOURCE_USER, SOURCE_USER)) -> BoundReport:
    _check_order(alpha, beta0, beta, beta1)
    _, value = _chord(beta0, E0, beta1, E1, beta)
    return BoundReport(alpha, beta, n, value, BoundMethod.LINEAR,
                       (Anchor(beta0, E0, sources[0]), Anchor(beta1, E1, sources[1])))


def strong_concavity_parameter(alpha, beta1, n) -> float:
    """Magnitude ``c`` of the uniform bound ``d^2E/dbeta^2 <= -c`` on ``(0, beta1]``."""
    if not 0 < beta1 <= alpha:
        raise DomainError(f"need 0 < beta1 <= alpha, got beta1={beta1}, alpha={alpha}")
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    return 0.5 / beta1**2 * n / (n + 1) * (1.0 / beta1 - 1.0 / alpha)


def strong_interpolation_bound(alpha, beta0, E0, beta1, E1, beta, n,
                               sources=(SOURCE_USER, SOURCE_USER)) -> BoundReport:
    _check_order(alpha, beta0, beta, beta1)
    c = strong_concavity_parameter(alpha, beta1, n)
    t, value = _chord(beta0, E0, beta1, E1, beta)
    value += t * (1 - t) * 0.5 * c * (beta1 - beta0) ** 2
    return BoundReport(alpha, beta, n, value, BoundMethod.STRONG,
                       (Anchor(beta0, E0, sources[0]), Anchor(beta1, E1, sources[1])))


def two_step_bound(alpha, beta0, E0, beta, n, grid_size=64, *, beta1=None, E1=0.0,
                   sources=(SOURCE_USER, SOURCE_ZERO)) -> BoundReport:
    """Best bound through an intermediate exponent ``beta1'`` in ``(beta, beta1)``.

    The outer anchor defaults to ``(alpha, 0)``.  For each candidate
    ``beta1'`` (the cell midpoints of a uniform grid of ``grid_size`` nodes
    on ``[beta, beta1]``) the value at ``beta1'`` is bounded from below
    using the outer anchors, and that bound then serves as the upper anchor
    for a strong interpolation at ``beta``.
    """
    if grid_size < 2:
        raise DomainError(f"grid_size must be at least 2, got {grid_size}")
    if beta1 is None:
        beta1 = alpha
    if not (0 < beta0 < beta < beta1 <= alpha):
        raise DomainError(
            f"need 0 < beta0 < beta < beta1 <= alpha, got {beta0}, {beta}, {beta1}, {alpha}"
        )
    nodes = np.linspace(beta, beta1, grid_size)
    best = None
    for b1p in 0.5 * (nodes[:-1] + nodes[1:]):
        b1p = float(b1p)
        mid = strong_interpolation_bound(alpha, beta0, E0, beta1, E1, b1p, n).lower_bound
        rep = strong_interpolation_bound(alpha, beta0, E0, b1p, mid, beta, n)
        if best is None or rep.lower_bound > best[0]:
            best = (rep.lower_bound, b1p, mid)
    value, b1p, mid = best
    anchors = (Anchor(beta0, E0, sources[0]), Anchor(b1p, mid, SOURCE_TWO_STEP),
               Anchor(beta1, E1, sources[1]))
    return BoundReport(alpha, beta, n, value, BoundMethod.TWO_STEP, anchors, beta1_prime=b1p)


def _simplex_anchor_base(n: int) -> Tuple[float, float]:
    """(log c, upper alpha edge) for the equation ``c**a / a = c**b / b``."""
    if n == 1:
        return math.log(1.5), 3.0
    return 0.5 * math.log(2.0), 4.0


def beta1_range(n: int) -> Tuple[float, float]:
    """Closed-open alpha interval on which ``beta1_of_alpha`` is defined."""
    log_c, upper = _simplex_anchor_base(n)
    return 1.0 / log_c, upper


def beta1_of_alpha(alpha: float, n: int) -> float:
    """Smallest ``b`` with ``c**alpha/alpha = c**b/b``; c = 3/2 for n = 1, sqrt(2) otherwise.

    ``c**g/g`` decreases on ``(0, 1/log c)`` and increases afterwards, so
    the root is bracketed by a small exponent and the turning point.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"dimension must be a positive integer, got {n}")
    lo_alpha, hi_alpha = beta1_range(n)
    if not lo_alpha <= alpha < hi_alpha:
        raise DomainError(f"alpha={alpha} outside [{lo_alpha:.12g}, {hi_alpha}) for n={n}")
    log_c, _ = _simplex_anchor_base(n)
    turn = 1.0 / log_c
    if alpha == turn:
        return alpha
    target = math.exp(alpha * log_c) / alpha

    def g(b):
        return math.exp(b * log_c) / b - target

    lo = 0.5 * turn
    while g(lo) <= 0:
        lo *= 0.5
    return bisect_root(g, lo, turn)


def _in_beta1_range(alpha: float, n: int) -> bool:
    lo, hi = beta1_range(n)
    return lo <= alpha < hi


def _shell_anchor_applies(alpha: float, n: int) -> bool:
    return n >= 2 and 2 < alpha < 4


def known_anchors(alpha: float, n: int) -> List[Anchor]:
    """All exact minimal energies available at this (alpha, n), sorted by beta."""
    anchors = []
    if _shell_anchor_applies(alpha, n):
        anchors.append(Anchor(2.0, shell_min_energy_beta2(alpha, n), SOURCE_SHELL))
    if _in_beta1_range(alpha, n):
        b1 = beta1_of_alpha(alpha, n)
        if b1 < alpha:
            anchors.append(Anchor(b1, simplex_energy(Params(alpha, b1, n)), SOURCE_SIMPLEX))
    anchors.append(Anchor(float(alpha), 0.0, SOURCE_ZERO))
    anchors.sort(key=lambda a: a.beta)
    return anchors


def known_min_energy_at(alpha: float, beta: float, n: int,
                        tol: float = 1e-12) -> Optional[Tuple[float, str]]:
    """Exact minimal energy at (alpha, beta, n) when known, else None."""
    if beta == alpha:
        return 0.0, SOURCE_ZERO
    Params(alpha, beta, n)
    for a in known_anchors(alpha, n):
        if abs(a.beta - beta) <= tol:
            return a.energy, a.source
    return None


def candidate_bounds(alpha: float, beta: float, n: int, grid_size: int = 64) -> List[BoundReport]:
    """Every bound obtainable from pairs of known anchors that straddle beta."""
    if beta != alpha:
        Params(alpha, beta, n)
    if beta < 2:
        raise UnsupportedRangeError(f"bounds cover beta >= 2 only, got beta={beta}")
    anchors = known_anchors(alpha, n)
    for a in anchors:
        if abs(a.beta - beta) <= 1e-12:
            return [BoundReport(alpha, beta, n, a.energy, BoundMethod.EXACT, (a,))]
    lower = [a for a in anchors if a.beta < beta]
    upper = [a for a in anchors if a.beta > beta]
    if not lower or not upper:
        raise UnsupportedRangeError(
            f"no known anchors bracket beta={beta} for alpha={alpha}, n={n}"
        )
    reports = []
    for a0 in lower:
        for a1 in upper:
            src = (a0.source, a1.source)
            args = (alpha, a0.beta, a0.energy, a1.beta, a1.energy, beta)
            reports.append(linear_interpolation_bound(*args, n=n, sources=src))
            reports.append(strong_interpolation_bound(*args, n, sources=src))
            reports.append(two_step_bound(alpha, a0.beta, a0.energy, beta, n, grid_size,
                                          beta1=a1.beta, E1=a1.energy, sources=src))
    return reports


def best_lower_bound(alpha: float, beta: float, n: int, grid_size: int = 64) -> BoundReport:
    """Largest lower bound on ``E_alpha(beta)`` over all anchor pairs and methods."""
    reports = candidate_bounds(alpha, beta, n, grid_size)
    return max(reports, key=lambda r: r.lower_bound)
