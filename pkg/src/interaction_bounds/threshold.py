"""Lower bounds on the simplex transition threshold.

Two unimodal functions of the exponent drive the bounds.  ``phi`` compares
the unit simplex with the best cross-polytope: for ``alpha > beta`` the
cross-polytope wins exactly when ``phi(alpha) > phi(beta)``.  The largest
solution of ``phi(alpha) = phi(beta)`` is therefore a lower bound on the
threshold.  ``f_underline`` is the older Euler-Lagrange based function,
handled by the same root machinery.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .closed_forms import optimal_cross_polytope_energy, simplex_energy
from .energy import Params
from .errors import BracketError, DomainError, PropertyViolation
from .roots import bisect_root, expand_right

SQRT2 = math.sqrt(2.0)
PLATEAU_TOL = 1e-12
CSV_HEADER = "beta,alpha_star_phi,alpha_star_f,delta"


class ThresholdMethod(str, enum.Enum):
    PHI = "PhiBased"
    F = "FBased"


class Competition(str, enum.Enum):
    SIMPLEX_BEATEN = "SimplexBeaten"
    SIMPLEX_AT_LEAST_TIED = "SimplexAtLeastTied"


@dataclass(frozen=True)
class ThresholdResult:
    n: int
    beta: float
    alpha_star: float
    method: ThresholdMethod
    bracket: Tuple[float, float]
    residual: float

    @property
    def degenerate(self) -> bool:
        return self.alpha_star == self.beta

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "beta": self.beta,
            "alpha_star": self.alpha_star,
            "method": self.method.value,
            "bracket": list(self.bracket),
            "residual": self.residual,
        }


def _check_n(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise DomainError(f"dimension must be an integer >= {minimum}, got {n}")


def phi(n: int, gamma):
    """``-((n+1)(2n-2+2**(gamma/2))/(2n**2))**(1/gamma)``; accepts arrays."""
    _check_n(n)
    g = np.asarray(gamma, dtype=float)
    if np.any(g <= 0):
        raise DomainError("phi is defined for gamma > 0")
    # log of the base, kept finite for large gamma
    with np.errstate(divide="ignore"):
        log_sum = np.logaddexp(math.log(2 * n - 2) if n > 1 else -np.inf, 0.5 * g * math.log(2.0))
    log_base = math.log((n + 1) / (2 * n * n)) + log_sum
    with np.errstate(over="ignore"):
        out = -np.exp(log_base / g)
    return float(out) if out.ndim == 0 else out


def f_underline(n: int, t):
    """Unimodal comparison function from the earlier Euler-Lagrange bound; accepts arrays."""
    _check_n(n)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("f_underline is defined for t > 0")
    if n == 1:
        out = (0.5 - np.exp2(-t)) / t
    else:
        out = (n - (2 * n / (n + 1)) ** (t / 2) - n * ((n - 1) / (n + 1)) ** (t / 2)) / t
    return float(out) if out.ndim == 0 else out


def _g_scale(n: int) -> float:
    return 2 * n * n / (n + 1)


def t0_left_edge(n: int) -> float:
    return 1 + (n - 1) / (2 * n * n)


def g(n: int, t: float) -> float:
    """Sign-carrier of the derivative of phi after a monotone change of variables."""
    c = _g_scale(n)
    u = c * t - (2 * n - 2)
    return -u * math.log(u) + c * t * math.log(t)


def g_second_derivative(n: int, t: float) -> float:
    c = _g_scale(n)
    return -c * (2 * n - 2) / (t * (c * t - (2 * n - 2)))


@lru_cache(maxsize=None)
def t0(n: int) -> float:
    """Unique zero of ``g`` to the right of ``1 + (n-1)/(2n^2)``.

    ``g`` is positive at that edge and concave, so doubling the bracket
    until ``g`` turns negative always succeeds.
    """
    _check_n(n, 2)
    left = t0_left_edge(n)
    lo, hi = expand_right(lambda t: g(n, t), left, left + 1.0)
    return bisect_root(lambda t: g(n, t), lo, hi)


@lru_cache(maxsize=None)
def gamma0(n: int) -> float:
    """Location of the unique maximum of ``phi(n, .)``."""
    _check_n(n, 2)
    c = _g_scale(n)
    return 2.0 * math.log2(c * t0(n) - (2 * n - 2))


@lru_cache(maxsize=None)
def f_peak(n: int) -> float:
    """Argmax of ``f_underline(n, .)``, after checking unimodality on a grid."""
    _check_n(n)
    grid = np.linspace(0.02, 100.0, 50_000)
    vals = f_underline(n, grid)
    steps = np.sign(np.diff(vals))
    steps = steps[steps != 0]
    changes = int(np.count_nonzero(steps[1:] != steps[:-1]))
    if changes != 1:
        raise PropertyViolation(
            f"f_underline(n={n}) is not unimodal on the grid: {changes} slope sign changes"
        )
    i = int(np.argmax(vals))
    res = minimize_scalar(lambda t: -f_underline(n, t), bounds=(grid[i - 1], grid[i + 1]),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x)


def _largest_match(u: Callable[[float], float], n: int, beta: float, peak: float,
                   limit: float, method: ThresholdMethod) -> ThresholdResult:
    target = u(beta)
    if beta >= peak or target <= limit + PLATEAU_TOL or u(peak) <= target:
        return ThresholdResult(n, beta, beta, method, (beta, beta), 0.0)

    def h(a):
        return u(a) - target

    try:
        lo, hi = expand_right(h, peak, peak + 1.0)
    except BracketError as exc:
        raise BracketError(f"{method.value} threshold at n={n}, beta={beta}: {exc}") from None
    root = bisect_root(h, lo, hi)
    return ThresholdResult(n, beta, root, method, (lo, hi), h(root))


def _check_beta(beta: float) -> None:
    if not beta >= 2:
        raise DomainError(f"threshold bounds are defined for beta >= 2, got {beta}")


def threshold_star(n: int, beta: float) -> ThresholdResult:
    """Largest ``alpha`` with ``phi(alpha) = phi(beta)``; ``beta`` itself when none exceeds it.

    For ``n = 1`` phi is constant (the cross-polytope is the simplex), so the
    comparison gives no bound beyond ``beta``.
    """
    _check_n(n)
    _check_beta(beta)
    if n == 1:
        return ThresholdResult(n, beta, beta, ThresholdMethod.PHI, (beta, beta), 0.0)
    return _largest_match(lambda a: phi(n, a), n, beta, gamma0(n), -SQRT2, ThresholdMethod.PHI)


def threshold_dlm(n: int, beta: float) -> ThresholdResult:
    """Largest ``alpha >= 2`` with ``f_underline(alpha) = f_underline(beta)``."""
    _check_n(n)
    _check_beta(beta)
    return _largest_match(lambda a: f_underline(n, a), n, beta, f_peak(n), 0.0,
                          ThresholdMethod.F)


def competition_differences(p: Params) -> Tuple[float, float]:
    """``(phi(alpha) - phi(beta), E[best cross-polytope] - E[unit simplex])``."""
    if not p.beta > 0:
        raise DomainError(f"need beta > 0, got {p.beta}")
    dphi = phi(p.n, p.alpha) - phi(p.n, p.beta)
    de = optimal_cross_polytope_energy(p) - simplex_energy(p)
    return dphi, de


def _tol_sign(x: float, scale: float, tol: float) -> int:
    if abs(x) <= tol * max(1.0, abs(scale)):
        return 0
    return 1 if x > 0 else -1


def sign_check(p: Params, tol: float = 1e-12) -> Competition:
    """Classify the simplex against the best cross-polytope, verifying the sign relation.

    Raises :class:`PropertyViolation` if the phi difference and the energy
    difference fail to have opposite signs (or to vanish together).
    """
    dphi, de = competition_differences(p)
    s_phi = _tol_sign(dphi, phi(p.n, p.beta), tol)
    s_e = _tol_sign(de, simplex_energy(p), tol)
    if s_phi != -s_e:
        raise PropertyViolation(
            f"sign relation fails at {p}: dphi={dphi:.3e}, dE={de:.3e}"
        )
    return Competition.SIMPLEX_BEATEN if s_e < 0 else Competition.SIMPLEX_AT_LEAST_TIED


@dataclass(frozen=True)
class ThresholdRow:
    beta: float
    alpha_star_phi: float
    alpha_star_f: float

    @property
    def delta(self) -> float:
        return self.alpha_star_phi - self.alpha_star_f

    def csv_row(self) -> str:
        return ",".join(f"{x:.12g}" for x in (self.beta, self.alpha_star_phi,
                                               self.alpha_star_f, self.delta))


def compare_thresholds(n: int, beta_grid: Iterable[float]) -> List[ThresholdRow]:
    """Both threshold bounds on a grid of beta values, in grid order."""
    return [
        ThresholdRow(float(b), threshold_star(n, b).alpha_star, threshold_dlm(n, b).alpha_star)
        for b in beta_grid
    ]


def thresholds_csv(rows: Iterable[ThresholdRow]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in rows]) + "\n"
