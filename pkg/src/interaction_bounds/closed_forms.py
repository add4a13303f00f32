"""Special measures and their closed-form energies.

Three families appear throughout: the centred regular unit simplex, the
cross-polytope of radius ``r`` (atoms at ``+-r e_i``), and the uniform
distribution on a sphere.  The first two are returned as
:class:`DiscreteMeasure` so that every formula here can be checked against
the pairwise sum; spheres only enter through their energies and radii.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .energy import DiscreteMeasure, Params
from .errors import DomainError

LOG2 = math.log(2.0)


class MeasureKind(str, enum.Enum):
    SIMPLEX = "simplex"
    CROSS_POLYTOPE = "cross-polytope"
    SHELL = "shell"


@dataclass(frozen=True)
class SpecialMeasureSpec:
    kind: MeasureKind
    n: int
    radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MeasureKind(self.kind))
        _check_dim(self.n)
        if self.kind is MeasureKind.SIMPLEX:
            if self.radius is not None:
                raise DomainError("the unit simplex has no radius parameter")
        elif self.radius is None or not self.radius > 0:
            raise DomainError(f"{self.kind.value} needs a positive radius")

    def build(self) -> DiscreteMeasure:
        if self.kind is MeasureKind.SIMPLEX:
            return simplex_measure(self.n)
        if self.kind is MeasureKind.CROSS_POLYTOPE:
            return cross_polytope_measure(self.n, self.radius)
        raise DomainError("a spherical shell is not a discrete measure")


def _check_dim(n: int, minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise DomainError(f"dimension must be an integer >= {minimum}, got {n}")


def _check_positive_beta(p: Params) -> None:
    if not p.beta > 0:
        raise DomainError(f"closed form requires beta > 0, got {p.beta}")


def simplex_measure(n: int) -> DiscreteMeasure:
    """Uniform measure on the vertices of a regular unit n-simplex centred at 0."""
    _check_dim(n)
    # Edge vectors from vertex 0 have Gram matrix (1 + I)/2; its Cholesky
    # factor gives lower-triangular coordinates for vertices 1..n.
    gram = 0.5 * (np.ones((n, n)) + np.eye(n))
    edges = np.linalg.cholesky(gram)
    verts = np.vstack([np.zeros(n), edges])
    verts -= verts.mean(axis=0)
    return DiscreteMeasure(verts, np.full(n + 1, 1.0 / (n + 1)))


def simplex_energy(p: Params) -> float:
    """Energy of the unit simplex, ``n/(2(n+1)) (1/alpha - 1/beta)``."""
    return 0.5 * p.n / (p.n + 1) * (1.0 / p.alpha - 1.0 / p.beta)


def cross_polytope_measure(n: int, r: float) -> DiscreteMeasure:
    _check_dim(n)
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    eye = np.eye(n) * r
    return DiscreteMeasure(np.vstack([eye, -eye]), np.full(2 * n, 1.0 / (2 * n)))


def _cross_coeff(n: int, gamma: float) -> float:
    # (2n-2) neighbours at distance r*sqrt(2), one antipode at distance 2r
    return (2 * n - 2) * 2.0 ** (gamma / 2) + 2.0**gamma


def cross_polytope_energy(p: Params, r: float) -> float:
    _check_positive_beta(p)
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    a, b, n = p.alpha, p.beta, p.n
    return (_cross_coeff(n, a) * r**a / a - _cross_coeff(n, b) * r**b / b) / (4 * n)


def optimal_cross_polytope_radius(p: Params) -> float:
    _check_positive_beta(p)
    a, b, n = p.alpha, p.beta, p.n
    ratio = (2 * n - 2 + 2.0 ** (b / 2)) / (2 * n - 2 + 2.0 ** (a / 2))
    return 2.0**-0.5 * ratio ** (1.0 / (a - b))


def optimal_cross_polytope_energy(p: Params) -> float:
    _check_positive_beta(p)
    a, b, n = p.alpha, p.beta, p.n
    lo = math.log(2 * n - 2 + 2.0 ** (b / 2))
    hi = math.log(2 * n - 2 + 2.0 ** (a / 2))
    scale = math.exp((a * lo - b * hi) / (a - b))
    return scale * (1.0 / a - 1.0 / b) / (4 * n)


def sphere_distance_moment(gamma: float, d: int) -> float:
    """Mean of ``|u - v|**gamma`` for u, v independent uniform on the unit sphere in R^d."""
    _check_dim(d, 2)
    if not gamma > 1 - d:
        raise DomainError(f"moment diverges for gamma <= 1 - d, got gamma={gamma}")
    log_m = (
        (gamma + d - 2) * LOG2
        + math.lgamma(d / 2)
        + math.lgamma((d + gamma - 1) / 2)
        - 0.5 * math.log(math.pi)
        - math.lgamma(d - 1 + gamma / 2)
    )
    return math.exp(log_m)


def shell_energy(p: Params, radius: float) -> float:
    """Energy of the uniform distribution on the sphere of the given radius (n >= 2)."""
    _check_dim(p.n, 2)
    if not radius > 0:
        raise DomainError(f"radius must be positive, got {radius}")
    a, b, d = p.alpha, p.beta, p.n
    return 0.5 * (
        radius**a * sphere_distance_moment(a, d) / a
        - radius**b * sphere_distance_moment(b, d) / b
    )


def _shell_lower_beta(alpha: float, d: int) -> float:
    return (-10 + 3 * alpha + 7 * d - alpha * d - d * d) / (d + alpha - 3)


def shell_radius(alpha: float, beta: float, n: int) -> float:
    """Radius of the energy-minimizing sphere.

    Accepts ``2 <= alpha <= 4`` with ``beta`` between the lower edge of the
    shell regime and 2, including the degenerate point ``(4, 2)`` where the
    value is the simplex circumradius.
    """
    _check_dim(n, 2)
    d = n
    if not (2 <= alpha <= 4 and alpha > beta):
        raise DomainError(f"shell radius needs 2 <= alpha <= 4 and alpha > beta, got {alpha}, {beta}")
    if not (_shell_lower_beta(alpha, d) <= beta <= 2):
        raise DomainError(f"beta={beta} outside the shell regime for alpha={alpha}, n={n}")
    log_ratio = (
        math.lgamma((d + beta - 1) / 2)
        + math.lgamma((2 * d + alpha - 2) / 2)
        - math.lgamma((d + alpha - 1) / 2)
        - math.lgamma((2 * d + beta - 2) / 2)
    )
    # The gamma ratio is the minimizing diameter; the radius is half of it.
    return 0.5 * math.exp(log_ratio / (alpha - beta))


def shell_min_energy_beta2(alpha: float, n: int) -> float:
    """Minimal energy at beta = 2 for n >= 2 and alpha in (2, 4), attained by a sphere."""
    _check_dim(n, 2)
    if not 2 < alpha < 4:
        raise DomainError(f"need 2 < alpha < 4, got {alpha}")
    d = n
    lg = math.lgamma
    prefactor = 2.0 ** (d - 3) / math.sqrt(math.pi) * math.exp(
        lg(d / 2) + lg((d + alpha - 1) / 2) - lg((2 * d + alpha - 2) / 2)
    )
    log_inner = lg((d + 1) / 2) + lg((2 * d + alpha - 2) / 2) - lg((d + alpha - 1) / 2) - lg(d)
    return -prefactor * (0.5 - 1.0 / alpha) * math.exp(log_inner * alpha / (alpha - 2))
