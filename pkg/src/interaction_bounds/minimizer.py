"""Particle minimization of the interaction energy and support diagnostics.

A k-atom measure is optimized by gradient descent on the atom positions
with a backtracking step (halve until the energy drops, then grow the
accepted step by 1.5).  Weights stay uniform unless ``optimize_weights`` is
set, in which case an exponentiated-gradient step on the weights follows
every position step.  Clustering the optimized atoms estimates the support
of the minimizer, which is what the cardinality and weak-convergence
experiments look at.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist

from .bounds import best_lower_bound, strong_concavity_parameter
from .energy import DiscreteMeasure, Params, diameter_bound, energy, pairwise_distances
from .errors import DomainError, UnsupportedRangeError

GROWTH = 1.5
# weights below this are treated as zero when reporting an optimized measure
MASS_FLOOR = 1e-15
SWEEP_CSV_HEADER = "beta,k_used,cluster_count,energy,lower_bound,radial_std"


@dataclass(frozen=True)
class MinimizeConfig:
    params: Params
    k: int
    restarts: int = 8
    max_iters: int = 20_000
    step_init: float = 1.0
    grad_tol: float = 1e-10
    seed: int = 0
    optimize_weights: bool = False
    cluster_eps: Optional[float] = None

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer, got {self.k}")
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise DomainError(f"restarts must be a positive integer, got {self.restarts}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise DomainError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.step_init > 0:
            raise DomainError(f"step_init must be positive, got {self.step_init}")
        if not self.grad_tol > 0:
            raise DomainError(f"grad_tol must be positive, got {self.grad_tol}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.cluster_eps is not None and not self.cluster_eps > 0:
            raise DomainError(f"cluster_eps must be positive, got {self.cluster_eps}")
        if not self.params.beta > 1:
            raise DomainError(f"particle descent needs beta > 1, got {self.params.beta}")

    @property
    def eps(self) -> float:
        if self.cluster_eps is not None:
            return self.cluster_eps
        return 1e-3 * diameter_bound(self.params.beta)


@dataclass(frozen=True)
class ClusterSummary:
    count: int
    representatives: np.ndarray
    masses: np.ndarray
    max_intra_radius: float
    labels: np.ndarray = field(repr=False)

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "representatives": self.representatives.tolist(),
            "masses": self.masses.tolist(),
            "max_intra_radius": self.max_intra_radius,
        }


@dataclass(frozen=True)
class DescentResult:
    points: np.ndarray
    weights: np.ndarray
    energy: float
    initial_energy: float
    grad_norm: float
    iterations: int
    converged: bool
    trace: Optional[List[float]] = None


@dataclass(frozen=True)
class MinimizeResult:
    measure: DiscreteMeasure
    energy: float
    grad_norm: float
    iterations: int
    clusters: ClusterSummary
    converged: bool
    restart: int
    initial_energy: float

    def to_dict(self) -> dict:
        out = self.measure.to_dict()
        out.update(
            energy=self.energy,
            grad_norm=self.grad_norm,
            iterations=self.iterations,
            converged=self.converged,
            restart=self.restart,
            initial_energy=self.initial_energy,
            cluster_count=self.clusters.count,
            clusters=self.clusters.to_dict(),
        )
        return out


def _require_gradient_beta(p: Params) -> None:
    if not p.beta > 1:
        raise DomainError(f"energy gradient needs beta > 1, got {p.beta}")


class _Evaluator:
    """Kernel quantities at one configuration, sharing a single distance matrix."""

    def __init__(self, p: Params, points: np.ndarray):
        self.p = p
        self.points = points
        self.diff = points[:, None, :] - points[None, :, :]
        r = np.sqrt(np.einsum("ijk,ijk->ij", self.diff, self.diff))
        self.r = r
        self.pos = r > 0
        with np.errstate(divide="ignore"):
            logr = np.log(r)
        self.ra = np.where(self.pos, np.exp(p.alpha * logr), 0.0)
        self.rb = np.where(self.pos, np.exp(p.beta * logr), 0.0)
        self.r2 = np.where(self.pos, r * r, 1.0)

    def kernel(self) -> np.ndarray:
        return self.ra / self.p.alpha - self.rb / self.p.beta

    def gradient(self, w: np.ndarray) -> np.ndarray:
        # W'(r)/r = r**(alpha-2) - r**(beta-2), taken as 0 for coincident atoms
        c = np.where(self.pos, (self.ra - self.rb) / self.r2, 0.0)
        cw = c @ w
        return w[:, None] * (cw[:, None] * self.points - c @ (w[:, None] * self.points))

    def kernel_change(self, shift: np.ndarray) -> np.ndarray:
        """``W(r') - W(r)`` for every pair after moving the atoms by ``shift``.

        Computed from the exact change in squared distance and ``expm1``/``log1p``
        so that differences far below the energy's rounding level stay resolved.
        """
        a, b = self.p.alpha, self.p.beta
        dd = shift[:, None, :] - shift[None, :, :]
        dsq = np.einsum("ijk,ijk->ij", dd, 2.0 * self.diff + dd)
        new_r = np.sqrt(np.maximum(self.r * self.r + dsq, 0.0))
        out = np.zeros_like(self.r)
        moved = self.pos
        denom = np.where(moved, new_r + self.r, 1.0)
        rel = np.where(moved, dsq / denom / np.where(moved, self.r, 1.0), 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.log1p(rel)
            out = np.where(moved, self.ra * np.expm1(a * lg) / a - self.rb * np.expm1(b * lg) / b, 0.0)
        born = ~self.pos & (new_r > 0)
        if np.any(born):
            rr = new_r[born]
            out[born] = rr**a / a - rr**b / b
        return out


def _energy_of(p: Params, points: np.ndarray, w: np.ndarray) -> float:
    ev = _Evaluator(p, points)
    return 0.5 * float(w @ ev.kernel() @ w)


def energy_gradient(p: Params, mu: DiscreteMeasure) -> np.ndarray:
    """Gradient of the energy with respect to each atom position, shape ``(k, n)``."""
    _require_gradient_beta(p)
    if mu.n != p.n:
        raise DomainError(f"measure lives in R^{mu.n} but params have n={p.n}")
    return _Evaluator(p, np.asarray(mu.points)).gradient(np.asarray(mu.weights))


def _weight_residual(potential: np.ndarray, w: np.ndarray) -> float:
    mean = float(w @ potential)
    return math.sqrt(max(float(w @ (potential - mean) ** 2), 0.0))


def descend(p: Params, points, weights=None, *, max_iters: int = 20_000,
            step_init: float = 1.0, grad_tol: float = 1e-10,
            optimize_weights: bool = False, trace: bool = False) -> DescentResult:
    """Single backtracking gradient descent from the given configuration.

    A trial step is accepted when it lowers the energy; the energy change is
    evaluated directly rather than as a difference of two totals.  The
    descent stops at ``grad_tol``, after ``max_iters`` accepted steps, or when
    no step of representable size lowers the energy.
    """
    _require_gradient_beta(p)
    x = np.array(points, dtype=float)
    k = x.shape[0]
    w = np.full(k, 1.0 / k) if weights is None else np.array(weights, dtype=float)
    ev = _Evaluator(p, x)
    kern = ev.kernel()
    e = 0.5 * float(w @ kern @ w)
    e_init = e
    history = [e] if trace else None
    step = eta = step_init
    converged = False
    it = 0
    scale = max(1.0, float(np.abs(x).max()))

    def stationarity():
        gx = ev.gradient(w)
        gn = float(np.linalg.norm(gx))
        if optimize_weights:
            gn = math.hypot(gn, _weight_residual(kern @ w, w))
        return gx, gn

    grad, gnorm = stationarity()
    while it < max_iters:
        if gnorm <= grad_tol:
            converged = True
            break
        moved = False
        gmax = float(np.abs(grad).max())
        while step * gmax > 1e-17 * scale:
            shift = -step * grad
            de = 0.5 * float(w @ ev.kernel_change(shift) @ w)
            if de < 0:
                x = x + shift
                ev = _Evaluator(p, x)
                kern = ev.kernel()
                e += de
                step *= GROWTH
                moved = True
                break
            step *= 0.5
        if optimize_weights:
            pot = kern @ w
            centred = pot - float(w @ pot)
            while eta * float(np.abs(centred).max()) > 1e-17:
                w_try = w * np.exp(-eta * centred)
                w_try /= w_try.sum()
                dw = w_try - w
                de = 0.5 * float(dw @ kern @ (w + w_try))
                if de < 0:
                    w = w_try
                    e += de
                    eta *= GROWTH
                    moved = True
                    break
                eta *= 0.5
        if not moved:
            break
        it += 1
        if trace:
            history.append(e)
        grad, gnorm = stationarity()
    else:
        converged = gnorm <= grad_tol
    e = 0.5 * float(w @ kern @ w)
    return DescentResult(x, w, e, e_init, gnorm, it, converged, history)


def _initial_points(rng: np.random.Generator, k: int, n: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal((k, n))
    norms = np.linalg.norm(direction, axis=1)
    norms[norms == 0] = 1.0
    r = radius * rng.random(k) ** (1.0 / n)
    return direction * (r / norms)[:, None]


def _diameter(points: np.ndarray) -> float:
    return float(pdist(points).max()) if len(points) > 1 else 0.0


def minimize(cfg: MinimizeConfig) -> MinimizeResult:
    """Best of ``cfg.restarts`` descents from random starts in the diameter-bound ball.

    Restart ``i`` draws from ``numpy.random.default_rng([seed, i])``; the
    lowest energy wins, ties going to the lower restart index.
    """
    p = cfg.params
    radius = diameter_bound(p.beta)
    best: Optional[Tuple[DescentResult, int]] = None
    for i in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, i])
        x0 = _initial_points(rng, cfg.k, p.n, radius)
        res = descend(p, x0, max_iters=cfg.max_iters, step_init=cfg.step_init,
                      grad_tol=cfg.grad_tol, optimize_weights=cfg.optimize_weights)
        if best is None or res.energy < best[0].energy:
            best = (res, i)
    res, idx = best
    w = np.where(res.weights < MASS_FLOOR, 0.0, res.weights) if cfg.optimize_weights else res.weights
    mu = DiscreteMeasure(res.points, w / math.fsum(w))
    diam = _diameter(mu.points[mu.weights > 0])
    if res.converged and diam > radius + 0.05:
        warnings.warn(
            f"support diameter {diam:.4f} exceeds e^(1/beta)={radius:.4f} + 0.05",
            RuntimeWarning, stacklevel=2,
        )
    return MinimizeResult(
        measure=mu,
        energy=energy(p, mu),
        grad_norm=res.grad_norm,
        iterations=res.iterations,
        clusters=cluster_support(mu, cfg.eps),
        converged=res.converged,
        restart=idx,
        initial_energy=res.initial_energy,
    )


def cluster_support(mu: DiscreteMeasure, eps: float) -> ClusterSummary:
    """Single-linkage clusters of the atoms carrying mass, linked at distance <= eps."""
    if not eps > 0:
        raise DomainError(f"eps must be positive, got {eps}")
    keep = np.flatnonzero(mu.weights > 0)
    pts = mu.points[keep]
    w = mu.weights[keep]
    adjacency = csr_matrix(pairwise_distances(pts) <= eps)
    count, labels = connected_components(adjacency, directed=False)
    reps = np.zeros((count, mu.n))
    masses = np.zeros(count)
    radius = 0.0
    for c in range(count):
        members = labels == c
        m = math.fsum(w[members])
        masses[c] = m
        reps[c] = (w[members] @ pts[members]) / m
        radius = max(radius, float(np.linalg.norm(pts[members] - reps[c], axis=1).max()))
    full_labels = np.full(mu.k, -1)
    full_labels[keep] = labels
    return ClusterSummary(count, reps, masses, radius, full_labels)


@dataclass(frozen=True)
class ShellDiagnostics:
    centroid: np.ndarray
    radial_mean: float
    radial_std: float


def shell_diagnostics(mu: DiscreteMeasure) -> ShellDiagnostics:
    """Mass-weighted centroid and the mean and spread of distances to it."""
    w = mu.weights
    centroid = w @ mu.points
    radii = np.linalg.norm(mu.points - centroid, axis=1)
    mean = float(w @ radii)
    std = math.sqrt(max(float(w @ (radii - mean) ** 2), 0.0))
    return ShellDiagnostics(centroid, mean, std)


@dataclass(frozen=True)
class SimplexDiagnostics:
    cluster_count: int
    max_distance_deviation: float


def simplex_diagnostics(mu: DiscreteMeasure, eps: float) -> SimplexDiagnostics:
    """Cluster count and worst deviation of inter-cluster distances from 1.

    The deviation is NaN when there is a single cluster.
    """
    clusters = cluster_support(mu, eps)
    if clusters.count < 2:
        return SimplexDiagnostics(clusters.count, float("nan"))
    dev = float(np.abs(pdist(clusters.representatives) - 1.0).max())
    return SimplexDiagnostics(clusters.count, dev)


@dataclass(frozen=True)
class SweepRow:
    beta: float
    k_used: int
    cluster_count: int
    energy: float
    lower_bound: float
    radial_std: float

    def csv_row(self) -> str:
        return (f"{self.beta:.12g},{self.k_used},{self.cluster_count},{self.energy:.12g},"
                f"{self.lower_bound:.12g},{self.radial_std:.12g}")


def adaptive_minimize(cfg: MinimizeConfig, k_start: Optional[int] = None, k_cap: int = 512,
                      improve_tol: float = 1e-8) -> MinimizeResult:
    """Double k from ``2(n+1)`` until the energy improves by less than ``improve_tol``.

    Returns the lowest-energy run (smaller k on ties).
    """
    n = cfg.params.n
    k = 2 * (n + 1) if k_start is None else k_start
    best = None
    prev = None
    while True:
        res = minimize(replace(cfg, k=k))
        if best is None or res.energy < best.energy:
            best = res
        if prev is not None and prev - res.energy < improve_tol:
            break
        prev = res.energy if prev is None else min(prev, res.energy)
        if 2 * k > k_cap:
            break
        k *= 2
    return best


def cardinality_sweep(alpha: float, n: int, beta_list: Sequence[float],
                      base_cfg: MinimizeConfig, k_cap: int = 512,
                      improve_tol: float = 1e-8) -> List[SweepRow]:
    """Estimated support size of the minimizer along a list of beta values."""
    rows = []
    for b in beta_list:
        p = Params(alpha, b, n)
        res = adaptive_minimize(replace(base_cfg, params=p), k_cap=k_cap,
                                improve_tol=improve_tol)
        try:
            lb = best_lower_bound(alpha, b, n).lower_bound
        except UnsupportedRangeError:
            lb = float("nan")
        rows.append(SweepRow(float(b), res.measure.k, res.clusters.count, res.energy, lb,
                             shell_diagnostics(res.measure).radial_std))
    return rows


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    return "\n".join([SWEEP_CSV_HEADER] + [r.csv_row() for r in rows]) + "\n"


@dataclass(frozen=True)
class ConcavityReport:
    alpha: float
    n: int
    betas: Tuple[float, float, float]
    energies: Tuple[float, float, float]
    slack: float
    monotone_diffs: Tuple[float, float]
    strong_margin: float


def concavity_probe(alpha: float, n: int, betas: Sequence[float],
                    cfg: MinimizeConfig) -> ConcavityReport:
    """Midpoint-concavity slack and monotonicity of numerically estimated minimal energies.

    ``strong_margin`` is the slack the strong-concavity estimate guarantees
    for the true minimal energy at the midpoint.
    """
    b1, b2, b3 = (float(b) for b in betas)
    if not (0 < b1 <= b2 <= b3 <= alpha) or abs(b2 - 0.5 * (b1 + b3)) > 1e-12:
        raise DomainError(f"need 0 < b1 <= b2 <= b3 <= alpha with b2 the midpoint, got {betas}")
    cache: Dict[float, float] = {}
    for b in (b1, b2, b3):
        if b in cache:
            continue
        # the kernel vanishes identically at beta = alpha
        cache[b] = 0.0 if b == alpha else minimize(replace(cfg, params=Params(alpha, b, n))).energy
    e1, e2, e3 = cache[b1], cache[b2], cache[b3]
    c = strong_concavity_parameter(alpha, b3, n)
    return ConcavityReport(
        alpha=alpha,
        n=n,
        betas=(b1, b2, b3),
        energies=(e1, e2, e3),
        slack=e2 - 0.5 * (e1 + e3),
        monotone_diffs=(e2 - e1, e3 - e2),
        strong_margin=0.25 * 0.5 * c * (b3 - b1) ** 2,
    )
