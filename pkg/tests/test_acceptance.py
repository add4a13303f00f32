"""Acceptance criteria, one test per criterion.

Each test records its wall time and checks the stated runtime limit.  The
terminal summary lists one PASS/FAIL line per criterion.
"""

import filecmp
import math
import subprocess
import sys
import time

import numpy as np
import pytest

from interaction_bounds import DiscreteMeasure, Params, energy, energy_d2beta
from interaction_bounds.bounds import (best_lower_bound, known_anchors, linear_interpolation_bound,
                                       strong_concavity_parameter, strong_interpolation_bound)
from interaction_bounds.closed_forms import (cross_polytope_energy, cross_polytope_measure,
                                             optimal_cross_polytope_energy,
                                             optimal_cross_polytope_radius, shell_radius,
                                             simplex_energy, simplex_measure)
from interaction_bounds.minimizer import (MinimizeConfig, cardinality_sweep, concavity_probe,
                                          energy_gradient, minimize, shell_diagnostics,
                                          simplex_diagnostics)
from interaction_bounds.threshold import (compare_thresholds, competition_differences, g, gamma0,
                                          phi, sign_check, t0, threshold_dlm, threshold_star)


def criterion(number):
    def mark(fn):
        fn.criterion = number
        return fn
    return mark


class Timer:
    def __init__(self, limit):
        self.limit = limit

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.limit, f"took {self.elapsed:.1f}s, limit {self.limit}s"


@pytest.fixture
def rng():
    return np.random.default_rng(8675309)


@criterion(1)
def test_c01_oracle_equivalence(rng):
    """Closed-form simplex and cross-polytope energies equal the pairwise oracle (1e-12 rel, 200 cases)."""
    with Timer(1.0):
        worst = 0.0
        for _ in range(200):
            n = int(rng.integers(1, 6))
            beta = float(rng.uniform(0.5, 8.0))
            alpha = float(rng.uniform(beta, 8.0))
            if alpha <= beta:
                alpha = 8.0
            p = Params(alpha, beta, n)
            r = float(rng.uniform(0.05, 4.0))
            for closed, mu in ((cross_polytope_energy(p, r), cross_polytope_measure(n, r)),
                               (simplex_energy(p), simplex_measure(n))):
                oracle = energy(p, mu)
                worst = max(worst, abs(closed - oracle) / abs(oracle))
        assert worst <= 1e-12, worst


@criterion(2)
def test_c02_optimal_radius(rng):
    """Cross-polytope energy is stationary at r* (|FD| < 1e-8) and no grid radius beats the optimum."""
    with Timer(1.0):
        for _ in range(100):
            n = int(rng.integers(1, 6))
            beta = float(rng.uniform(0.5, 7.5))
            p = Params(float(rng.uniform(beta + 0.01, 8.0)), beta, n)
            r = optimal_cross_polytope_radius(p)
            h = 1e-5 * r
            fd = (cross_polytope_energy(p, r + h) - cross_polytope_energy(p, r - h)) / (2 * h)
            assert abs(fd) < 1e-8
            radii = np.geomspace(r / 10, 10 * r, 1000)
            a, b = p.alpha, p.beta
            ca = (2 * n - 2) * 2 ** (a / 2) + 2**a
            cb = (2 * n - 2) * 2 ** (b / 2) + 2**b
            grid = (ca * radii**a / a - cb * radii**b / b) / (4 * n)
            assert grid.min() >= optimal_cross_polytope_energy(p) - 1e-12


@criterion(3)
def test_c03_sign_relation(rng):
    """phi difference and energy difference have opposite signs on 10^4 samples; n=1 gives zeros."""
    with Timer(5.0):
        violations = 0
        checked = 0
        while checked < 10_000:
            n = int(rng.integers(1, 6))
            beta = float(rng.uniform(0.0, 8.0))
            alpha = float(rng.uniform(beta, 12.0))
            if not 0 < beta < alpha:
                continue
            p = Params(alpha, beta, n)
            try:
                sign_check(p)
            except AssertionError:
                violations += 1
            if n == 1:
                dphi, de = competition_differences(p)
                assert abs(dphi) < 1e-12 and abs(de) < 1e-12 * max(1.0, abs(simplex_energy(p)))
            checked += 1
        assert violations == 0


@criterion(4)
def test_c04_threshold_reproduction():
    """threshold_star(2,2.5)=3.18+-0.01, threshold_dlm(2,2.5)=3.07+-0.01; phi bound >= f bound on the sweep."""
    with Timer(10.0):
        assert abs(threshold_star(2, 2.5).alpha_star - 3.18) <= 0.01
        assert abs(threshold_dlm(2, 2.5).alpha_star - 3.07) <= 0.01
        rows = compare_thresholds(2, [2 + 0.01 * i for i in range(201)])
        assert len(rows) == 201
        nondegenerate = [r for r in rows if r.alpha_star_phi > r.beta]
        assert nondegenerate
        assert all(r.alpha_star_phi >= r.alpha_star_f for r in nondegenerate)


@criterion(5)
def test_c05_unimodality_certificate():
    """gamma0(n) matches a grid argmax of phi_n within 1e-3 for n=2..6; g_n(t0) residual < 1e-12."""
    with Timer(5.0):
        grid = np.arange(1e-4, 50.0, 1e-4)
        for n in range(2, 7):
            assert abs(gamma0(n) - grid[np.argmax(phi(n, grid))]) < 1e-3
            assert abs(g(n, t0(n))) < 1e-12


def _random_cloud(rng, n, k):
    w = rng.random(k) + 0.05
    return DiscreteMeasure(rng.normal(scale=0.7, size=(k, n)), w / w.sum())


@criterion(6)
def test_c06_derivatives(rng):
    """energy_d2beta and energy_gradient match central differences (1e-5 rel); d2E <= E/beta^2."""
    with Timer(10.0):
        for _ in range(100):
            n = int(rng.integers(1, 4))
            beta = float(rng.uniform(0.5, 4.0))
            alpha = beta + float(rng.uniform(0.1, 4.0))
            mu = _random_cloud(rng, n, int(rng.integers(2, 9)))
            h = 1e-4
            e = [energy(Params(alpha, beta + s * h, n), mu) for s in (-1, 0, 1)]
            fd = (e[2] - 2 * e[1] + e[0]) / h**2
            p = Params(alpha, beta, n)
            d2 = energy_d2beta(p, mu)
            assert abs(d2 - fd) <= 1e-5 * abs(fd)
            assert d2 <= e[1] / beta**2
        for _ in range(100):
            n = int(rng.integers(1, 4))
            beta = float(rng.uniform(1.1, 4.0))
            p = Params(beta + float(rng.uniform(0.1, 4.0)), beta, n)
            mu = _random_cloud(rng, n, int(rng.integers(2, 9)))
            grad = energy_gradient(p, mu)
            fd = np.zeros_like(grad)
            step = 1e-6
            for i in range(mu.k):
                for d in range(n):
                    shift = np.zeros_like(grad)
                    shift[i, d] = step
                    up = energy(p, DiscreteMeasure(mu.points + shift, mu.weights))
                    down = energy(p, DiscreteMeasure(mu.points - shift, mu.weights))
                    fd[i, d] = (up - down) / (2 * step)
            assert np.linalg.norm(grad - fd) <= 1e-5 * np.linalg.norm(fd)


@pytest.mark.slow
@criterion(7)
def test_c07_bound_sandwich():
    """best_lower_bound <= particle energy <= min(simplex, cross-polytope) + 1e-6; strong beats linear."""
    with Timer(300.0):
        for alpha in (3.0, 3.5):
            for beta in (2.2, 2.5, 2.8):
                p = Params(alpha, beta, 2)
                res = minimize(MinimizeConfig(p, k=12, restarts=12, seed=2024, grad_tol=1e-9))
                lower = best_lower_bound(alpha, beta, 2).lower_bound
                upper = min(simplex_energy(p), optimal_cross_polytope_energy(p))
                assert lower <= res.energy <= upper + 1e-6, (alpha, beta, lower, res.energy, upper)
                anchors = known_anchors(alpha, 2)
                for a0 in (a for a in anchors if a.beta < beta):
                    for a1 in (a for a in anchors if a.beta > beta):
                        args = (alpha, a0.beta, a0.energy, a1.beta, a1.energy, beta)
                        lin = linear_interpolation_bound(*args).lower_bound
                        strong = strong_interpolation_bound(*args, 2).lower_bound
                        assert strong >= lin
                        if strong_concavity_parameter(alpha, a1.beta, 2) > 0:
                            assert strong > lin


@pytest.mark.slow
@criterion(8)
def test_c08_concavity_probe():
    """Minimal-energy estimates at beta=2.2/2.5/2.8 (alpha=3) are midpoint concave and non-decreasing."""
    with Timer(300.0):
        cfg = MinimizeConfig(Params(3.0, 2.5, 2), k=24, restarts=12, seed=2024, grad_tol=1e-9)
        rep = concavity_probe(3.0, 2, (2.2, 2.5, 2.8), cfg)
        assert rep.slack >= -1e-4
        assert min(rep.monotone_diffs) >= -1e-6
        assert rep.slack >= rep.strong_margin - 1e-4


@pytest.mark.slow
@criterion(9)
def test_c09_cardinality_cascade():
    """At alpha=3.5, n=2 the estimated support at beta=2.05 exceeds that at 2.5 and exceeds n+1=3."""
    with Timer(600.0):
        base = MinimizeConfig(Params(3.5, 2.5, 2), k=6, restarts=4, seed=7, grad_tol=1e-7)
        rows = cardinality_sweep(3.5, 2, [2.5, 2.05], base)
        coarse, fine = rows
        assert fine.cluster_count > coarse.cluster_count
        assert fine.cluster_count > 3
        for row in rows:
            assert row.energy >= row.lower_bound - 1e-9


@pytest.mark.slow
@criterion(10)
def test_c10_weak_convergence_diagnostics():
    """(3, 2.05, k=64) is nearly a sphere (std/mean < 0.05); (4.5, 1.9, k=60) clusters to a unit simplex."""
    with Timer(600.0):
        shell = minimize(MinimizeConfig(Params(3.0, 2.05, 2), k=64, restarts=2, seed=11,
                                        grad_tol=1e-8, max_iters=50_000))
        diag = shell_diagnostics(shell.measure)
        assert diag.radial_std / diag.radial_mean < 0.05
        assert abs(diag.radial_mean / shell_radius(3.0, 2.0, 2) - 1) < 0.05
        cfg = MinimizeConfig(Params(4.5, 1.9, 2), k=60, restarts=2, seed=11, cluster_eps=0.1)
        simplex = simplex_diagnostics(minimize(cfg).measure, cfg.eps)
        assert simplex.cluster_count == 3
        assert simplex.max_distance_deviation < 0.05


def _cli(*argv):
    cmd = [sys.executable, "-m", "interaction_bounds", *argv]
    return subprocess.run(cmd, capture_output=True, text=True, check=True)


@criterion(11)
def test_c11_cli_determinism(tmp_path):
    """Seeded CLI runs repeated twice write byte-identical files."""
    runs = [
        ("minimize", "--n", "2", "--alpha", "3.5", "--beta", "2.3", "--k", "12", "--seed", "7",
         "--restarts", "3"),
        ("minimize", "--n", "2", "--alpha", "3", "--beta", "2.2", "--k", "10", "--seed", "99",
         "--restarts", "2", "--optimize-weights"),
        ("sweep", "--n", "2", "--alpha", "3.5", "--betas", "2.8,2.5", "--seed", "7",
         "--restarts", "2", "--k-cap", "24"),
        ("threshold", "--n", "2", "--grid", "2:4:0.05"),
        ("bounds", "--n", "2", "--alpha", "3.5", "--beta", "2.5", "--format", "csv"),
    ]
    for i, argv in enumerate(runs):
        outputs = []
        stdouts = []
        for rep in range(2):
            path = tmp_path / f"run{i}_{rep}.out"
            stdouts.append(_cli(*argv, "--out", str(path)).stdout)
            outputs.append(path)
        assert filecmp.cmp(outputs[0], outputs[1], shallow=False), argv
        assert stdouts[0] == stdouts[1]
        assert outputs[0].stat().st_size > 0
