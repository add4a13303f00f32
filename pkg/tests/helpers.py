"""Shared random fixtures for the test modules."""

from interaction_bounds import DiscreteMeasure, Params


def random_measure(rng, n, k, spread=1.0, uniform=False):
    pts = spread * rng.normal(size=(k, n))
    if uniform:
        return DiscreteMeasure(pts)
    w = rng.random(k) + 0.05
    return DiscreteMeasure(pts, w / w.sum())


def random_params(rng, beta_lo=0.5, beta_hi=4.0, alpha_hi=8.0, n_max=5):
    n = int(rng.integers(1, n_max + 1))
    beta = float(rng.uniform(beta_lo, beta_hi))
    alpha = float(rng.uniform(beta + 0.05, max(alpha_hi, beta + 0.1)))
    return Params(alpha, beta, n)

