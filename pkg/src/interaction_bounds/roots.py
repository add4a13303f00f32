"""Bracketed bisection used by the threshold and anchor computations."""

from __future__ import annotations

from typing import Callable, Tuple

from scipy.optimize import bisect

from .errors import BracketError

XTOL = 1e-13
MAXITER = 200


def bisect_root(f: Callable[[float], float], lo: float, hi: float,
                xtol: float = XTOL, maxiter: int = MAXITER) -> float:
    """Root of ``f`` on ``[lo, hi]``; the endpoint values must differ in sign."""
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo:.3e}, {fhi:.3e}")
    # rtol=4*eps is scipy's floor; xtol governs the absolute width
    return bisect(f, lo, hi, xtol=xtol, rtol=4 * 2.220446049250313e-16, maxiter=maxiter)


def expand_right(f: Callable[[float], float], lo: float, start: float,
                 max_doublings: int = 60) -> Tuple[float, float]:
    """Grow ``hi`` from ``start`` (doubling its distance to ``lo``) until f changes sign.

    Returns the bracket ``(lo, hi)``.
    """
    flo = f(lo)
    hi = start
    for _ in range(max_doublings):
        fhi = f(hi)
        if (fhi > 0) != (flo > 0) or fhi == 0:
            return lo, hi
        hi = lo + 2.0 * (hi - lo)
    raise BracketError(f"bracket expansion from {lo} failed after {max_doublings} doublings")
