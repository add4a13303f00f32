"""Command-line interface.

Subcommands: ``energy``, ``bounds``, ``threshold``, ``minimize`` and ``sweep``.
Exit codes: 0 success, 1 I/O error, 2 invalid input, 3 parameters outside
the range where a known result applies.

``minimize`` and ``sweep`` accept ``--config file.json`` whose keys are the
long flag names with underscores (``max_iters``, ``grad_tol``...).  Values
from the file fill in anything not given on the command line; a flag given
explicitly always wins.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import bounds as bd
from . import closed_forms as cf
from . import minimizer as mn
from . import threshold as th
from .energy import DiscreteMeasure, Params, energy, energy_d2beta
from .errors import BracketError, DomainError, PropertyViolation, UnsupportedRangeError

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_RANGE = 0, 1, 2, 3


def _round(obj: Any) -> Any:
    """Round every float in a JSON-like tree to 12 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if np.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _dumps(obj: Any) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=False)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_grid(spec: str) -> List[float]:
    try:
        lo, hi, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise DomainError(f"grid must look like lo:hi:step, got {spec!r}") from None
    if not step > 0 or hi < lo:
        raise DomainError(f"invalid grid {spec!r}")
    count = int(round((hi - lo) / step)) + 1
    return [float(round(lo + i * step, 12)) for i in range(count)]


def _parse_list(spec: str) -> List[float]:
    try:
        return [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"expected a comma-separated list of numbers, got {spec!r}") from None


# -- energy -----------------------------------------------------------------

def cmd_energy(args) -> int:
    if (args.measure is None) == (args.special is None):
        raise DomainError("give exactly one of --measure or --special")
    if args.special is not None:
        if args.n is None:
            raise DomainError("--special needs --n")
        p = Params(args.alpha, args.beta, args.n)
        if args.special == "simplex":
            mu = cf.simplex_measure(args.n)
        else:
            r = args.radius if args.radius is not None else cf.optimal_cross_polytope_radius(p)
            mu = cf.cross_polytope_measure(args.n, r)
    else:
        mu = DiscreteMeasure.load(args.measure)
        if args.n is not None and args.n != mu.n:
            raise DomainError(f"--n {args.n} disagrees with measure dimension {mu.n}")
        p = Params(args.alpha, args.beta, mu.n)
    out: Dict[str, Any] = {"energy": energy(p, mu)}
    if args.d2beta:
        out["d2beta"] = energy_d2beta(p, mu)
    _emit(_dumps(out), args.out)
    return EXIT_OK


# -- bounds -----------------------------------------------------------------

def cmd_bounds(args) -> int:
    reports = bd.candidate_bounds(args.alpha, args.beta, args.n, args.grid_size)
    best = max(reports, key=lambda r: r.lower_bound)
    if args.format == "csv":
        lines = [bd.CSV_HEADER] + [r.csv_row() for r in reports] + [best.csv_row()]
        _emit("\n".join(lines), args.out)
    else:
        _emit(_dumps({"reports": [r.to_dict() for r in reports], "best": best.to_dict()}),
              args.out)
    return EXIT_OK


# -- threshold --------------------------------------------------------------

def cmd_threshold(args) -> int:
    if (args.beta is None) == (args.grid is None):
        raise DomainError("give exactly one of --beta or --grid")
    if args.grid is not None:
        rows = th.compare_thresholds(args.n, _parse_grid(args.grid))
        _emit(th.thresholds_csv(rows), args.out)
        return EXIT_OK
    star = th.threshold_star(args.n, args.beta)
    dlm = th.threshold_dlm(args.n, args.beta)
    out = {
        "n": args.n,
        "beta": args.beta,
        "alpha_star": star.alpha_star,
        "alpha_f": dlm.alpha_star,
        "delta": star.alpha_star - dlm.alpha_star,
        "phi_result": star.to_dict(),
        "f_result": dlm.to_dict(),
    }
    _emit(_dumps(out), args.out)
    return EXIT_OK


# -- minimize / sweep -------------------------------------------------------

_MIN_KEYS = ("alpha", "beta", "n", "k", "restarts", "max_iters", "step_init", "grad_tol",
             "seed", "optimize_weights", "cluster_eps")
_SWEEP_KEYS = ("alpha", "n", "betas", "restarts", "max_iters", "step_init", "grad_tol",
               "seed", "optimize_weights", "cluster_eps", "k_cap")


def _merged(args, keys: Sequence[str], defaults: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"malformed config JSON: {exc}") from None
        unknown = set(data) - set(keys)
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        merged.update(data)
    for key in keys:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    missing = [k for k in keys if merged.get(k) is None and k not in ("cluster_eps",)]
    if missing:
        raise DomainError(f"missing required settings: {', '.join('--' + m.replace('_', '-') for m in missing)}")
    return merged


_MIN_DEFAULTS = dict(restarts=8, max_iters=20_000, step_init=1.0, grad_tol=1e-10,
                     optimize_weights=False, cluster_eps=None)
_SWEEP_DEFAULTS = dict(restarts=4, max_iters=20_000, step_init=1.0, grad_tol=1e-7,
                       optimize_weights=False, cluster_eps=None, k_cap=512)


def _config_from(m: Dict[str, Any], params: Params, k: int) -> mn.MinimizeConfig:
    return mn.MinimizeConfig(
        params=params, k=k, restarts=m["restarts"], max_iters=m["max_iters"],
        step_init=m["step_init"], grad_tol=m["grad_tol"], seed=m["seed"],
        optimize_weights=bool(m["optimize_weights"]), cluster_eps=m["cluster_eps"],
    )


def cmd_minimize(args) -> int:
    m = _merged(args, _MIN_KEYS, _MIN_DEFAULTS)
    cfg = _config_from(m, Params(m["alpha"], m["beta"], m["n"]), m["k"])
    res = mn.minimize(cfg)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(res.to_dict(), fh)
            fh.write("\n")
    p = cfg.params
    print(f"alpha={p.alpha:.12g} beta={p.beta:.12g} n={p.n} k={cfg.k} "
          f"energy={res.energy:.12g} grad_norm={res.grad_norm:.3e} "
          f"iterations={res.iterations} clusters={res.clusters.count} "
          f"converged={res.converged}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    m = _merged(args, _SWEEP_KEYS, _SWEEP_DEFAULTS)
    betas = m["betas"] if isinstance(m["betas"], list) else _parse_list(str(m["betas"]))
    if not betas:
        raise DomainError("--betas is empty")
    # validate every parameter point before starting any run
    params = [Params(m["alpha"], b, m["n"]) for b in betas]
    base = _config_from(m, params[0], 2 * (m["n"] + 1))
    for p in params[1:]:
        _config_from(m, p, base.k)
    rows = mn.cardinality_sweep(m["alpha"], m["n"], betas, base, k_cap=int(m["k_cap"]))
    text = mn.sweep_csv(rows)
    if args.out:
        _emit(text, args.out)
    for r in rows:
        print(f"beta={r.beta:.12g} k_used={r.k_used} clusters={r.cluster_count} "
              f"energy={r.energy:.12g}")
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interaction-bounds",
        description="Energies, bounds and thresholds for power-law interaction energies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("energy", help="energy of a measure file or a special measure")
    p.add_argument("--measure", help="measure JSON file")
    p.add_argument("--special", choices=["simplex", "cross-polytope"])
    p.add_argument("--n", type=int)
    p.add_argument("--radius", type=float, help="cross-polytope radius (default: optimal)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--d2beta", action="store_true", help="also print d^2E/dbeta^2")
    p.add_argument("--out")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("bounds", help="lower bounds on the minimal energy")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--grid-size", type=int, default=64)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("threshold", help="lower bounds on the simplex transition threshold")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float)
    p.add_argument("--grid", help="lo:hi:step, writes the comparison CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_threshold)

    def run_flags(q, sweep: bool):
        q.add_argument("--config", help="JSON file of settings; explicit flags override it")
        q.add_argument("--n", type=int)
        q.add_argument("--alpha", type=float)
        if sweep:
            q.add_argument("--betas", type=_parse_list, help="comma-separated beta values")
            q.add_argument("--k-cap", dest="k_cap", type=int)
        else:
            q.add_argument("--beta", type=float)
            q.add_argument("--k", type=int)
        q.add_argument("--restarts", type=int)
        q.add_argument("--max-iters", dest="max_iters", type=int)
        q.add_argument("--step-init", dest="step_init", type=float)
        q.add_argument("--grad-tol", dest="grad_tol", type=float)
        q.add_argument("--seed", type=int)
        q.add_argument("--optimize-weights", dest="optimize_weights", action="store_true",
                       default=None)
        q.add_argument("--cluster-eps", dest="cluster_eps", type=float)
        q.add_argument("--out")

    p = sub.add_parser("minimize", help="particle minimization at one parameter point")
    run_flags(p, sweep=False)
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("sweep", help="support cardinality along a list of beta values")
    run_flags(p, sweep=True)
    p.set_defaults(func=cmd_sweep)
    return parser


def _check_writable(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path) or not os.path.isdir(parent) or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write output file {path!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if getattr(args, "out", None):
            _check_writable(args.out)
        return args.func(args)
    except UnsupportedRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except BracketError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except (DomainError, PropertyViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
