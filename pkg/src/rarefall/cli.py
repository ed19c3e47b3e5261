"""Command-line harness: single estimates, threshold sweeps, efficiency tables
and the validation suite, all written as CSV.

Exit codes: 0 success, 1 configuration error, 2 numeric or convergence
error, 3 validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericError, UnsupportedScenarioError
from .estimators import (
    CONFIDENCE,
    METHODS,
    estimate,
    efficiency_row,
    required_runs_is,
    required_runs_naive,
)
from .scenarios import (
    SCENARIO_NAMES,
    InidRayleigh,
    OrderedInidRayleigh,
    ThresholdSpec,
    build_scenario,
    db_to_linear,
)

CSV_COLUMNS = (
    "scenario", "L", "N", "gamma_th_db", "gamma0", "method", "M", "p_hat", "std_err", "rel_err",
    "p_tilde", "cv2", "runs_for_target", "accept_rate", "seed", "chunks",
)
VALIDATE_COLUMNS = ("name", "status", "measured", "bound")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
SEED_ENV = "RAREFALL_SEED"


@dataclass
class RunConfig:
    subcommand: str
    scenario: object = None
    thresholds_db: list = field(default_factory=list)
    es_over_n0_db: float = 1.0
    methods: list = field(default_factory=list)
    samples: int = 100_000
    seed: int = 0
    lanes: int = 1
    target_rel_err: float = 0.05
    out: str = None
    fixtures: str = None

    def validate(self):
        if self.subcommand == "validate":
            return
        if not self.thresholds_db:
            raise ConfigError("threshold grid is empty; give --gamma-th-db or --gamma-grid")
        if self.samples < 1:
            raise ConfigError(f"--samples must be >= 1, got {self.samples}")
        if not self.target_rel_err > 0:
            raise ConfigError("--target-rel-err must be positive")
        box_ok = isinstance(self.scenario, (InidRayleigh, OrderedInidRayleigh))
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
            if m == "box_is" and not box_ok:
                raise UnsupportedScenarioError(f"box_is is not available for {self.scenario.name}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _count(text):
    """Positive integer that may be written as 1e6."""
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v) or v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def parse_grid(text):
    """``start:stop[:step]`` in dB, stop inclusive, step defaults to 1."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise ConfigError(f"--gamma-grid expects start:stop[:step], got {text!r}")
    try:
        start, stop = float(parts[0]), float(parts[1])
        step = float(parts[2]) if len(parts) == 3 else 1.0
    except ValueError:
        raise ConfigError(f"--gamma-grid has a non-numeric field: {text!r}") from None
    if not step > 0:
        raise ConfigError("--gamma-grid step must be positive")
    if stop < start:
        raise ConfigError(f"--gamma-grid is empty: stop {stop} < start {start}")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(n)]


def _add_scenario_args(p):
    g = p.add_argument_group("scenario")
    g.add_argument("--scenario", required=True, choices=SCENARIO_NAMES)
    g.add_argument("--omega-db", type=float, action="append",
                   help="average branch power in dB; repeat per branch or give once with --branches")
    g.add_argument("--sigma", type=float, help="per-component std dev (corr-rayleigh)")
    g.add_argument("--rho", type=float, help="correlation coefficient (corr-rayleigh)")
    g.add_argument("--rice-k", type=float, help="Rice factor K, linear (iid-rice)")
    g.add_argument("--branches", type=int, help="number of branches L")
    g.add_argument("--select-n", type=int, help="number of combined strongest branches (ordered-rayleigh)")
    t = p.add_argument_group("threshold")
    t.add_argument("--esn0-db", type=float, default=1.0, help="Es/N0 in dB (default 1)")
    t.add_argument("--gamma-th-db", type=float, action="append", help="threshold in dB (repeatable)")
    t.add_argument("--gamma-grid", help="threshold grid start:stop[:step] in dB")


def _add_run_args(p, default_samples, methods=True):
    if methods:
        p.add_argument("--method", action="append", help=f"one of {', '.join(METHODS)} (repeatable)")
    p.add_argument("--samples", type=_count, default=default_samples, help="samples per estimate M")
    p.add_argument("--seed", type=_count, default=None, help=f"base seed (default ${SEED_ENV} or 0)")
    p.add_argument("--chunks", type=int, default=1, help="worker lanes; results do not depend on it")
    p.add_argument("--target-rel-err", type=float, default=0.05)
    p.add_argument("--out", help="output CSV path (default stdout)")


def build_parser():
    ap = _Parser(prog="rarefall", description="Rare-event estimators for EGC outage probabilities.")
    sub = ap.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    p = sub.add_parser("estimate", help="estimates at one or more thresholds")
    _add_scenario_args(p)
    _add_run_args(p, 100_000)
    p = sub.add_parser("sweep", help="outage estimates along a threshold grid")
    _add_scenario_args(p)
    _add_run_args(p, 500_000)
    p = sub.add_parser("efficiency", help="required runs per method along a threshold grid")
    _add_scenario_args(p)
    _add_run_args(p, 1_000_000)
    p = sub.add_parser("validate", help="oracle fixture comparisons and invariant checks")
    p.add_argument("--fixtures", help="fixture table (default: the packaged one)")
    p.add_argument("--samples", type=_count, default=200_000, help="samples for stochastic fixture checks")
    p.add_argument("--seed", type=_count, default=None)
    p.add_argument("--out", help="output path (default stdout)")
    return ap


def _omegas(args):
    if not args.omega_db:
        raise ConfigError(f"--scenario {args.scenario} needs --omega-db")
    om = [float(w) for w in db_to_linear(args.omega_db)]
    if len(om) == 1 and args.branches:
        om *= args.branches
    elif args.branches and args.branches != len(om):
        raise ConfigError(f"--branches {args.branches} disagrees with {len(om)} --omega-db values")
    return tuple(om)


def scenario_from_args(args):
    name = args.scenario
    if name == "inid-rayleigh":
        return build_scenario(name, omegas=_omegas(args))
    if name == "ordered-rayleigh":
        return build_scenario(name, omegas=_omegas(args), select_n=args.select_n)
    if name == "corr-rayleigh":
        return build_scenario(name, sigma=args.sigma, rho=args.rho, branches=args.branches)
    if args.omega_db is None or len(args.omega_db) != 1:
        raise ConfigError("iid-rice needs exactly one --omega-db")
    return build_scenario(name, K=args.rice_k, omega=float(db_to_linear(args.omega_db[0])),
                          branches=args.branches)


def _default_seed():
    text = os.environ.get(SEED_ENV)
    if text is None or text == "":
        return 0
    try:
        return _count(text)
    except argparse.ArgumentTypeError:
        raise ConfigError(f"${SEED_ENV} must be a non-negative integer, got {text!r}") from None


def config_from_args(args):
    seed = args.seed if args.seed is not None else _default_seed()
    if args.subcommand == "validate":
        return RunConfig("validate", samples=args.samples, seed=seed, out=args.out, fixtures=args.fixtures)
    scenario = scenario_from_args(args)
    thresholds = list(args.gamma_th_db or [])
    if args.gamma_grid:
        thresholds += parse_grid(args.gamma_grid)
    methods = args.method
    if not methods:
        if args.subcommand == "efficiency":
            methods = [m for m in METHODS if m != "box_is" or isinstance(scenario, (InidRayleigh, OrderedInidRayleigh))]
        else:
            methods = ["naive", "sphere_is"]
    if args.chunks < 1:
        raise ConfigError("--chunks must be >= 1")
    cfg = RunConfig(args.subcommand, scenario, thresholds, args.esn0_db, list(dict.fromkeys(methods)),
                    args.samples, seed, args.chunks, args.target_rel_err, args.out)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

def _stream(grid_index, method):
    # fixed per (threshold, method) so rows do not depend on which methods run
    return grid_index * len(METHODS) + METHODS.index(method)


def _base_row(cfg, g_db):
    sc = cfg.scenario
    return {"scenario": sc.name, "L": sc.L, "N": sc.combined_branches, "gamma_th_db": g_db, "seed": cfg.seed}


def _runs_for_target(method, p, p_tilde, cfg):
    if method == "naive":
        return required_runs_naive(p, cfg.target_rel_err, CONFIDENCE) if 0.0 < p < 1.0 else None
    return required_runs_is(p, p_tilde, cfg.target_rel_err, CONFIDENCE) if p > 0.0 else None


def _cv2(method, p, p_tilde):
    if p <= 0.0:
        return None
    if method == "naive":
        return (1.0 - p) / p
    return max(0.0, p_tilde / p - 1.0)


def run_sweep(cfg: RunConfig):
    """One row per (threshold, method) with the estimate and its error."""
    rows = []
    for gi, g_db in enumerate(cfg.thresholds_db):
        spec = ThresholdSpec(g_db, cfg.es_over_n0_db)
        for method in cfg.methods:
            est = estimate(method, cfg.scenario, spec, cfg.samples, cfg.seed,
                           stream=_stream(gi, method), lanes=cfg.lanes)
            row = _base_row(cfg, g_db)
            row.update(
                gamma0=est.gamma0, method=method, M=est.samples, p_hat=est.p_hat, std_err=est.std_err,
                rel_err=est.rel_err if est.p_hat > 0 else None, p_tilde=est.p_tilde,
                cv2=_cv2(method, est.p_hat, est.p_tilde),
                runs_for_target=_runs_for_target(method, est.p_hat, est.p_tilde, cfg),
                accept_rate=est.rejection.acceptance_rate if est.rejection else None,
                chunks=est.chunks,
            )
            rows.append(row)
    return rows


def run_efficiency(cfg: RunConfig):
    """Per threshold: p from sphere-IS, exact truncation probabilities, runs per method."""
    rows = []
    for gi, g_db in enumerate(cfg.thresholds_db):
        eff = efficiency_row(cfg.scenario, ThresholdSpec(g_db, cfg.es_over_n0_db), cfg.samples, cfg.seed,
                             target_rel_err=cfg.target_rel_err, stream=_stream(gi, "sphere_is"), lanes=cfg.lanes)
        p = eff.p_estimate
        rel = CONFIDENCE * eff.std_err / p if p > 0 else None
        per_method = {
            "naive": (None, _cv2("naive", p, None), eff.runs_naive, None),
            "sphere_is": (eff.p_tilde, eff.cv_squared, eff.runs_sphere_is, eff.accept_rate),
            "box_is": (eff.p_tilde_box, _cv2("box_is", p, eff.p_tilde_box) if eff.p_tilde_box else None,
                       eff.runs_box_is, None),
        }
        for method in cfg.methods:
            p_tilde, cv2, runs, acc = per_method[method]
            row = _base_row(cfg, g_db)
            row.update(gamma0=eff.gamma0, method=method, M=eff.samples, p_hat=p, std_err=eff.std_err,
                       rel_err=rel, p_tilde=p_tilde, cv2=cv2, runs_for_target=runs, accept_rate=acc,
                       chunks=eff.chunks)
            rows.append(row)
    return rows


def run_validate(cfg: RunConfig):
    from .validation import run_validation

    return run_validation(cfg.fixtures, samples=cfg.samples, seed=cfg.seed)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if not math.isfinite(v):
        return ""
    return repr(v)


def format_csv(rows, columns=CSV_COLUMNS):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _glue_negative_values(argv):
    # let "--gamma-grid -13:-1" through; argparse would read -13:-1 as an option
    out = list(argv)
    for i, a in enumerate(out[:-1]):
        if a in _VALUE_FLAGS and out[i + 1].startswith("-") and out[i + 1][1:2].isdigit():
            out[i] = f"{a}={out[i + 1]}"
            out[i + 1] = None
    return [a for a in out if a is not None]


_VALUE_FLAGS = {"--gamma-grid", "--gamma-th-db", "--omega-db", "--esn0-db"}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        cfg = config_from_args(args)
        if cfg.subcommand == "validate":
            results = run_validate(cfg)
            lines = [",".join(VALIDATE_COLUMNS)] + [r.line() for r in results]
            _emit("\n".join(lines) + "\n", cfg.out)
            failed = [r for r in results if not r.passed]
            for r in failed:
                print(f"FAILED {r.name}: deviation {r.measured!r} > bound {r.bound!r} {r.detail}".rstrip(),
                      file=sys.stderr)
            print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=sys.stderr)
            return EXIT_VALIDATION if failed else EXIT_OK
        rows = run_efficiency(cfg) if cfg.subcommand == "efficiency" else run_sweep(cfg)
        _emit(format_csv(rows), cfg.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
