"""Command line entry point.

    leakywire run <config.json>
    leakywire sweep <config.json> --workers N
    leakywire bounds <config.json>
    leakywire validate <config.json>

Exit status: 0 when every assertion holds, 2 when one is violated, 3 for an
invalid configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..bounds import bounds_report
from ..errors import ConfigError, SolverError
from ..geometry import gamma_prime_sup, validate_curve
from ..lattice import assemble_H, write_matrix_market
from ..magnetic import validate_field
from . import store
from .config import load
from .experiments import run

EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG = 0, 2, 3

log = logging.getLogger("leakywire")


def _print_assertions(manifest: dict) -> None:
    for a in manifest["assertions"]:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"[{status}] {a['name']}" + (f": {a['detail']}" if a["detail"] else ""))


def _execute(cfg, workers=None, dump_matrix=None) -> int:
    if dump_matrix:
        alpha = cfg.alpha if cfg.alpha is not None else 0.0
        op = assemble_H(cfg.grid, cfg.field, cfg.curve, alpha)
        write_matrix_market(op, dump_matrix)
        log.info("operator written to %s", dump_matrix)
    outcome = run(cfg, workers)
    out = store.save_run(cfg.to_dict(), cfg.config_hash(), outcome.manifest, outcome.rows, outcome.plots)
    _print_assertions(outcome.manifest)
    print(f"results in {out}")
    return EXIT_OK if outcome.passed else EXIT_VIOLATION


def cmd_run(args) -> int:
    cfg = load(args.config)
    return _execute(cfg, args.workers, args.dump_matrix)


def cmd_sweep(args) -> int:
    cfg = load(args.config)
    if cfg.experiment != "sweep":
        cfg = replace(cfg, experiment="sweep")
        cfg.validate()
    return _execute(cfg, args.workers)


def cmd_bounds(args) -> int:
    cfg = load(args.config)
    if cfg.field.is_zero:
        raise ConfigError("bounds need a field that is not identically zero")
    alpha = cfg.alpha
    gsup = gamma_prime_sup(cfg.curve)
    s = cfg.solver
    rep = bounds_report(cfg.curve.a, cfg.field, alpha if alpha else 1.0, gsup, n=cfg.kappa_n,
                        seed=s.seed, max_iter=s.max_iter, precond=s.precond, shift=s.shift)
    d = rep.to_dict()
    if not alpha:
        # no coupling given: report the constants only
        for key in ("alpha", "budget", "feasible", "condition_met"):
            d[key] = None
    sys.stdout.write(store.dumps(d))
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = load(args.config)
    reports = [validate_curve(c) for c in (cfg.curve, *cfg.theorem2.curves)] + [validate_field(cfg.field)]
    for r in reports:
        sys.stdout.write(store.dumps(r.to_dict()))
    cfg.grid.check_resolves(cfg.curve.a)
    print(f"config ok ({cfg.experiment}, hash {cfg.config_hash()})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leakywire", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the experiment named in the config")
    r.add_argument("config")
    r.add_argument("--workers", type=int, default=None, help="worker processes (sweep only)")
    r.add_argument("--dump-matrix", type=Path, default=None, metavar="PATH",
                   help="also write the assembled operator in Matrix Market format")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("config")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bounds", help="print the constant chain for the configured field")
    b.add_argument("config")
    b.set_defaults(func=cmd_bounds)

    v = sub.add_parser("validate", help="check a config without solving anything")
    v.add_argument("config")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", None) is not None and args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
