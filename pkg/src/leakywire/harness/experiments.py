"""Experiment drivers: spectrum, theorem2, weyl, weakfield and sweep."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np

from .. import __version__
from ..bounds import (KappaEstimate, alpha0, budget_feasible, condition_met, constant_C,
                      deformation_budget, kappa)
from ..eigensolve import classify, count_below, lowest_eigenpairs, rayleigh_quotient
from ..errors import ConfigError
from ..geometry import CurveSpec, gamma_prime_sup
from ..grid import GridSpec
from ..lattice import assemble_H
from . import svg
from .config import RunConfig

log = logging.getLogger(__name__)


@dataclass
class RunOutcome:
    manifest: dict
    rows: list[dict] | None = None
    plots: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.manifest["passed"])


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _assertion(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _outcome(config: RunConfig, started: str, results: dict, assertions: list[dict], *,
             tasks=None, convergence=None, rows=None, plots=None) -> RunOutcome:
    manifest = {
        "tool": "leakywire",
        "version": __version__,
        "config_hash": config.config_hash(),
        "experiment": config.experiment,
        "seed": config.solver.seed,
        "timestamps": {"started": started, "finished": _now()},
        "results": results,
        "tasks": tasks or [],
        "convergence": convergence or [],
        "assertions": assertions,
        "passed": all(a["passed"] for a in assertions),
    }
    return RunOutcome(manifest, rows, plots or {})


def threshold(alpha: float) -> float:
    return -alpha**2 / 4.0


def margin_abs(config: RunConfig, alpha: float) -> float:
    return config.margin * alpha**2


def solve_on(grid: GridSpec, config: RunConfig, curve: CurveSpec, alpha: float, k: int | None = None) -> dict:
    op = assemble_H(grid, config.field, curve, alpha)
    res = lowest_eigenpairs(op, k=k or config.solver.k, **config.solver.kwargs())
    thr, marg = threshold(alpha), margin_abs(config, alpha)
    return {
        "L": grid.L,
        "n": grid.n,
        "h": grid.h,
        "bc": grid.bc,
        "domain": grid.resolved_domain,
        "dimension": op.dimension,
        "eigenvalues": [float(v) for v in res.eigenvalues],
        "residuals": [float(r) for r in res.residuals],
        "converged": res.converged,
        "iterations": res.iterations,
        "n_below": count_below(res, thr, marg),
        "classes": classify(res.eigenvalues, thr, marg),
    }


def _smaller_box(grid: GridSpec) -> GridSpec:
    half = int(round((grid.n - 1) / 3.0))
    n = 2 * half + 1
    return GridSpec(half * grid.h, n, grid.bc, grid.domain)


def run_spectrum(config: RunConfig) -> RunOutcome:
    """Low-lying spectrum on two refinements and two box sizes, with bc bracketing."""
    started = _now()
    alpha = config.alpha
    grid = config.grid
    a = config.curve.a
    coarse = grid.coarsened()
    small = _smaller_box(grid)
    for g in (coarse, small):
        try:
            g.check_resolves(a)
        except ConfigError as exc:
            raise ConfigError(f"spectrum needs the coarse and reduced grids to resolve Ω too: {exc}") from None
    other_bc = "dirichlet" if grid.bc == "neumann" else "neumann"
    other = GridSpec(coarse.L, coarse.n, other_bc, coarse.resolved_domain)

    fine_run = solve_on(grid, config, config.curve, alpha)
    coarse_run = solve_on(coarse, config, config.curve, alpha)
    small_run = solve_on(small, config, config.curve, alpha)
    other_run = solve_on(other, config, config.curve, alpha)
    tasks = [dict(r, role=role) for r, role in
             ((fine_run, "primary"), (coarse_run, "coarse"), (small_run, "small_box"), (other_run, "other_bc"))]

    richardson = [2 * f - c for f, c in zip(fine_run["eigenvalues"], coarse_run["eigenvalues"])]
    thr, marg = threshold(alpha), margin_abs(config, alpha)
    convergence = [
        {"quantity": f"lambda_{i}", "coarse": c, "fine": f, "richardson": r,
         "n_coarse": coarse.n, "n_fine": grid.n, "order": 1}
        for i, (c, f, r) in enumerate(zip(coarse_run["eigenvalues"], fine_run["eigenvalues"], richardson))
    ]
    if grid.bc == "dirichlet":
        meaning = "eigenvalues below threshold-margin certify discrete spectrum (Dirichlet upper bound)"
    else:
        meaning = "no eigenvalue below threshold-margin excludes discrete spectrum in the box piece (Neumann lower bound)"
    results = {
        "alpha": alpha,
        "threshold": thr,
        "margin": marg,
        "bc": grid.bc,
        "interpretation": meaning,
        "lambda_min": fine_run["eigenvalues"][0],
        "lambda_min_richardson": richardson[0],
        "n_below": fine_run["n_below"],
        "n_below_coarse": coarse_run["n_below"],
        "n_below_small_box": small_run["n_below"],
        "classes": fine_run["classes"],
    }

    neu, dir_ = (coarse_run, other_run) if grid.bc == "neumann" else (other_run, coarse_run)
    tol = 1e-8 * max(1.0, abs(neu["eigenvalues"][0]))
    assertions = [
        _assertion("solver_converged", all(t["converged"] for t in tasks)),
        _assertion("neumann_below_dirichlet", neu["eigenvalues"][0] <= dir_["eigenvalues"][0] + tol,
                   f"N={neu['eigenvalues'][0]:.10g} D={dir_['eigenvalues'][0]:.10g}"),
    ]
    if alpha == 0:
        assertions.append(_assertion("nonnegative_without_coupling", fine_run["eigenvalues"][0] >= -1e-8,
                                     f"lambda_min={fine_run['eigenvalues'][0]:.3e}"))
    if config.curve.kind == "straight" and config.field.is_zero and alpha > 0:
        assertions.append(_assertion("straight_line_no_discrete_spectrum", fine_run["n_below"] == 0,
                                     f"n_below={fine_run['n_below']}"))
    return _outcome(config, started, results, assertions, tasks=tasks, convergence=convergence)


def omega_grid(config: RunConfig, bc: str = "neumann") -> GridSpec:
    return GridSpec(config.curve.a, config.kappa_n, bc, "square")


def evaluate_task(config: RunConfig, curve: CurveSpec, alpha: float, kap: KappaEstimate,
                  s: float | None = None) -> dict:
    """Constant chain plus truncated spectrum for one (curve, field, α) combination.

    With ``truncation='omega'`` the plane is cut by a Neumann wall along ∂Ω; the
    outer piece is bounded below by -α²/4 (straight line, no field) and only the
    inner piece is computed. With ``truncation='box'`` the config grid is used.
    """
    gsup = gamma_prime_sup(curve)
    k_val = max(kap.value, 0.0)
    C = constant_C(curve.a)
    a0 = alpha0(k_val, C)
    budget = deformation_budget(alpha, a0)
    met = condition_met(alpha, gsup, k_val, C)
    trunc = config.resolved_truncation
    grid = omega_grid(config) if trunc == "omega" else config.grid
    run = solve_on(grid, config, curve, alpha)
    check_grid = GridSpec(grid.L, grid.n, "dirichlet" if grid.bc == "neumann" else "neumann",
                          grid.resolved_domain)
    partner = solve_on(check_grid, config, curve, alpha, k=1)
    neu, dir_ = (run, partner) if grid.bc == "neumann" else (partner, run)

    if met:
        verdict = "consistent" if run["n_below"] == 0 else "VIOLATION"
    elif not budget_feasible(budget):
        verdict = "outside theorem scope (theorem gives no prediction: budget < 1)"
    else:
        verdict = "outside theorem scope"
    # lower bound for the inner piece implied by the trace estimate (continuum)
    inner_bound = k_val - C * alpha * (1 + k_val) * math.sqrt(1 + gsup**2)
    return {
        "alpha": alpha,
        "h": curve.h if curve.kind == "bump" else (0.0 if curve.kind == "straight" else float("nan")),
        "s": config.field.scale if s is None else s,
        "kappa": k_val,
        "alpha0": a0,
        "budget": budget,
        "gamma_sup": gsup,
        "condition_met": met,
        "n_below": run["n_below"],
        "lambda_min": run["eigenvalues"][0],
        "residual": run["residuals"][0],
        "grid_n": grid.n,
        "box_L": grid.L,
        "curve": curve.label,
        "truncation": trunc,
        "bc": grid.bc,
        "eigenvalues": run["eigenvalues"],
        "threshold": threshold(alpha),
        "margin": margin_abs(config, alpha),
        "converged": run["converged"] and partner["converged"],
        "budget_feasible": budget_feasible(budget),
        "verdict": verdict,
        "inner_piece_bound": inner_bound,
        "neumann_ground": neu["eigenvalues"][0],
        "dirichlet_ground": dir_["eigenvalues"][0],
    }


def _kappa_for(config: RunConfig, fld) -> KappaEstimate:
    s = config.solver
    return kappa(fld.a, fld, config.kappa_n, tol=min(s.tol, 1e-10), seed=s.seed,
                 max_iter=s.max_iter, precond=s.precond, shift=s.shift)


def _task_assertions(tasks: list[dict]) -> list[dict]:
    ok_tasks = [t for t in tasks if "error" not in t]
    violations = [t for t in ok_tasks if t["condition_met"] and t["n_below"] > 0]
    bracket = [t for t in ok_tasks
               if t["neumann_ground"] > t["dirichlet_ground"] + 1e-8 * max(1.0, abs(t["dirichlet_ground"]))]
    return [
        _assertion("theorem2_consistency", not violations,
                   f"{len(violations)} task(s) with criterion met and eigenvalues below threshold"),
        _assertion("neumann_below_dirichlet", not bracket, f"{len(bracket)} task(s) out of order"),
        _assertion("solver_converged", all(t["converged"] for t in ok_tasks)),
        _assertion("tasks_completed", len(ok_tasks) == len(tasks),
                   f"{len(tasks) - len(ok_tasks)} task(s) failed"),
    ]


def run_theorem2_check(config: RunConfig) -> RunOutcome:
    started = _now()
    if config.field.is_zero:
        raise ConfigError("theorem2 needs a field that is not identically zero")
    kap = _kappa_for(config, config.field)
    C = constant_C(config.curve.a)
    a0 = alpha0(max(kap.value, 0.0), C)
    if config.theorem2.alpha_fractions:
        alphas = [f * a0 for f in config.theorem2.alpha_fractions]
    else:
        alphas = [config.alpha]
    curves = [config.curve, *config.theorem2.curves]
    tasks = [evaluate_task(config, c, al, kap) for c in curves for al in alphas]
    results = {
        "a": config.curve.a,
        "C": C,
        "kappa": kap.to_dict(),
        "alpha0": a0,
        "reports": [{k: t[k] for k in ("curve", "alpha", "budget", "gamma_sup", "condition_met",
                                        "n_below", "verdict")} for t in tasks],
    }
    convergence = [{"quantity": "kappa", "coarse": kap.coarse, "fine": kap.fine, "richardson": kap.value,
                    "n_coarse": kap.n_coarse, "n_fine": kap.n_fine, "order": kap.order}]
    assertions = [_assertion("kappa_positive", kap.value > 0, f"kappa={kap.value:.6g}")]
    assertions += _task_assertions(tasks)
    return _outcome(config, started, results, assertions, tasks=tasks, convergence=convergence, rows=tasks)


def weyl_trial(coords: np.ndarray, alpha: float, p: float) -> np.ndarray:
    """exp(-α|x-y|/(2√2)) exp(ip(x+y)/2) sampled at node coordinates."""
    x, y = coords[:, 0], coords[:, 1]
    v = np.exp(-alpha * np.abs(x - y) / (2 * math.sqrt(2)))
    return v * np.exp(1j * p * (x + y) / 2) if p else v


def run_weyl_check(config: RunConfig) -> RunOutcome:
    """Rayleigh quotients of the transverse trial function on growing Neumann boxes."""
    started = _now()
    if config.curve.kind != "straight":
        raise ConfigError("weyl check needs the straight line")
    spacing = config.weyl.spacing or config.grid.h
    alphas = config.weyl.alphas or (config.alpha,)
    table = []
    assertions = []
    for alpha in alphas:
        thr = threshold(alpha)
        q0 = []
        for L in config.weyl.L:
            half = int(round(L / spacing))
            grid = GridSpec(half * spacing, 2 * half + 1, "neumann", config.grid.domain)
            op = assemble_H(grid, config.field, config.curve, alpha)
            base = None
            for p in sorted(config.weyl.p, key=abs):
                q = rayleigh_quotient(op, weyl_trial(op.coords, alpha, p))
                row = {"alpha": alpha, "L": grid.L, "n": grid.n, "p": p, "quotient": q,
                       "excess": q - thr, "rel_err": (q - thr) / abs(thr)}
                if p == 0:
                    base = q
                    q0.append(q)
                elif base is not None:
                    # the longitudinal wave adds p²/2 in the continuum
                    row["longitudinal_energy"] = q - base
                    row["p2_over_2"] = p * p / 2
                table.append(row)
        if q0:
            d = np.diff(q0)
            monotone = bool(np.all(d >= 0) or np.all(d <= 0))
            final = abs(q0[-1] - thr) / abs(thr)
            assertions.append(_assertion(f"weyl_monotone_alpha={alpha:g}", monotone,
                                         " -> ".join(f"{v:.6f}" for v in q0)))
            assertions.append(_assertion(f"weyl_limit_alpha={alpha:g}", final <= config.weyl.rel_tol,
                                         f"rel. deviation {final:.4%} (tol {config.weyl.rel_tol:.2%})"))
    domain = GridSpec(config.grid.L, config.grid.n, "neumann", config.grid.domain).resolved_domain
    results = {"spacing": spacing, "domain": domain, "quotients": table}
    return _outcome(config, started, results, assertions)


def run_weakfield(config: RunConfig) -> RunOutcome:
    started = _now()
    C = constant_C(config.curve.a)
    table = []
    for s in config.weakfield_s:
        kap = _kappa_for(config, config.field.with_scale(s))
        k_val = max(kap.value, 0.0)
        table.append({"s": s, "kappa": kap.value, "kappa_error": kap.error_estimate,
                      "alpha0": alpha0(k_val, C), "kappa_coarse": kap.coarse, "kappa_fine": kap.fine})
    positive = sorted((r for r in table if r["s"] > 0), key=lambda r: -r["s"])
    ks = [r["kappa"] for r in positive]
    assertions = [_assertion("kappa_strictly_decreasing", all(b < a for a, b in zip(ks, ks[1:])),
                             ", ".join(f"s={r['s']:g}: {r['kappa']:.6g}" for r in positive))]
    zero = [r for r in table if r["s"] == 0]
    if zero or config.field.is_zero:
        for r in zero:
            assertions.append(_assertion("kappa_zero_field", abs(r["kappa"]) <= 1e-8, f"kappa(0)={r['kappa']:.3e}"))
            assertions.append(_assertion("alpha0_zero_field", r["alpha0"] <= 1e-8, f"alpha0(0)={r['alpha0']:.3e}"))
    return _outcome(config, started, {"table": table, "C": C}, assertions)


def _sweep_worker(args):
    config, curve, alpha, kap, s, key = args
    try:
        return key, evaluate_task(config, curve, alpha, kap, s)
    except Exception as exc:  # noqa: BLE001 - a failed task is recorded, the sweep goes on
        return key, {"error": f"{type(exc).__name__}: {exc}", "alpha": alpha, "h": curve.h, "s": s}


def run_sweep(config: RunConfig, workers: int | None = None) -> RunOutcome:
    """Grid of (α, h, s) tasks; CSV rows plus one heatmap per field scale."""
    started = _now()
    workers = workers or config.workers
    ax = config.sweep
    kappas = {}
    for s in ax.s:
        kappas[s] = _kappa_for(config, config.field.with_scale(s))
    jobs = []
    for i_s, s in enumerate(ax.s):
        cfg_s = replace(config, field=config.field.with_scale(s))
        for i_a, alpha in enumerate(ax.alpha):
            for i_h, h in enumerate(ax.h):
                curve = CurveSpec.bump(h, config.curve.a, sampling_n=config.curve.sampling_n)
                jobs.append((cfg_s, curve, alpha, kappas[s], s, (i_s, i_a, i_h)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            done = dict(pool.map(_sweep_worker, jobs))
    else:
        done = dict(map(_sweep_worker, jobs))
    keys = sorted(done)
    tasks = [dict(done[key], index=list(key)) for key in keys]

    plots = {}
    for i_s, s in enumerate(ax.s):
        counts = [[None] * len(ax.alpha) for _ in ax.h]
        feas = [[False] * len(ax.alpha) for _ in ax.h]
        for t in tasks:
            if t["index"][0] != i_s or "error" in t:
                continue
            _, i_a, i_h = t["index"]
            counts[i_h][i_a] = t["n_below"]
            feas[i_h][i_a] = t["condition_met"]
        plots[f"heatmap_s{i_s}.svg"] = svg.heatmap(
            counts, feas, [f"{a:.4g}" for a in ax.alpha], [f"{h:.3g}" for h in ax.h],
            title=f"eigenvalues below -alpha^2/4 (field scale s={s:g}, {config.resolved_truncation} truncation)",
            xname="alpha", yname="bump amplitude h",
        )
    results = {
        "axes": {"alpha": list(ax.alpha), "h": list(ax.h), "s": list(ax.s)},
        "kappa": {repr(s): k.to_dict() for s, k in kappas.items()},
        "n_tasks": len(tasks),
        "n_failed": sum("error" in t for t in tasks),
    }
    rows = [t for t in tasks]
    return _outcome(config, started, results, _task_assertions(tasks), tasks=tasks, rows=rows, plots=plots)


def run(config: RunConfig, workers: int | None = None) -> RunOutcome:
    dispatch = {
        "spectrum": run_spectrum,
        "theorem2": run_theorem2_check,
        "weyl": run_weyl_check,
        "weakfield": run_weakfield,
    }
    if config.experiment == "sweep":
        return run_sweep(config, workers)
    return dispatch[config.experiment](config)
