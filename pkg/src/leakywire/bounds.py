"""Closed-form constants of the magnetic-destruction criterion and their numerics.

Constant chain for Ω = (-a, a)² and a field B supported in Ω:

    C      = max{2a, 1/(2a)}
    κ      = principal eigenvalue of the magnetic Neumann Laplacian on Ω
    α₀     = κ / (√2 (κ + 1) C)
    budget = 2 α₀² / α² − 1        (admissible ‖γ'‖∞ at coupling α)

and the discrete spectrum below -α²/4 is empty whenever
α √(1 + ‖γ'‖∞²) <= κ / ((κ + 1) C).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .eigensolve import lowest_eigenpairs
from .errors import SolverError
from .lattice import assemble_neumann_magnetic_laplacian
from .magnetic import FieldSpec


def constant_C(a: float) -> float:
    if not (a > 0):
        raise ValueError(f"a must be positive, got {a}")
    return max(2.0 * a, 1.0 / (2.0 * a))


def lambda2_square(a: float) -> float:
    """Second Neumann eigenvalue of the square (-a, a)²: (π / 2a)²."""
    if not (a > 0):
        raise ValueError(f"a must be positive, got {a}")
    return (math.pi / (2.0 * a)) ** 2


def lemma1_lower_bound(vol_ball: float, vol_omega: float, lambda2: float, c0: float) -> float:
    """vol(B) / (16 vol(ω)) · min{1, λ₂/2} · min{1, c₀/2}."""
    if min(vol_ball, vol_omega, lambda2, c0) <= 0:
        raise ValueError("all inputs must be positive")
    if vol_ball > vol_omega:
        raise ValueError("the ball must fit inside ω")
    return vol_ball / (16.0 * vol_omega) * min(1.0, lambda2 / 2.0) * min(1.0, c0 / 2.0)


def alpha0(kappa: float, C: float) -> float:
    if kappa < 0 or C <= 0:
        raise ValueError("need kappa >= 0 and C > 0")
    if math.isinf(kappa):
        return 1.0 / (math.sqrt(2.0) * C)
    return kappa / (math.sqrt(2.0) * (kappa + 1.0) * C)


def condition_met(alpha: float, gamma_sup: float, kappa: float, C: float) -> bool:
    """α √(1 + ‖γ'‖∞²) <= κ / ((κ + 1) C), evaluated as written."""
    if not (alpha > 0) or gamma_sup < 1:
        raise ValueError("need alpha > 0 and gamma_sup >= 1")
    return alpha * math.sqrt(1.0 + gamma_sup**2) <= kappa / ((kappa + 1.0) * C)


def deformation_budget(alpha: float, alpha0_val: float) -> float:
    """Admissible ‖γ'‖∞ at coupling α: 2 α₀² / α² − 1 (< 1 means no admissible curve)."""
    if not (alpha > 0):
        raise ValueError("alpha must be positive")
    return 2.0 * alpha0_val**2 / alpha**2 - 1.0


def budget_feasible(budget: float) -> bool:
    return budget >= 1.0


@dataclass
class KappaEstimate:
    value: float
    fine: float
    coarse: float
    n_fine: int
    n_coarse: int
    error_estimate: float
    order: int = 1
    converged: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def kappa(a: float, field: FieldSpec, n: int = 257, *, tol: float = 1e-10, seed: int = 42,
          order: int = 1, **solver_kw) -> KappaEstimate:
    """Principal eigenvalue of the magnetic Neumann Laplacian on Ω.

    Solved on nested grids with n and (n+1)/2 nodes per axis and Richardson
    extrapolated. The edge-restricted Neumann stencil is first-order accurate at
    the boundary, hence ``order=1`` by default.
    """
    if n < 129:
        raise ValueError(f"kappa needs n >= 129, got {n}")
    if n % 2 == 0:
        raise ValueError(f"n must be odd so the coarse grid nests, got {n}")
    n_coarse = (n - 1) // 2 + 1
    values = []
    ok = True
    for m in (n_coarse, n):
        op = assemble_neumann_magnetic_laplacian(a, field, m)
        res = lowest_eigenpairs(op, k=1, tol=tol, seed=seed, **solver_kw)
        if not res.converged:
            ok = False
        values.append(float(res.eigenvalues[0]))
    coarse, fine = values
    if not ok:
        raise SolverError(f"magnetic Neumann eigenproblem did not converge (n={n})")
    factor = 2.0**order - 1.0
    correction = (fine - coarse) / factor
    return KappaEstimate(fine + correction, fine, coarse, n, n_coarse, abs(correction), order, ok)


def lemma2_check(g, t, x) -> tuple[bool, float]:
    """|g(x)|² <= 2|I| ∫|g'|² + (2/|I|) ∫|g|² on sampled data.

    ``g`` holds samples on the uniform abscissae ``t`` (>= 1001 points);
    derivatives by central differences, integrals by the trapezoid rule. ``x`` is a
    sample index or a point of I (then g(x) is interpolated). Returns the verdict
    and the slack (right minus left side).
    """
    g = np.asarray(g)
    t = np.asarray(t, dtype=float)
    if g.shape != t.shape or t.size < 1001:
        raise ValueError("need at least 1001 matching samples")
    length = t[-1] - t[0]
    dg = np.gradient(g, t)
    rhs = 2 * length * np.trapezoid(np.abs(dg) ** 2, t) + 2 / length * np.trapezoid(np.abs(g) ** 2, t)
    if isinstance(x, (int, np.integer)):
        gx = g[x]
    else:
        gx = np.interp(x, t, g.real) + (1j * np.interp(x, t, g.imag) if np.iscomplexobj(g) else 0)
    slack = float(rhs - abs(gx) ** 2)
    return slack >= 0, slack


@dataclass
class BoundsReport:
    a: float
    C: float
    kappa: float
    kappa_error: float
    alpha: float
    alpha0: float
    budget: float
    feasible: bool
    gamma_sup: float
    condition_met: bool
    lambda2: float
    lemma1_bound: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def bounds_report(a: float, field: FieldSpec, alpha: float, gamma_sup: float, *, n: int = 257,
                  kappa_est: KappaEstimate | None = None, c0: float | None = None,
                  vol_ball: float | None = None, seed: int = 42, **solver_kw) -> BoundsReport:
    """Evaluate the full constant chain for one (field, α, ‖γ'‖∞) configuration."""
    if kappa_est is None:
        kappa_est = kappa(a, field, n, seed=seed, **solver_kw)
    k = max(kappa_est.value, 0.0)
    C = constant_C(a)
    a0 = alpha0(k, C)
    budget = deformation_budget(alpha, a0)
    lam2 = lambda2_square(a)
    lemma1 = None
    if c0 is not None:
        lemma1 = lemma1_lower_bound(vol_ball if vol_ball is not None else math.pi * (a / 2) ** 2,
                                    4 * a * a, lam2, c0)
    return BoundsReport(
        a=a, C=C, kappa=k, kappa_error=kappa_est.error_estimate, alpha=alpha, alpha0=a0,
        budget=budget, feasible=budget_feasible(budget), gamma_sup=gamma_sup,
        condition_met=condition_met(alpha, gamma_sup, k, C), lambda2=lam2, lemma1_bound=lemma1,
    )
