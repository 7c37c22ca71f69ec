"""Interaction support Γ = {(x, γ(x))}: a local deformation of the line y = x.

Outside the window (-a, a) every curve coincides with y = x. Three families are
built in:

* ``straight``: γ(x) = x.
* ``bump``: γ(x) = x + h cos²(πx / 2a) on [-a, a]. The added term and its
  derivative vanish at ±a, so γ is C¹.
* ``polyline``: piecewise-linear through user vertices from (-a, -a) to (a, a).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError
from .grid import GridSpec
from .validation import ValidationReport

KINDS = ("straight", "bump", "polyline")

# Gauss-Legendre nodes for per-cell arc-length integrals (exact on polyline pieces)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


@dataclass(frozen=True)
class CurveSpec:
    a: float
    kind: str = "straight"
    h: float = 0.0
    vertices: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    sampling_n: int = 4001

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((float(x), float(y)) for x, y in self.vertices))

    @classmethod
    def straight(cls, a: float = 1.0, **kw) -> "CurveSpec":
        return cls(a, "straight", **kw)

    @classmethod
    def bump(cls, h: float, a: float = 1.0, **kw) -> "CurveSpec":
        return cls(a, "bump", h=h, **kw)

    @classmethod
    def polyline(cls, vertices, a: float = 1.0, **kw) -> "CurveSpec":
        return cls(a, "polyline", vertices=tuple(vertices), **kw)

    @property
    def label(self) -> str:
        if self.kind == "bump":
            return f"bump(h={self.h:g})"
        if self.kind == "polyline":
            return "polyline(" + ";".join(f"{x:g},{y:g}" for x, y in self.vertices) + ")"
        return "straight"

    def breakpoints(self) -> np.ndarray:
        """Abscissae where γ' may jump."""
        if self.kind == "polyline":
            return np.array([v[0] for v in self.vertices])
        return np.array([-self.a, self.a])

    def to_dict(self) -> dict:
        d = {"a": self.a, "kind": self.kind, "sampling_n": self.sampling_n}
        if self.kind == "bump":
            d["h"] = self.h
        if self.kind == "polyline":
            d["vertices"] = [list(v) for v in self.vertices]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CurveSpec":
        unknown = set(d) - {"a", "kind", "h", "vertices", "sampling_n"}
        if unknown:
            raise ConfigError(f"unknown curve keys {sorted(unknown)}")
        if "a" not in d:
            raise ConfigError("curve is missing 'a'")
        return cls(
            a=float(d["a"]),
            kind=d.get("kind", "straight"),
            h=float(d.get("h", 0.0)),
            vertices=tuple(tuple(v) for v in d.get("vertices", ())),
            sampling_n=int(d.get("sampling_n", 4001)),
        )


def eval_gamma(curve: CurveSpec, x):
    """γ(x); scalar in, scalar out, array in, array out."""
    x = np.asarray(x, dtype=float)
    a = curve.a
    inside = np.abs(x) < a
    if curve.kind == "straight":
        y = x.copy()
    elif curve.kind == "bump":
        y = x + np.where(inside, curve.h * np.cos(np.pi * x / (2 * a)) ** 2, 0.0)
    elif curve.kind == "polyline":
        vx, vy = np.array(curve.vertices).T
        y = np.where(inside, np.interp(x, vx, vy), x)
    else:
        raise ConfigError(f"unknown curve kind {curve.kind!r}")
    return y[()] if y.ndim == 0 else y


def gamma_prime(curve: CurveSpec, x):
    """γ'(x). At polyline vertices the right-hand slope is returned."""
    x = np.asarray(x, dtype=float)
    a = curve.a
    inside = np.abs(x) < a
    if curve.kind == "straight":
        d = np.ones_like(x)
    elif curve.kind == "bump":
        d = 1.0 - np.where(inside, curve.h * np.pi / (2 * a) * np.sin(np.pi * x / a), 0.0)
    elif curve.kind == "polyline":
        vx, vy = np.array(curve.vertices).T
        slopes = np.diff(vy) / np.diff(vx)
        seg = np.clip(np.searchsorted(vx, x, side="right") - 1, 0, len(slopes) - 1)
        d = np.where(inside | (x == -a), slopes[seg], 1.0)
    else:
        raise ConfigError(f"unknown curve kind {curve.kind!r}")
    return d[()] if d.ndim == 0 else d


def validate_curve(curve: CurveSpec) -> ValidationReport:
    report = ValidationReport(f"curve {curve.label}")
    a = curve.a
    if not (a > 0):
        report.add("a > 0", detail=f"a = {a}")
        return report
    if curve.kind not in KINDS:
        report.add("known kind", detail=f"kind = {curve.kind!r}")
        return report
    if curve.sampling_n < 1000:
        report.add("sampling_n >= 1000", detail=f"sampling_n = {curve.sampling_n}")

    if curve.kind == "polyline":
        v = np.array(curve.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 2 or v.shape[1] != 2:
            report.add("polyline has >= 2 (x, y) vertices")
            return report
        dx = np.diff(v[:, 0])
        for k in np.flatnonzero(dx <= 0):
            report.add("vertex x strictly increasing", witness=v[k + 1])
        if not np.allclose(v[0], (-a, -a), rtol=0, atol=1e-12):
            report.add("first vertex is (-a, -a)", witness=v[0])
        if not np.allclose(v[-1], (a, a), rtol=0, atol=1e-12):
            report.add("last vertex is (a, a)", witness=v[-1])
        for p in v[np.any(np.abs(v) > a * (1 + 1e-12), axis=1)]:
            report.add("vertices inside [-a, a]^2", witness=p)
        if not report.ok:
            return report

    if curve.kind == "bump" and abs(curve.h) > a:
        # γ(0) = h, so x = 0 is the witness
        report.add("|h| <= a", witness=(0.0, curve.h), detail=f"h = {curve.h}")

    xs = np.linspace(-a, a, curve.sampling_n)
    if curve.kind == "bump":
        # the containment maximum may fall between samples
        xs = np.union1d(xs, [0.0])
    g = eval_gamma(curve, xs)
    bad = np.flatnonzero(np.abs(g) > a * (1 + 1e-12))
    if bad.size:
        k = bad[np.argmax(np.abs(g[bad]))]
        report.add("|γ(x)| <= a on (-a, a)", witness=(xs[k], g[k]))

    outside = np.concatenate([np.linspace(-5 * a, -a, 200), np.linspace(a, 5 * a, 200)])
    off = np.abs(eval_gamma(curve, outside) - outside)
    if np.any(off > 0):
        k = int(np.argmax(off))
        report.add("γ(x) = x for |x| >= a", witness=(outside[k],))
    return report


def require_valid(curve: CurveSpec) -> None:
    report = validate_curve(curve)
    if not report.ok:
        first = report.violations[0]
        raise ConfigError(f"{report.subject}: violates {first.invariant} (witness {first.witness})")


def gamma_prime_sup(curve: CurveSpec) -> float:
    """‖γ'‖∞ over ℝ (always >= 1 because the outer slope is 1)."""
    if curve.kind == "straight":
        return 1.0
    if curve.kind == "polyline":
        v = np.array(curve.vertices, dtype=float)
        slopes = np.abs(np.diff(v[:, 1]) / np.diff(v[:, 0]))
        return float(max(1.0, slopes.max()))

    a = curve.a
    xs = np.linspace(-a, a, curve.sampling_n)
    vals = np.abs(gamma_prime(curve, xs))
    k = int(np.argmax(vals))
    best = float(vals[k])
    step = xs[1] - xs[0]
    lo, hi = max(-a, xs[k] - step), min(a, xs[k] + step)
    if hi > lo:
        res = minimize_scalar(
            lambda t: -abs(float(gamma_prime(curve, t))),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12 * max(a, 1.0)},
        )
        best = max(best, -float(res.fun))
    return max(1.0, best)


def arc_length(curve: CurveSpec, x0: float, x1: float) -> float:
    """Arc length of Γ over x ∈ [x0, x1]."""
    cuts = curve.breakpoints()
    knots = np.concatenate([[x0], cuts[(cuts > x0) & (cuts < x1)], [x1]])
    panel = curve.a / 32.0
    total = 0.0
    for lo, hi in zip(knots[:-1], knots[1:]):
        # smooth between knots; panels of width <= a/32 keep 8-point GL near 1e-14
        edges = np.linspace(lo, hi, max(1, int(np.ceil((hi - lo) / panel))) + 1)
        mid, half = 0.5 * (edges[:-1] + edges[1:]), 0.5 * np.diff(edges)
        t = mid[:, None] + half[:, None] * _GL_X
        total += float(np.sum(half * (np.sqrt(1.0 + gamma_prime(curve, t) ** 2) @ _GL_W)))
    return total


@dataclass(frozen=True)
class LineWeights:
    """Arc-length weights of Γ rasterised on the nodes of a grid.

    ``i``, ``j`` are node indices along x and y; ``w`` the arc length carried.
    """

    i: np.ndarray
    j: np.ndarray
    w: np.ndarray

    @property
    def total(self) -> float:
        return float(self.w.sum())

    def as_array(self, n: int) -> np.ndarray:
        out = np.zeros((n, n))
        np.add.at(out, (self.i, self.j), self.w)
        return out


def arc_length_weights(curve: CurveSpec, grid: GridSpec) -> LineWeights:
    """Distribute the arc length of Γ onto grid nodes, column by column.

    Column ``x_i`` owns the arc length over its cell ``[x_i - h/2, x_i + h/2]``
    (clipped to the box); it is split between the two nodes vertically bracketing
    ``γ(x_i)`` by linear interpolation. The weights therefore sum to the arc length
    of Γ inside the box.
    """
    L, n, h = grid.L, grid.n, grid.h
    x = grid.axis()
    g = eval_gamma(curve, x)
    if np.any(np.abs(g) > L * (1 + 1e-12)):
        k = int(np.argmax(np.abs(g)))
        raise ConfigError(f"curve leaves the grid box at x = {x[k]:.6g} (γ = {g[k]:.6g}, L = {L})")

    cell_lo = np.maximum(x - h / 2, -L)
    cell_hi = np.minimum(x + h / 2, L)
    if curve.kind == "straight":
        w = np.sqrt(2.0) * (cell_hi - cell_lo)
    else:
        w = np.array([arc_length(curve, lo, hi) for lo, hi in zip(cell_lo, cell_hi)])

    pos = (g + L) / h
    j0 = np.floor(pos).astype(int)
    frac = pos - j0
    snap = frac > 1 - 1e-9
    j0[snap] += 1
    frac[snap | (frac < 1e-9)] = 0.0
    j0 = np.clip(j0, 0, n - 1)

    cols = np.arange(n)
    split = frac > 0
    ii = np.concatenate([cols, cols[split]])
    jj = np.concatenate([j0, j0[split] + 1])
    ww = np.concatenate([w * (1 - frac), (w * frac)[split]])
    return LineWeights(ii, jj, ww)
