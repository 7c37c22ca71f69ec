"""Compactly supported magnetic fields and their Landau-gauge potentials.

All builtin fields live inside Ω = (-a, a)². The vector potential is always

    A(x, y) = (-∫₀^y B(x, t) dt, 0),

which vanishes identically for |x| > a. For each builtin family the support of
B on a vertical line x = const is a single interval ``[lo(x), hi(x)]``, so the
integral reduces to a closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import erf

from .errors import ConfigError
from .validation import ValidationReport

KINDS = ("zero", "square_bump", "disk_bump", "gaussian_truncated")

_RING_POINTS = 256


@dataclass(frozen=True)
class FieldSpec:
    a: float
    kind: str = "zero"
    b: float = 0.0
    c: float = 0.0
    R: float = 0.0
    center: tuple[float, float] = (0.0, 0.0)
    sigma: float = 0.0
    cutoff: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))

    @classmethod
    def zero(cls, a: float = 1.0) -> "FieldSpec":
        return cls(a, "zero")

    @classmethod
    def square_bump(cls, b: float, c: float, a: float = 1.0, scale: float = 1.0) -> "FieldSpec":
        return cls(a, "square_bump", b=b, c=c, scale=scale)

    @classmethod
    def disk_bump(cls, b: float, R: float, a: float = 1.0, center=(0.0, 0.0), scale: float = 1.0) -> "FieldSpec":
        return cls(a, "disk_bump", b=b, R=R, center=center, scale=scale)

    @classmethod
    def gaussian_truncated(cls, b: float, sigma: float, cutoff: float, a: float = 1.0,
                           center=(0.0, 0.0), scale: float = 1.0) -> "FieldSpec":
        return cls(a, "gaussian_truncated", b=b, sigma=sigma, cutoff=cutoff, center=center, scale=scale)

    def with_scale(self, scale: float) -> "FieldSpec":
        return replace(self, scale=float(scale))

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or self.b == 0 or self.scale == 0

    @property
    def label(self) -> str:
        if self.kind == "zero":
            return "zero"
        return f"{self.kind}(b={self.b:g},s={self.scale:g})"

    def to_dict(self) -> dict:
        d = {"a": self.a, "kind": self.kind, "scale": self.scale}
        if self.kind != "zero":
            d["b"] = self.b
        if self.kind == "square_bump":
            d["c"] = self.c
        if self.kind == "disk_bump":
            d.update(R=self.R, center=list(self.center))
        if self.kind == "gaussian_truncated":
            d.update(sigma=self.sigma, cutoff=self.cutoff, center=list(self.center))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FieldSpec":
        unknown = set(d) - {"a", "kind", "b", "c", "R", "center", "sigma", "cutoff", "scale"}
        if unknown:
            raise ConfigError(f"unknown field keys {sorted(unknown)}")
        if "a" not in d:
            raise ConfigError("field is missing 'a'")
        return cls(
            a=float(d["a"]),
            kind=d.get("kind", "zero"),
            b=float(d.get("b", 0.0)),
            c=float(d.get("c", 0.0)),
            R=float(d.get("R", 0.0)),
            center=tuple(d.get("center", (0.0, 0.0))),
            sigma=float(d.get("sigma", 0.0)),
            cutoff=float(d.get("cutoff", 0.0)),
            scale=float(d.get("scale", 1.0)),
        )


def _chord(field: FieldSpec, x):
    """Support interval [lo, hi] of B on the vertical line through x, and a mask."""
    if field.kind == "square_bump":
        inside = np.abs(x) <= field.c
        lo = np.full_like(x, -field.c)
        hi = np.full_like(x, field.c)
        return lo, hi, inside
    radius = field.R if field.kind == "disk_bump" else field.cutoff
    x0, y0 = field.center
    d2 = radius**2 - (x - x0) ** 2
    inside = d2 >= 0
    half = np.sqrt(np.where(inside, d2, 0.0))
    return y0 - half, y0 + half, inside


def _unscaled_B(field: FieldSpec, x, y):
    if field.kind == "zero":
        return np.zeros(np.broadcast(x, y).shape)
    if field.kind == "square_bump":
        return np.where((np.abs(x) <= field.c) & (np.abs(y) <= field.c), field.b, 0.0)
    x0, y0 = field.center
    r2 = (x - x0) ** 2 + (y - y0) ** 2
    if field.kind == "disk_bump":
        return np.where(r2 <= field.R**2, field.b, 0.0)
    if field.kind == "gaussian_truncated":
        return np.where(r2 <= field.cutoff**2, field.b * np.exp(-r2 / (2 * field.sigma**2)), 0.0)
    raise ConfigError(f"unknown field kind {field.kind!r}")


def eval_B(field: FieldSpec, x, y):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    out = field.scale * _unscaled_B(field, x, y)
    return out[()] if out.ndim == 0 else out


def _unscaled_Ax(field: FieldSpec, x, y):
    shape = np.broadcast(x, y).shape
    if field.kind == "zero":
        return np.zeros(shape)
    x, y = np.broadcast_to(x, shape), np.broadcast_to(y, shape)
    lo, hi, inside = _chord(field, x)
    # signed length of [0, y] ∩ [lo, hi] is clip(y) - clip(0)
    top = np.clip(y, lo, hi)
    bottom = np.clip(0.0, lo, hi)
    if field.kind in ("square_bump", "disk_bump"):
        integral = field.b * (top - bottom)
    else:
        s, (x0, y0) = field.sigma, field.center
        root = s * np.sqrt(2.0)
        integral = (
            field.b
            * np.exp(-((x - x0) ** 2) / (2 * s**2))
            * s * np.sqrt(np.pi / 2)
            * (erf((top - y0) / root) - erf((bottom - y0) / root))
        )
    return -np.where(inside, integral, 0.0)


def landau_A(field: FieldSpec, x, y):
    """Landau-gauge vector potential (A_x, A_y) with A_y ≡ 0."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    ax = field.scale * _unscaled_Ax(field, x, y)
    ay = np.zeros_like(ax)
    if ax.ndim == 0:
        return ax[()], ay[()]
    return ax, ay


def flux(field: FieldSpec) -> float:
    """Total flux ∫_Ω B."""
    if field.kind == "zero":
        base = 0.0
    elif field.kind == "square_bump":
        base = field.b * (2 * field.c) ** 2
    elif field.kind == "disk_bump":
        base = field.b * np.pi * field.R**2
    elif field.kind == "gaussian_truncated":
        s2 = field.sigma**2
        base = field.b * 2 * np.pi * s2 * (1 - np.exp(-field.cutoff**2 / (2 * s2)))
    else:
        raise ConfigError(f"unknown field kind {field.kind!r}")
    return field.scale * base


def _ring(a: float) -> tuple[np.ndarray, np.ndarray]:
    """Points on the square of half-width a(1 + 1e-9), just outside Ω."""
    r = a * (1 + 1e-9)
    t = np.linspace(0.0, 8.0, _RING_POINTS, endpoint=False)
    side, u = np.divmod(t, 2.0)
    u = (u - 1.0) * r
    x = np.select([side == 0, side == 1, side == 2], [u, np.full_like(u, r), -u], np.full_like(u, -r))
    y = np.select([side == 0, side == 1, side == 2], [np.full_like(u, -r), u, np.full_like(u, r)], -u)
    return x, y


def validate_field(field: FieldSpec) -> ValidationReport:
    report = ValidationReport(f"field {field.label}")
    a = field.a
    if not (a > 0):
        report.add("a > 0", detail=f"a = {a}")
        return report
    if field.kind not in KINDS:
        report.add("known kind", detail=f"kind = {field.kind!r}")
        return report
    if not (field.scale >= 0):
        report.add("scale >= 0", detail=f"scale = {field.scale}")
    if not np.isfinite(field.b):
        report.add("b finite")

    x0, y0 = field.center
    if field.kind == "square_bump":
        if not (0 < field.c <= a):
            report.add("support square inside Ω (0 < c <= a)", witness=(field.c, 0.0))
    elif field.kind == "disk_bump":
        if not (field.R > 0):
            report.add("R > 0")
        elif max(abs(x0), abs(y0)) + field.R > a * (1 + 1e-12):
            report.add("support disk inside Ω", witness=(x0 + np.sign(x0 or 1) * field.R, y0))
    elif field.kind == "gaussian_truncated":
        if not (field.sigma > 0):
            report.add("sigma > 0")
        if not (field.cutoff > 0):
            report.add("cutoff > 0")
        elif max(abs(x0), abs(y0)) + field.cutoff > a * (1 + 1e-12):
            report.add("cutoff disk inside Ω", witness=(x0 + np.sign(x0 or 1) * field.cutoff, y0))
    if not report.ok:
        return report

    rx, ry = _ring(a)
    vals = np.abs(eval_B(field, rx, ry))
    for k in np.flatnonzero(vals > 1e-12)[:8]:
        report.add("B = 0 outside Ω", witness=(rx[k], ry[k]))
    return report


def require_valid(field: FieldSpec) -> None:
    report = validate_field(field)
    if not report.ok:
        first = report.violations[0]
        raise ConfigError(f"{report.subject}: violates {first.invariant} (witness {first.witness})")
