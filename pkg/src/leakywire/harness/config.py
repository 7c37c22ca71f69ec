"""Run configuration: JSON ingestion, validation and hashing."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..geometry import CurveSpec, validate_curve
from ..grid import GridSpec
from ..magnetic import FieldSpec, validate_field

EXPERIMENTS = ("spectrum", "theorem2", "weyl", "weakfield", "sweep")
TRUNCATIONS = ("omega", "box")


@dataclass(frozen=True)
class SolverConfig:
    k: int = 3
    tol: float = 1e-8
    seed: int = 42
    max_iter: int = 5000
    precond: str = "amg"
    shift: float = 0.25

    def kwargs(self) -> dict:
        return {"tol": self.tol, "seed": self.seed, "max_iter": self.max_iter,
                "precond": self.precond, "shift": self.shift}


@dataclass(frozen=True)
class SweepAxes:
    alpha: tuple[float, ...] = ()
    h: tuple[float, ...] = ()
    s: tuple[float, ...] = ()


@dataclass(frozen=True)
class WeylOptions:
    L: tuple[float, ...] = (10.0, 20.0, 40.0)
    p: tuple[float, ...] = (0.0, 0.5)
    alphas: tuple[float, ...] = ()
    spacing: float | None = None
    rel_tol: float = 0.02


@dataclass(frozen=True)
class Theorem2Options:
    alpha_fractions: tuple[float, ...] = ()
    curves: tuple[CurveSpec, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    curve: CurveSpec
    field: FieldSpec
    grid: GridSpec
    alpha: float | None = None
    experiment: str = "spectrum"
    solver: SolverConfig = SolverConfig()
    margin: float = 0.005
    truncation: str | None = None
    kappa_n: int = 257
    sweep: SweepAxes = SweepAxes()
    weyl: WeylOptions = WeylOptions()
    weakfield_s: tuple[float, ...] = (1.0, 0.5, 0.25, 0.0)
    theorem2: Theorem2Options = Theorem2Options()
    workers: int = 1

    @property
    def resolved_truncation(self) -> str:
        if self.truncation:
            return self.truncation
        return "box" if self.experiment == "spectrum" else "omega"

    def to_dict(self) -> dict:
        d = {
            "experiment": self.experiment,
            "curve": self.curve.to_dict(),
            "field": self.field.to_dict(),
            "grid": self.grid.to_dict(),
            "alpha": self.alpha,
            "solver": asdict(self.solver),
            "margin": self.margin,
            "truncation": self.resolved_truncation,
            "kappa_n": self.kappa_n,
        }
        if self.experiment == "sweep":
            d["sweep"] = {k: list(v) for k, v in asdict(self.sweep).items()}
        if self.experiment == "weyl":
            w = asdict(self.weyl)
            d["weyl"] = {k: list(v) if isinstance(v, tuple) else v for k, v in w.items()}
        if self.experiment == "weakfield":
            d["weakfield"] = {"s": list(self.weakfield_s)}
        if self.experiment == "theorem2" and (self.theorem2.alpha_fractions or self.theorem2.curves):
            d["theorem2"] = {
                "alpha_fractions": list(self.theorem2.alpha_fractions),
                "curves": [c.to_dict() for c in self.theorem2.curves],
            }
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def validate(self) -> None:
        """Raise ConfigError unless the curve, field and options are consistent."""
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.resolved_truncation not in TRUNCATIONS:
            raise ConfigError(f"unknown truncation {self.truncation!r}")
        curves = (self.curve, *self.theorem2.curves)
        for c in curves:
            report = validate_curve(c)
            if not report.ok:
                v = report.violations[0]
                raise ConfigError(f"{report.subject}: violates {v.invariant} (witness {v.witness})")
            if abs(c.a - self.field.a) > 1e-12:
                raise ConfigError("curve and field must share the same window a")
        report = validate_field(self.field)
        if not report.ok:
            v = report.violations[0]
            raise ConfigError(f"{report.subject}: violates {v.invariant} (witness {v.witness})")
        if self.alpha is not None and self.alpha < 0:
            raise ConfigError("alpha must be >= 0")
        if self.experiment in ("spectrum", "weyl") and self.alpha is None and not self.weyl.alphas:
            raise ConfigError(f"experiment {self.experiment!r} needs alpha")
        if self.experiment == "theorem2":
            if self.field.is_zero:
                raise ConfigError("theorem2 needs a field that is not identically zero")
            if self.alpha is None and not self.theorem2.alpha_fractions:
                raise ConfigError("theorem2 needs alpha or theorem2.alpha_fractions")
        if self.experiment == "sweep":
            if not (self.sweep.alpha and self.sweep.h and self.sweep.s):
                raise ConfigError("sweep axes alpha, h and s must all be nonempty")
            if len(self.sweep.alpha) > 200 or len(self.sweep.h) > 200:
                raise ConfigError("sweep axes are limited to 200 values for the heatmap")
            for h in self.sweep.h:
                c = CurveSpec.bump(h, self.curve.a, sampling_n=self.curve.sampling_n)
                if not validate_curve(c).ok:
                    raise ConfigError(f"sweep amplitude h={h} gives an invalid curve")
            if any(s < 0 for s in self.sweep.s):
                raise ConfigError("field scales must be >= 0")
            if any(a <= 0 for a in self.sweep.alpha):
                raise ConfigError("sweep alphas must be > 0")
        if self.experiment == "weakfield" and not self.weakfield_s:
            raise ConfigError("weakfield needs a nonempty list of scales")
        if self.kappa_n < 129 or self.kappa_n % 2 == 0:
            raise ConfigError("kappa_n must be odd and >= 129")
        if self.margin < 0:
            raise ConfigError("margin must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")


def _floats(seq, name) -> tuple[float, ...]:
    if not isinstance(seq, (list, tuple)):
        raise ConfigError(f"{name} must be a list")
    return tuple(float(v) for v in seq)


def from_dict(d: dict) -> RunConfig:
    known = {"experiment", "curve", "field", "grid", "alpha", "solver", "margin", "truncation",
             "kappa_n", "sweep", "weyl", "weakfield", "theorem2", "workers"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    try:
        curve = CurveSpec.from_dict(d["curve"])
        field_ = FieldSpec.from_dict(d.get("field", {"a": curve.a, "kind": "zero"}))
        grid = GridSpec.from_dict(d["grid"])
        solver = SolverConfig(**d.get("solver", {}))
        sweep = d.get("sweep", {})
        weyl = d.get("weyl", {})
        t2 = d.get("theorem2", {})
        cfg = RunConfig(
            curve=curve,
            field=field_,
            grid=grid,
            alpha=None if d.get("alpha") is None else float(d["alpha"]),
            experiment=d.get("experiment", "spectrum"),
            solver=solver,
            margin=float(d.get("margin", 0.005)),
            truncation=d.get("truncation"),
            kappa_n=int(d.get("kappa_n", 257)),
            sweep=SweepAxes(_floats(sweep.get("alpha", []), "sweep.alpha"),
                            _floats(sweep.get("h", []), "sweep.h"),
                            _floats(sweep.get("s", []), "sweep.s")),
            weyl=WeylOptions(
                L=_floats(weyl.get("L", [10, 20, 40]), "weyl.L"),
                p=_floats(weyl.get("p", [0.0, 0.5]), "weyl.p"),
                alphas=_floats(weyl.get("alphas", []), "weyl.alphas"),
                spacing=None if weyl.get("spacing") is None else float(weyl["spacing"]),
                rel_tol=float(weyl.get("rel_tol", 0.02)),
            ),
            weakfield_s=_floats(d.get("weakfield", {}).get("s", [1.0, 0.5, 0.25, 0.0]), "weakfield.s"),
            theorem2=Theorem2Options(
                _floats(t2.get("alpha_fractions", []), "theorem2.alpha_fractions"),
                tuple(CurveSpec.from_dict(c) for c in t2.get("curves", [])),
            ),
            workers=int(d.get("workers", 1)),
        )
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg.validate()
    return cfg


def load(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return from_dict(data)
