"""Truncation box and node layout shared by the geometry and lattice modules.

Nodes sit at ``x_i = -L + i*h`` for ``i = 0..n-1`` on both axes; the flat index of
node ``(i, j)`` is ``i*n + j`` (``i`` runs along x).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError

BOUNDARY_CONDITIONS = ("dirichlet", "neumann")
DOMAINS = ("auto", "square", "clipped")


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the box [-L, L]^2.

    ``domain`` selects which nodes of the box are kept:

    * ``square``: every node of the box.
    * ``clipped``: nodes with ``|x + y| <= L``. The end walls are then perpendicular
      to the asymptotic line y = x, which removes the spurious corner bound states
      (near -α²/2) that a Neumann square box produces where the line runs into a corner.
    * ``auto``: ``clipped`` for Neumann, ``square`` for Dirichlet.
    """

    L: float
    n: int
    bc: str = "neumann"
    domain: str = "auto"

    def __post_init__(self):
        if not (self.L > 0):
            raise ConfigError(f"grid half-width L must be positive, got {self.L}")
        if int(self.n) != self.n or self.n < 3 or self.n % 2 == 0:
            raise ConfigError(f"grid n must be an odd integer >= 3, got {self.n}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigError(f"unknown boundary condition {self.bc!r}")
        if self.domain not in DOMAINS:
            raise ConfigError(f"unknown domain {self.domain!r}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def resolved_domain(self) -> str:
        if self.domain != "auto":
            return self.domain
        return "clipped" if self.bc == "neumann" else "square"

    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.axis()
        return np.meshgrid(x, x, indexing="ij")

    def mask(self) -> np.ndarray:
        """Boolean (n, n) array of nodes belonging to the truncation domain."""
        if self.resolved_domain == "square":
            return np.ones((self.n, self.n), dtype=bool)
        i = np.arange(self.n)
        # |x + y| <= L in index form: |i + j - (n - 1)| <= (n - 1) / 2
        s = i[:, None] + i[None, :] - (self.n - 1)
        return np.abs(s) <= (self.n - 1) // 2

    def check_resolves(self, a: float) -> None:
        """Raise unless the grid meets the minimum size and resolves Ω = (-a, a)²."""
        if self.n < 33:
            raise ConfigError(f"grid n must be >= 33, got {self.n}")
        if self.L < a - 1e-12:
            raise ConfigError(f"box half-width L={self.L} smaller than a={a}")
        if self.h > a / 8 * (1 + 1e-12):
            raise ConfigError(f"grid spacing h={self.h:.4g} does not resolve Ω (need h <= a/8 = {a / 8:.4g})")

    def refined(self) -> "GridSpec":
        return GridSpec(self.L, 2 * self.n - 1, self.bc, self.domain)

    def coarsened(self) -> "GridSpec":
        if (self.n - 1) % 2:
            raise ConfigError("grid cannot be coarsened to a nested grid")
        return GridSpec(self.L, (self.n - 1) // 2 + 1, self.bc, self.domain)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        unknown = set(d) - {"L", "n", "bc", "domain"}
        if unknown:
            raise ConfigError(f"unknown grid keys {sorted(unknown)}")
        try:
            return cls(float(d["L"]), int(d["n"]), d.get("bc", "neumann"), d.get("domain", "auto"))
        except KeyError as exc:
            raise ConfigError(f"grid is missing {exc}") from None
