"""Lowest eigenpairs of sparse Hermitian operators.

The solver is block LOBPCG (Knyazev) in the orthonormal-basis form: each step
does a Rayleigh-Ritz projection on span[X, T·R, P] after orthonormalising the
search directions against X with rank-revealing SVQB. Rank loss of the search
block is reported in the diagnostics; if the whole block collapses before
convergence the solve ends with ``breakdown=True``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import SolverError

log = logging.getLogger(__name__)

DENSE_CUTOFF = 400
PRECONDITIONERS = ("amg", "jacobi", "none")


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    iterations: int
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "eigenvalues": [float(v) for v in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "iterations": self.iterations,
            "converged": self.converged,
            **{k: v for k, v in self.diagnostics.items() if k != "history"},
        }


def _as_matrix(op):
    return op.matrix if hasattr(op, "matrix") else sp.csr_matrix(op)


def _kinetic_proxy(mat: sp.csr_matrix, shift: float) -> sp.csr_matrix:
    """Real M-matrix with |off-diagonals| of ``mat`` and a dominant diagonal, plus shift.

    Diagonal dominance makes it SPD for any shift > 0, which is what AMG needs.
    """
    off = mat.copy()
    off.setdiag(0)
    off.eliminate_zeros()
    off = abs(off).tocsr()
    rowsum = np.asarray(off.sum(axis=1)).ravel()
    diag = np.maximum(mat.diagonal().real, rowsum)
    return (sp.diags(diag + shift) - off).tocsr()


def _build_preconditioner(mat, kind: str, shift: float, seed: int = 42):
    if kind == "none":
        return lambda r: r
    if kind == "jacobi":
        d = mat.diagonal().real
        d = np.abs(d - min(0.0, d.min())) + shift
        return lambda r: r / d[:, None]
    if kind == "amg":
        import pyamg

        # pyamg draws start vectors for its spectral-radius estimates from the
        # legacy global RNG; pin it so the hierarchy is reproducible
        state = np.random.get_state()
        np.random.seed(seed)
        try:
            ml = pyamg.smoothed_aggregation_solver(_kinetic_proxy(mat, shift), max_coarse=500)
        finally:
            np.random.set_state(state)
        M = ml.aspreconditioner(cycle="V")

        def apply(r):
            out = np.empty_like(r)
            for c in range(r.shape[1]):
                if np.iscomplexobj(r):
                    out[:, c] = M @ r[:, c].real + 1j * (M @ r[:, c].imag)
                else:
                    out[:, c] = M @ r[:, c]
            return out

        return apply
    raise ValueError(f"unknown preconditioner {kind!r}")


def _svqb(Z: np.ndarray, drop: float) -> np.ndarray:
    """Orthonormalise the columns of Z, dropping numerically dependent directions."""
    if Z.shape[1] == 0:
        return Z
    norms = np.linalg.norm(Z, axis=0)
    keep = norms > 0
    Z = Z[:, keep] / norms[keep]
    if Z.shape[1] == 0:
        return Z
    G = Z.conj().T @ Z
    G = 0.5 * (G + G.conj().T)
    w, V = np.linalg.eigh(G)
    good = w > drop * w.max()
    return Z @ (V[:, good] / np.sqrt(w[good]))


def dense_lowest(op, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Full dense diagonalisation (oracle path)."""
    A = _as_matrix(op).toarray()
    w, v = sla.eigh(A, subset_by_index=[0, k - 1])
    return w, v


def lowest_eigenpairs(op, k: int = 1, tol: float = 1e-8, *, seed: int = 42, max_iter: int = 5000,
                      precond: str = "amg", shift: float = 0.25, block: int | None = None,
                      x0: np.ndarray | None = None) -> SpectralResult:
    """k lowest eigenpairs of a sparse Hermitian operator.

    Convergence: ``‖Hv − λv‖ <= tol · max|diag H|`` for each of the k pairs.
    ``shift`` regularises the preconditioner (it targets ``(K + shift)^{-1}`` where K
    is the diamagnetic kinetic proxy of H).
    """
    mat = _as_matrix(op).tocsr()
    N = mat.shape[0]
    if k < 1:
        raise ValueError("k must be >= 1")
    if N < k:
        raise ValueError(f"operator dimension {N} is smaller than k={k}")
    if not (1e-14 <= tol <= 1e-4):
        raise ValueError(f"tol must lie in [1e-14, 1e-4], got {tol}")
    if precond not in PRECONDITIONERS:
        raise ValueError(f"unknown preconditioner {precond!r}")
    scale = float(np.abs(mat.diagonal()).max()) or 1.0
    is_complex = np.iscomplexobj(mat.data)
    dtype = complex if is_complex else float

    m = block or min(N, k + max(2, k // 2 + 1))
    if N <= max(DENSE_CUTOFF, 4 * m):
        w, v = dense_lowest(mat, k)
        res = np.linalg.norm(mat @ v - v * w, axis=0)
        return SpectralResult(w, v, res, 0, True, {"method": "dense", "dimension": N, "scale": scale})

    rng = np.random.default_rng(seed)
    if x0 is None:
        X = rng.standard_normal((N, m))
        if is_complex:
            X = X + 1j * rng.standard_normal((N, m))
    else:
        X = np.array(x0, dtype=dtype, copy=True)
        if X.ndim == 1:
            X = X[:, None]
        if X.shape[1] < m:
            extra = rng.standard_normal((N, m - X.shape[1]))
            X = np.hstack([X, extra.astype(dtype)])
    X = X.astype(dtype)
    X = _svqb(X, 1e-14)
    if X.shape[1] < m:
        raise SolverError("initial block is rank deficient")

    T = _build_preconditioner(mat, precond, shift, seed)
    drop = 1e-13

    HX = mat @ X
    G = X.conj().T @ HX
    lam, C = np.linalg.eigh(0.5 * (G + G.conj().T))
    X, HX = X @ C, HX @ C
    P = np.zeros((N, 0), dtype=dtype)
    rank_losses = 0
    breakdown = False
    history = []
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        R = HX - X * lam
        res = np.linalg.norm(R, axis=0)
        history.append(float(res[:k].max()))
        if np.all(res[:k] <= tol * scale):
            converged = True
            break
        active = res > tol * scale
        W = T(R[:, active])
        Z = np.hstack([W, P])
        for _ in range(2):
            Z = Z - X @ (X.conj().T @ Z)
        n_before = Z.shape[1]
        Z = _svqb(Z, drop)
        Z = Z - X @ (X.conj().T @ Z)
        Z = _svqb(Z, drop)
        if Z.shape[1] < n_before:
            rank_losses += 1
        if Z.shape[1] == 0:
            breakdown = True
            break
        HZ = mat @ Z
        Q_H_Q = np.block([
            [np.diag(lam).astype(dtype), X.conj().T @ HZ],
            [HZ.conj().T @ X, Z.conj().T @ HZ],
        ])
        Q_H_Q = 0.5 * (Q_H_Q + Q_H_Q.conj().T)
        lam, C = np.linalg.eigh(Q_H_Q)
        lam, C = lam[:m], C[:, :m]
        Cx, Cz = C[:m], C[m:]
        P = Z @ Cz
        X = X @ Cx + P
        HX = HX @ Cx + HZ @ Cz
        if it % 25 == 0:
            # restore orthonormality and refresh HX against drift
            X = _svqb(X, 1e-14)
            if X.shape[1] < m:
                breakdown = True
                break
            HX = mat @ X
            G = X.conj().T @ HX
            lam, C = np.linalg.eigh(0.5 * (G + G.conj().T))
            X, HX = X @ C, HX @ C
            P = P - X @ (X.conj().T @ P)

    # final Rayleigh-Ritz on X for clean pairs and residuals
    HX = mat @ X
    G = X.conj().T @ HX
    lam, C = np.linalg.eigh(0.5 * (G + G.conj().T))
    X, HX = X @ C, HX @ C
    res = np.linalg.norm(HX - X * lam, axis=0)
    converged = converged and bool(np.all(res[:k] <= tol * scale))
    if not converged:
        log.warning("LOBPCG stopped after %d iterations, max residual %.3e (target %.3e)%s",
                    it, res[:k].max(), tol * scale, " [breakdown]" if breakdown else "")
    diag = {
        "method": f"lobpcg/{precond}",
        "dimension": N,
        "block": m,
        "scale": scale,
        "rank_losses": rank_losses,
        "breakdown": breakdown,
        "history": history,
    }
    return SpectralResult(lam[:k], X[:, :k], res[:k], it, converged, diag)


def rayleigh_quotient(op, v) -> float:
    """⟨v, Hv⟩ / ⟨v, v⟩."""
    mat = _as_matrix(op)
    v = np.asarray(v)
    nrm = np.vdot(v, v).real
    if nrm == 0:
        raise ValueError("Rayleigh quotient of the zero vector")
    return float(np.vdot(v, mat @ v).real / nrm)


def count_below(result, threshold: float, margin: float = 0.0) -> int:
    """Number of eigenvalues strictly below ``threshold - margin``."""
    values = result.eigenvalues if isinstance(result, SpectralResult) else np.asarray(result)
    return int(np.count_nonzero(np.asarray(values) < threshold - margin))


def classify(values, threshold: float, margin: float) -> list[str]:
    """Label each eigenvalue 'below', 'inconclusive' (within margin) or 'above'."""
    out = []
    for v in values:
        if v < threshold - margin:
            out.append("below")
        elif v <= threshold + margin:
            out.append("inconclusive")
        else:
            out.append("above")
    return out
