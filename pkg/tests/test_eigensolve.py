import math

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from leakywire import CurveSpec, FieldSpec, GridSpec
from leakywire.eigensolve import classify, count_below, dense_lowest, lowest_eigenpairs, rayleigh_quotient
from leakywire.lattice import assemble_H


def dirichlet_1d(n, h=1.0):
    return sp.diags([-np.ones(n - 1), np.full(n, 2.0), -np.ones(n - 1)], [-1, 0, 1], format="csr") / h**2


@pytest.mark.parametrize("precond", ["amg", "jacobi"])
def test_1d_dirichlet_closed_form(precond):
    n, h = 1500, 0.01
    res = lowest_eigenpairs(dirichlet_1d(n, h), k=2, tol=1e-10, precond=precond)
    exact = (2 / h**2) * (1 - np.cos(np.arange(1, 3) * math.pi / (n + 1)))
    assert res.converged
    np.testing.assert_allclose(res.eigenvalues, exact, rtol=1e-10)


def test_2d_dirichlet_separable():
    n = 60
    T = dirichlet_1d(n)
    I = sp.identity(n)
    A = (sp.kron(T, I) + sp.kron(I, T)).tocsr()
    res = lowest_eigenpairs(A, k=3, tol=1e-10)
    mu = 2 * (1 - np.cos(np.arange(1, 4) * math.pi / (n + 1)))
    pairs = np.sort((mu[:, None] + mu[None, :]).ravel())[:3]
    np.testing.assert_allclose(res.eigenvalues, pairs, rtol=1e-10)


@pytest.mark.parametrize("seed", range(4))
def test_matches_dense_oracle_on_magnetic_operators(seed):
    rng = np.random.default_rng(seed)
    field = FieldSpec.disk_bump(rng.uniform(-3, 3), rng.uniform(0.3, 0.9))
    op = assemble_H(GridSpec(2.0, 41, str(rng.choice(["neumann", "dirichlet"]))), field,
                    CurveSpec.bump(rng.uniform(-0.9, 0.9)), rng.uniform(0.5, 3))
    assert op.is_complex
    res = lowest_eigenpairs(op, k=4, tol=1e-10, seed=seed)
    ref, _ = dense_lowest(op, 4)
    assert res.converged
    np.testing.assert_allclose(res.eigenvalues, ref, rtol=0, atol=1e-9 * op.scale())
    # residual definition
    X = res.eigenvectors
    r = np.linalg.norm(op.matrix @ X - X * res.eigenvalues, axis=0)
    np.testing.assert_allclose(r, res.residuals, rtol=1e-6, atol=1e-12)
    assert np.allclose(X.conj().T @ X, np.eye(4), atol=1e-10)


def test_small_problem_takes_dense_path():
    res = lowest_eigenpairs(dirichlet_1d(50), k=3)
    assert res.diagnostics["method"] == "dense"
    np.testing.assert_allclose(res.eigenvalues, 2 * (1 - np.cos(np.arange(1, 4) * math.pi / 51)), rtol=1e-12)


def test_deterministic_for_fixed_seed():
    op = assemble_H(GridSpec(4.0, 129), FieldSpec.square_bump(1.0, 0.5), CurveSpec.bump(0.5), 1.0)
    a = lowest_eigenpairs(op, k=3, seed=42)
    b = lowest_eigenpairs(op, k=3, seed=42)
    assert np.array_equal(a.eigenvalues, b.eigenvalues)
    assert np.array_equal(a.residuals, b.residuals)
    assert a.iterations == b.iterations


def test_invalid_arguments():
    A = dirichlet_1d(10)
    with pytest.raises(ValueError):
        lowest_eigenpairs(A, k=0)
    with pytest.raises(ValueError):
        lowest_eigenpairs(A, k=11)
    with pytest.raises(ValueError):
        lowest_eigenpairs(A, precond="ilu")


class TestRayleigh:
    def test_exact_eigenvector(self):
        A = dirichlet_1d(200)
        w, V = sla.eigh(A.toarray(), subset_by_index=[0, 0])
        assert rayleigh_quotient(A, V[:, 0]) == pytest.approx(w[0], abs=1e-12)

    def test_constant_in_neumann_kernel(self):
        op = assemble_H(GridSpec(2.0, 33, "neumann"), FieldSpec.zero(), CurveSpec.straight(), 0.0)
        assert rayleigh_quotient(op, np.ones(op.dimension)) == pytest.approx(0.0, abs=1e-12)

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            rayleigh_quotient(dirichlet_1d(5), np.zeros(5))


class TestCount:
    def test_margin_example(self):
        assert count_below([-0.3, -0.24, 0.1], -0.25, 0.005) == 1

    def test_empty(self):
        assert count_below([], -0.25, 0.005) == 0

    def test_classify(self):
        assert classify([-0.3, -0.252, -0.25, -0.2], -0.25, 0.005) == ["below", "inconclusive", "inconclusive", "above"]
