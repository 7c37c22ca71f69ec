import math

import numpy as np
import pytest
import scipy.io
import scipy.linalg as sla
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from leakywire import CurveSpec, FieldSpec, GridSpec
from leakywire.errors import ConfigError
from leakywire.geometry import arc_length_weights
from leakywire.lattice import (assemble_1d_delta, assemble_H, assemble_neumann_magnetic_laplacian,
                               gauge_transform, neumann_split, write_matrix_market)


def lap1d(n, h, bc):
    main = np.full(n, 2.0)
    if bc == "neumann":
        main[[0, -1]] = 1.0
    return sp.diags([-np.ones(n - 1), main, -np.ones(n - 1)], [-1, 0, 1]) / h**2


def ground(op):
    return sla.eigvalsh(op.matrix.toarray(), subset_by_index=[0, 0])[0]


def ground_1d(op):
    m = op.matrix
    return sla.eigvalsh_tridiagonal(m.diagonal(), m.diagonal(1), select="i", select_range=(0, 0))[0]


curves = st.one_of(
    st.just(CurveSpec.straight()),
    st.floats(-0.9, 0.9).map(lambda h: CurveSpec.bump(h)),
    st.floats(-0.6, 0.6).map(lambda y: CurveSpec.polyline([(-1, -1), (0.0, y), (1, 1)])),
)
fields = st.one_of(
    st.tuples(st.floats(-3, 3), st.floats(0.2, 1.0)).map(lambda t: FieldSpec.square_bump(*t)),
    st.tuples(st.floats(-3, 3), st.floats(0.2, 0.9)).map(lambda t: FieldSpec.disk_bump(*t)),
    st.tuples(st.floats(-3, 3), st.floats(0.1, 0.5)).map(lambda t: FieldSpec.gaussian_truncated(t[0], t[1], 0.9)),
)
# at most 33² nodes so that the dense oracle stays cheap
small_grids = st.sampled_from([GridSpec(2.0, 33, "neumann"), GridSpec(2.0, 33, "dirichlet"),
                               GridSpec(2.0, 33, "neumann", "square"), GridSpec(2.0, 33, "dirichlet", "clipped")])


class TestStencil:
    @pytest.mark.parametrize("bc", ["dirichlet", "neumann"])
    def test_free_operator_is_tensor_laplacian(self, bc):
        grid = GridSpec(1.0, 33, bc, "square")
        op = assemble_H(grid, FieldSpec.zero(), CurveSpec.straight(), 0.0)
        T = lap1d(grid.n, grid.h, bc)
        I = sp.identity(grid.n)
        ref = sp.kron(T, I) + sp.kron(I, T)
        assert not op.is_complex
        assert abs(op.matrix - ref).max() < 1e-9

    def test_neumann_kernel_is_constant(self):
        op = assemble_H(GridSpec(2.0, 33, "neumann"), FieldSpec.zero(), CurveSpec.straight(), 0.0)
        one = np.ones(op.dimension)
        assert np.abs(op.matrix @ one).max() < 1e-9
        assert ground(op) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("alpha", [0.5, 1.0, 2.5])
    def test_line_diagonal_sums_to_arc_length(self, alpha):
        grid = GridSpec(3.0, 49, "dirichlet")
        curve = CurveSpec.straight()
        op = assemble_H(grid, FieldSpec.zero(), curve, alpha)
        free = assemble_H(grid, FieldSpec.zero(), curve, 0.0)
        d = (op.matrix - free.matrix).diagonal()
        assert not op.is_complex
        assert d.max() <= 0
        assert d.sum() == pytest.approx(-alpha * 2 * math.sqrt(2) * grid.L / grid.h**2, rel=1e-12)

    def test_plaquette_phases_sum_to_flux(self):
        # square support on grid lines: midpoint phases integrate B exactly
        grid = GridSpec(1.0, 33, "neumann", "square")
        field = FieldSpec.square_bump(1.7, 0.5)
        op = assemble_neumann_magnetic_laplacian(1.0, field, 33)
        M = op.matrix.toarray()
        n, h = grid.n, grid.h
        total = 0.0
        for i in range(n - 1):
            for j in range(n - 1):
                p, q, r, s = i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1
                # product of -h² M around the plaquette p -> q -> r -> s -> p
                loop = M[q, p] * M[r, q] * M[s, r] * M[p, s] * h**8
                total += np.angle(loop)
        assert total == pytest.approx(1.7 * 1.0**2, rel=1e-12)

    def test_box_smaller_than_window_rejected(self):
        with pytest.raises(ConfigError):
            assemble_H(GridSpec(1.5, 65), FieldSpec.zero(a=2.0), CurveSpec.bump(0.5, a=2.0), 1.0)

    def test_window_mismatch_rejected(self):
        with pytest.raises(ConfigError):
            assemble_H(GridSpec(2.0, 65), FieldSpec.zero(a=1.0), CurveSpec.bump(0.5, a=2.0), 1.0)

    def test_underresolved_grid_rejected(self):
        with pytest.raises(ConfigError):
            assemble_H(GridSpec(8.0, 65), FieldSpec.zero(), CurveSpec.straight(), 1.0)


@given(grid=small_grids, field=fields, curve=curves, alpha=st.floats(0, 3))
@settings(max_examples=40, deadline=None)
def test_exactly_hermitian(grid, field, curve, alpha):
    op = assemble_H(grid, field, curve, alpha)
    assert op.hermiticity_defect() == 0.0


@given(grid=small_grids, field=fields, curve=curves, alpha=st.floats(0, 3))
@settings(max_examples=20, deadline=None)
def test_diamagnetic_inequality(grid, field, curve, alpha):
    on = ground(assemble_H(grid, field, curve, alpha))
    off = ground(assemble_H(grid, FieldSpec.zero(), curve, alpha))
    assert on >= off - 1e-10 * max(1.0, abs(off))


@given(field=fields, seed=st.integers(0, 2**31 - 1))
@settings(max_examples=10, deadline=None)
def test_gauge_invariance(field, seed):
    op = assemble_H(GridSpec(1.0, 33, "neumann", "square"), field, CurveSpec.bump(0.4), 1.3)
    chi = np.random.default_rng(seed).uniform(-10, 10, op.dimension)
    g = gauge_transform(op, chi)
    assert np.array_equal(g.matrix.diagonal(), op.matrix.diagonal())
    # unitary similarity: U H U* with U = diag(exp(iχ))
    U = sp.diags(np.exp(1j * chi))
    assert abs(g.matrix - U @ op.matrix @ U.conj().T).max() < 1e-12
    w0 = sla.eigvalsh(op.matrix.toarray())
    w1 = sla.eigvalsh(g.matrix.toarray())
    assert np.max(np.abs(w0 - w1)) <= 1e-12 * op.scale()


def test_zero_gauge_is_identity():
    op = assemble_H(GridSpec(2.0, 33), FieldSpec.disk_bump(1.0, 0.5), CurveSpec.straight(), 1.0)
    g = gauge_transform(op, np.zeros(op.dimension))
    assert abs(g.matrix - op.matrix).max() == 0


@pytest.mark.parametrize("k", range(10))
def test_neumann_below_dirichlet(k):
    rng = np.random.default_rng(100 + k)
    field = FieldSpec.square_bump(rng.uniform(-2, 2), rng.uniform(0.2, 1.0))
    curve = CurveSpec.bump(rng.uniform(-0.9, 0.9))
    alpha = rng.uniform(0.1, 3)
    n, L = 33, 2.0
    dom = str(rng.choice(["square", "clipped"]))
    neu = ground(assemble_H(GridSpec(L, n, "neumann", dom), field, curve, alpha))
    dir_ = ground(assemble_H(GridSpec(L, n, "dirichlet", dom), field, curve, alpha))
    assert neu <= dir_ + 1e-10


@pytest.mark.parametrize("k", range(5))
def test_neumann_cut_brackets_from_below(k):
    rng = np.random.default_rng(200 + k)
    op = assemble_H(GridSpec(2.0, 33, "neumann", "square"),
                    FieldSpec.disk_bump(rng.uniform(-2, 2), 0.6), CurveSpec.bump(rng.uniform(-0.9, 0.9)),
                    rng.uniform(0.5, 3))
    r = rng.uniform(0.8, 1.5)
    inside = np.max(np.abs(op.coords), axis=1) <= r
    h1, h2 = neumann_split(op, inside)
    assert h1.dimension + h2.dimension == op.dimension
    assert h1.hermiticity_defect() == 0 and h2.hermiticity_defect() == 0
    assert min(ground(h1), ground(h2)) <= ground(op) + 1e-10
    # form inequality on random vectors, not just the ground state
    perm = np.concatenate([np.flatnonzero(inside), np.flatnonzero(~inside)])
    D = sp.block_diag([h1.matrix, h2.matrix]).tocsr()
    v = rng.normal(size=op.dimension) + 1j * rng.normal(size=op.dimension)
    full = np.vdot(v, op.matrix @ v).real
    split = np.vdot(v[perm], D @ v[perm]).real
    assert split <= full + 1e-9 * abs(full)


class TestDelta1D:
    @pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 1 / math.sqrt(2)])
    def test_ground_state(self, beta):
        op = assemble_1d_delta(beta, 20.0 / beta, 4001)
        assert ground_1d(op) == pytest.approx(-beta**2 / 4, rel=1e-2)

    def test_discrete_closed_form(self):
        # bound state of the infinite chain: 2 sinh(k h) = β h, E = -(2/h²)(cosh(k h) - 1)
        beta, L, n = 1.0, 40.0, 8001
        op = assemble_1d_delta(beta, L, n)
        h = op.h
        kh = math.asinh(beta * h / 2)
        exact = -(2 / h**2) * (math.cosh(kh) - 1)
        assert ground_1d(op) == pytest.approx(exact, rel=1e-9)

    def test_weak_coupling_limit(self):
        vals = [ground_1d(assemble_1d_delta(b, 20.0 / b, 2001)) for b in (0.2, 0.1, 0.05)]
        assert all(v < 0 for v in vals)
        assert vals[0] < vals[1] < vals[2]

    def test_box_too_small(self):
        with pytest.raises(ConfigError):
            assemble_1d_delta(1.0, 10.0, 101)


def test_matrix_market_roundtrip(tmp_path):
    op = assemble_H(GridSpec(2.0, 33), FieldSpec.gaussian_truncated(1.0, 0.3, 0.8), CurveSpec.bump(0.5), 1.0)
    path = tmp_path / "H.mtx"
    write_matrix_market(op, path)
    back = sp.csr_matrix(scipy.io.mmread(str(path)))
    assert back.shape == op.matrix.shape
    assert abs(back - op.matrix).max() <= 1e-15 * op.scale()
    assert "hermitian" in path.read_text().splitlines()[0]


def test_kappa_operator_is_square_neumann():
    op = assemble_neumann_magnetic_laplacian(1.0, FieldSpec.zero(), 33)
    assert op.dimension == 33 * 33
    assert ground(op) == pytest.approx(0.0, abs=1e-9)
    # the next Neumann level of the graph Laplacian on 33 nodes per axis
    h = 2.0 / 32
    w = sla.eigvalsh(op.matrix.toarray(), subset_by_index=[1, 1])[0]
    assert w == pytest.approx((2 / h**2) * (1 - math.cos(math.pi / 33)), rel=1e-10)


def test_weights_feed_diagonal():
    grid = GridSpec(2.0, 41, "dirichlet")
    curve = CurveSpec.bump(0.7)
    w = arc_length_weights(curve, grid).as_array(grid.n).ravel()
    op = assemble_H(grid, FieldSpec.zero(), curve, 1.5)
    free = assemble_H(grid, FieldSpec.zero(), curve, 0.0)
    np.testing.assert_allclose((op.matrix - free.matrix).diagonal(), -1.5 * w / grid.h**2, rtol=1e-13)
