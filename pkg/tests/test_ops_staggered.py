import numpy as np
import pytest

from stagtgv import ops_staggered as ost
from stagtgv.grid import (
    GridKind,
    GridKindError,
    TensorField,
    VecField,
    inner,
    new_image,
    pairing,
    rotate90,
    rotate_tensor,
    rotate_vec,
)
from stagtgv.ops_convert import staggered_tensor, staggered_vec

from helpers import center, rand_like, random_center

K = GridKind


def _affine(n1, n2, a=0.2, b=0.9, c=-0.4):
    i = np.arange(1, n1 + 1)[:, None]
    j = np.arange(1, n2 + 1)[None, :]
    return center(a + b * i + c * j)


class TestGradNew:
    def test_delta(self):
        g = ost.grad_new(center([[1.0, 0.0], [0.0, 0.0]]))
        # w1 at (3/2, 1) and w2 at (1, 3/2)
        assert g.w1.data[1, 0, 0] == -1.0
        assert g.w2.data[0, 1, 0] == -1.0
        assert np.count_nonzero(g.w1.data) == 1
        assert np.count_nonzero(g.w2.data) == 1

    def test_kinds_and_boundary(self, rng):
        g = ost.grad_new(random_center(4, 5, rng))
        assert g.w1.kind is K.HORIZ_EDGE and g.w2.kind is K.VERT_EDGE
        assert np.all(g.w1.data[[0, -1]] == 0)
        assert np.all(g.w2.data[:, [0, -1]] == 0)

    def test_constant(self):
        g = ost.grad_new(new_image(K.CENTER, 3, 4, 2, 1.7))
        assert np.all(g.w1.data == 0) and np.all(g.w2.data == 0)

    def test_affine(self):
        g = ost.grad_new(_affine(5, 4))
        assert np.allclose(g.w1.data[1:-1], 0.9)
        assert np.allclose(g.w2.data[:, 1:-1], -0.4)

    def test_rejects_edge_input(self):
        with pytest.raises(GridKindError):
            ost.grad_new(new_image(K.HORIZ_EDGE, 3, 3))


class TestSymGradNew:
    def test_constant_w1(self):
        w = staggered_vec(4, 4)
        w = VecField(w.w1.with_data(np.ones_like(w.w1.data)), w.w2)
        t = ost.sym_grad_new(w)
        assert np.all(t.v1.data[1:-1] == 0)
        assert np.all(t.v3.data[:, 1:-1] == 0)

    def test_affine_interior(self):
        t = ost.grad2_new(_affine(6, 5))
        assert np.allclose(t.v1.data[2:-2], 0, atol=1e-14)
        assert np.allclose(t.v2.data[:, 2:-2], 0, atol=1e-14)
        assert np.allclose(t.v3.data[1:-1, 1:-1], 0, atol=1e-14)

    def test_kinds(self):
        t = ost.sym_grad_new(staggered_vec(3, 4))
        assert (t.v1.kind, t.v2.kind, t.v3.kind) == (K.CENTER_EXT_X, K.CENTER_EXT_Y, K.CORNER)

    def test_mixed_derivative(self):
        # u = n1 * n2 has a unit mixed derivative away from the boundary
        i = np.arange(1, 6)[:, None]
        j = np.arange(1, 6)[None, :]
        t = ost.grad2_new(center((i * j).astype(float)))
        assert np.allclose(t.v3.data[1:-1, 1:-1], 1.0)


class TestDivergences:
    def test_unit_edge(self):
        w = staggered_vec(3, 3)
        d1 = w.w1.data.copy()
        d1[1, 1, 0] = 1.0  # w1 at (3/2, 2)
        out = ost.div_new_vec(VecField(w.w1.with_data(d1), w.w2)).data[:, :, 0]
        expected = np.zeros((3, 3))
        # minus the transpose of u(2, 2) - u(1, 2)
        expected[0, 1] = 1.0
        expected[1, 1] = -1.0
        assert np.array_equal(out, expected)

    def test_boundary_edges_ignored(self, rng):
        w = rand_like(staggered_vec(4, 3), rng)
        masked = VecField(
            w.w1.with_data(np.where(np.arange(5)[:, None, None] % 4 == 0, 0.0, w.w1.data)),
            w.w2.with_data(np.where(np.arange(4)[None, :, None] % 3 == 0, 0.0, w.w2.data)),
        )
        assert np.array_equal(ost.div_new_vec(w).data, ost.div_new_vec(masked).data)

    def test_v2_constant_only_boundary(self):
        v = staggered_tensor(4, 5)
        v = TensorField(v.v1, v.v2.with_data(np.ones_like(v.v2.data)), v.v3)
        d = ost.div_new_tensor(v)
        assert np.all(d.w1.data == 0)
        assert np.all(d.w2.data[:, 1:-1] == 0)
        assert np.all(d.w2.data[:, 0] == 1.0) and np.all(d.w2.data[:, -1] == -1.0)

    def test_divergence_sums_to_zero(self, rng):
        for _ in range(5):
            w = rand_like(staggered_vec(5, 6, 2), rng)
            assert abs(ost.div_new_vec(w).data.sum()) < 1e-12

    def test_gauss_green(self, rng):
        # <E w, v> = -<w, div v> and <D u, w> = -<u, div w>, and chained
        for n1, n2 in [(3, 3), (5, 4), (6, 7)]:
            u = random_center(n1, n2, rng)
            w = rand_like(staggered_vec(n1, n2), rng)
            v = rand_like(staggered_tensor(n1, n2), rng)
            assert pairing(ost.sym_grad_new(w), v) == pytest.approx(-inner(w, ost.div_new_tensor(v)), rel=1e-12)
            assert inner(ost.grad_new(u), w) == pytest.approx(-inner(u, ost.div_new_vec(w)), rel=1e-12)
            assert pairing(ost.grad2_new(u), v) == pytest.approx(inner(u, ost.div2_new(v)), rel=1e-12)


class TestRotation:
    @pytest.mark.parametrize("n1, n2", [(3, 3), (4, 6), (7, 5)])
    def test_grad_equivariant(self, n1, n2, rng):
        u = random_center(n1, n2, rng, channels=2)
        lhs = ost.grad_new(rotate90(u))
        rhs = rotate_vec(ost.grad_new(u))
        assert np.array_equal(lhs.w1.data, rhs.w1.data)
        assert np.array_equal(lhs.w2.data, rhs.w2.data)

    @pytest.mark.parametrize("n1, n2", [(3, 3), (4, 6), (7, 5)])
    def test_sym_grad_equivariant(self, n1, n2, rng):
        w = rand_like(staggered_vec(n1, n2), rng)
        lhs = ost.sym_grad_new(rotate_vec(w))
        rhs = rotate_tensor(ost.sym_grad_new(w))
        for a, b in zip(lhs.parts(), rhs.parts()):
            assert a.kind is b.kind
            assert np.allclose(a.data, b.data, atol=1e-15)

    def test_div_equivariant(self, rng):
        v = rand_like(staggered_tensor(4, 5), rng)
        lhs = ost.div_new_tensor(rotate_tensor(v))
        rhs = rotate_vec(ost.div_new_tensor(v))
        for a, b in zip(lhs.parts(), rhs.parts()):
            assert np.allclose(a.data, b.data, atol=1e-15)
