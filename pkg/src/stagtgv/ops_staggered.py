"""Staggered-grid gradient, symmetric gradient and divergences.

Differences land half a pixel away from their inputs:

    grad_new:      CENTER -> (HORIZ_EDGE, VERT_EDGE)
    sym_grad_new:  (HORIZ_EDGE, VERT_EDGE) -> (CENTER_EXT_X, CENTER_EXT_Y, CORNER)

Entries outside the stencil's range (the outermost rows/columns of each
output grid) are stored zeros, so every divergence is just minus the plain
transpose of its gradient: a zero-masked difference.
"""

from . import _stencil as st
from .grid import GridImage, GridKind, TensorField, VecField, expect_kind

K = GridKind


def _grad_axis(u, kind, axis):
    data = st.zpad(st.diff(u.data, axis), axis, 1, 1)
    return GridImage(kind, u.n1, u.n2, data)


def _div_axis(w, axis):
    return st.diff(st.zero_ends(w.data, axis), axis)


def grad_new(u: GridImage) -> VecField:
    """(u(n1+1/2) - u(n1-1/2), ...) on the edge grids, zero on the boundary edges."""
    expect_kind(u, K.CENTER)
    return VecField(_grad_axis(u, K.HORIZ_EDGE, 0), _grad_axis(u, K.VERT_EDGE, 1))


def div_new_vec(w: VecField) -> GridImage:
    """Minus the adjoint of :func:`grad_new`."""
    expect_kind(w.w1, K.HORIZ_EDGE)
    expect_kind(w.w2, K.VERT_EDGE)
    data = _div_axis(w.w1, 0) + _div_axis(w.w2, 1)
    return GridImage(K.CENTER, w.w1.n1, w.w1.n2, data)


def sym_grad_new(w: VecField) -> TensorField:
    """Symmetrised staggered derivative of an edge field.

    t1 = d/dx w1 on CENTER_EXT_X, t2 = d/dy w2 on CENTER_EXT_Y and
    t3 = (d/dy w1 + d/dx w2) / 2 on CORNER.
    """
    w1 = expect_kind(w.w1, K.HORIZ_EDGE)
    w2 = expect_kind(w.w2, K.VERT_EDGE)
    n1, n2 = w1.n1, w1.n2
    t1 = st.zpad(st.diff(w1.data, 0), 0, 1, 1)
    t2 = st.zpad(st.diff(w2.data, 1), 1, 1, 1)
    t3 = 0.5 * (st.zpad(st.diff(w1.data, 1), 1, 1, 1) + st.zpad(st.diff(w2.data, 0), 0, 1, 1))
    return TensorField(
        GridImage(K.CENTER_EXT_X, n1, n2, t1),
        GridImage(K.CENTER_EXT_Y, n1, n2, t2),
        GridImage(K.CORNER, n1, n2, t3),
    )


def div_new_tensor(v: TensorField) -> VecField:
    """Minus the adjoint of :func:`sym_grad_new` (off-diagonal counted twice)."""
    v1 = expect_kind(v.v1, K.CENTER_EXT_X)
    v2 = expect_kind(v.v2, K.CENTER_EXT_Y)
    v3 = expect_kind(v.v3, K.CORNER)
    n1, n2 = v1.n1, v1.n2
    d1 = _div_axis(v1, 0) + _div_axis(v3, 1)
    d2 = _div_axis(v2, 1) + _div_axis(v3, 0)
    return VecField(GridImage(K.HORIZ_EDGE, n1, n2, d1), GridImage(K.VERT_EDGE, n1, n2, d2))


def grad2_new(u: GridImage) -> TensorField:
    return sym_grad_new(grad_new(u))


def div2_new(v: TensorField) -> GridImage:
    return div_new_vec(div_new_tensor(v))
