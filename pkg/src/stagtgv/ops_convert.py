"""Grid conversion (averaging) operators and the block operators built on them.

Staggered fields are moved onto one common grid by averaging the nearest
samples, with zero values assumed outside each grid:

    L_dot_vec:    (HORIZ_EDGE, VERT_EDGE) -> (CENTER, CENTER)
    L_lr:         (HORIZ_EDGE, VERT_EDGE) -> (HORIZ_EDGE, HORIZ_EDGE)
    L_ud:         (HORIZ_EDGE, VERT_EDGE) -> (VERT_EDGE, VERT_EDGE)
    L_dot_tensor: (CENTER_EXT_X, CENTER_EXT_Y, CORNER) -> CENTER^3

The ``adj_*`` functions are the exact transposes. Condat's three averaging
operators on CENTER vector fields live at the bottom of the module.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _stencil as st
from .grid import (
    CenterTensor,
    CenterVec,
    Composite,
    GridImage,
    GridKind,
    ShapeMismatchError,
    TensorField,
    VecField,
    expect_kind,
    new_image,
)
from .ops_staggered import div_new_tensor, div_new_vec, grad_new, sym_grad_new

K = GridKind


def _img(kind, ref, data):
    return GridImage(kind, ref.n1, ref.n2, data)


def _staggered(w):
    expect_kind(w.w1, K.HORIZ_EDGE)
    expect_kind(w.w2, K.VERT_EDGE)
    return w.w1.data, w.w2.data


def _quad(a, pair_axis, pad_axis):
    # four-point average onto the edge grid of the other orientation
    return 0.25 * st.padsum(st.pairsum(a, pair_axis), pad_axis)


def _quad_adj(a, pair_axis, pad_axis):
    return 0.25 * st.padsum(st.pairsum(a, pad_axis), pair_axis)


# --- vector fields ----------------------------------------------------------

def L_dot_vec(w: VecField) -> CenterVec:
    a1, a2 = _staggered(w)
    return CenterVec(_img(K.CENTER, w.w1, 0.5 * st.pairsum(a1, 0)), _img(K.CENTER, w.w1, 0.5 * st.pairsum(a2, 1)))


def adj_L_dot_vec(p: CenterVec) -> VecField:
    expect_kind(p.w1, K.CENTER)
    expect_kind(p.w2, K.CENTER)
    return VecField(
        _img(K.HORIZ_EDGE, p.w1, 0.5 * st.padsum(p.w1.data, 0)),
        _img(K.VERT_EDGE, p.w1, 0.5 * st.padsum(p.w2.data, 1)),
    )


def L_lr(w: VecField) -> VecField:
    """Both components on HORIZ_EDGE: w1 as is, w2 averaged from 4 neighbours."""
    a1, a2 = _staggered(w)
    return VecField(w.w1, _img(K.HORIZ_EDGE, w.w1, _quad(a2, 1, 0)))


def adj_L_lr(p: VecField) -> VecField:
    expect_kind(p.w1, K.HORIZ_EDGE)
    expect_kind(p.w2, K.HORIZ_EDGE)
    return VecField(p.w1, _img(K.VERT_EDGE, p.w1, _quad_adj(p.w2.data, 1, 0)))


def L_ud(w: VecField) -> VecField:
    """Both components on VERT_EDGE: w1 averaged from 4 neighbours, w2 as is."""
    a1, a2 = _staggered(w)
    return VecField(_img(K.VERT_EDGE, w.w1, _quad(a1, 0, 1)), w.w2)


def adj_L_ud(p: VecField) -> VecField:
    expect_kind(p.w1, K.VERT_EDGE)
    expect_kind(p.w2, K.VERT_EDGE)
    return VecField(_img(K.HORIZ_EDGE, p.w1, _quad_adj(p.w1.data, 0, 1)), p.w2)


# --- tensor fields ----------------------------------------------------------

def L_dot_tensor(v: TensorField) -> CenterTensor:
    """Drop the extension rows of v1/v2 and average v3 from the four corners."""
    expect_kind(v.v1, K.CENTER_EXT_X)
    expect_kind(v.v2, K.CENTER_EXT_Y)
    expect_kind(v.v3, K.CORNER)
    t3 = 0.25 * st.pairsum(st.pairsum(v.v3.data, 0), 1)
    return CenterTensor(
        _img(K.CENTER, v.v1, v.v1.data[1:-1]),
        _img(K.CENTER, v.v1, v.v2.data[:, 1:-1]),
        _img(K.CENTER, v.v1, t3),
    )


def adj_L_dot_tensor(t: CenterTensor) -> TensorField:
    for c in t.parts():
        expect_kind(c, K.CENTER)
    return TensorField(
        _img(K.CENTER_EXT_X, t.v1, st.zpad(t.v1.data, 0, 1, 1)),
        _img(K.CENTER_EXT_Y, t.v1, st.zpad(t.v2.data, 1, 1, 1)),
        _img(K.CORNER, t.v1, 0.25 * st.padsum(st.padsum(t.v3.data, 0), 1)),
    )


# --- block operators for the new TGV -------------------------------------

@dataclass(frozen=True, eq=False)
class PrimalBundle(Composite):
    """Primal variables of the new TGV saddle-point problem.

    ``v_dot``: centred tensor; ``w_dot``/``w_lr``/``w_ud``: vector fields on
    CENTER / HORIZ_EDGE / VERT_EDGE; ``u``: image; ``omega``: staggered vector.
    """

    v_dot: CenterTensor
    w_dot: CenterVec
    w_lr: VecField
    w_ud: VecField
    u: GridImage
    omega: VecField

    def __post_init__(self):
        dims = {c.dims for part in self.parts() for c in _leaves(part)}
        if len(dims) != 1:
            raise ShapeMismatchError(f"bundle parts disagree in dims: {sorted(dims)}")


@dataclass(frozen=True, eq=False)
class DualBundle(Composite):
    v: TensorField
    w: VecField


def _leaves(x):
    return (x,) if isinstance(x, GridImage) else tuple(c for p in x.parts() for c in _leaves(p))


def staggered_vec(n1, n2, channels=1) -> VecField:
    return VecField(new_image(K.HORIZ_EDGE, n1, n2, channels), new_image(K.VERT_EDGE, n1, n2, channels))


def staggered_tensor(n1, n2, channels=1) -> TensorField:
    return TensorField(
        new_image(K.CENTER_EXT_X, n1, n2, channels),
        new_image(K.CENTER_EXT_Y, n1, n2, channels),
        new_image(K.CORNER, n1, n2, channels),
    )


def center_vec(n1, n2, channels=1, kind=K.CENTER) -> VecField:
    return VecField(new_image(kind, n1, n2, channels), new_image(kind, n1, n2, channels))


def zero_primal(u: GridImage) -> PrimalBundle:
    """All-zero auxiliary blocks around the image ``u``."""
    n1, n2, c = u.dims
    zc = new_image(K.CENTER, n1, n2, c)
    return PrimalBundle(
        CenterTensor(zc, zc, zc),
        center_vec(n1, n2, c),
        center_vec(n1, n2, c, K.HORIZ_EDGE),
        center_vec(n1, n2, c, K.VERT_EDGE),
        u,
        staggered_vec(n1, n2, c),
    )


def zero_dual(n1, n2, channels=1) -> DualBundle:
    return DualBundle(staggered_tensor(n1, n2, channels), staggered_vec(n1, n2, channels))


def lstar_sum(w_dot: CenterVec, w_lr: VecField, w_ud: VecField) -> VecField:
    """L_dot* w_dot + L_lr* w_lr + L_ud* w_ud."""
    return adj_L_dot_vec(w_dot) + adj_L_lr(w_lr) + adj_L_ud(w_ud)


def apply_Lbar_star(z: PrimalBundle) -> DualBundle:
    """v-row: L_dot* v_dot - E_new omega;  w-row: sum of L* w - D_new u + omega."""
    v = adj_L_dot_tensor(z.v_dot) - sym_grad_new(z.omega)
    w = lstar_sum(z.w_dot, z.w_lr, z.w_ud) - grad_new(z.u) + z.omega
    return DualBundle(v, w)


def apply_Lbar(y: DualBundle) -> PrimalBundle:
    """Transpose of :func:`apply_Lbar_star`."""
    return PrimalBundle(
        L_dot_tensor(y.v),
        L_dot_vec(y.w),
        L_lr(y.w),
        L_ud(y.w),
        div_new_vec(y.w),
        div_new_tensor(y.v) + y.w,
    )


# --- Condat's operators on CENTER vector fields --------------------------
#
# The dual field p of the classic gradient has p1(n1, n2) at (n1 + 1/2, n2)
# and p2 at (n1, n2 + 1/2). p1 on the last row and p2 on the last column are
# outside the domain and treated as zero. L_dot moves both components to
# pixel centres; L_lr collects everything at the p2 sites and L_ud at the p1
# sites. Constraints at sites outside the domain are dropped (forced zero).

def _back(a, axis):
    # 0.5 * (a[i] + a[i-1]) with a[-1] = 0
    return 0.5 * (a + st.zpad(st.take(a, axis, 0, -1), axis, 1, 0))


def _back_adj(a, axis):
    return 0.5 * (a + st.zpad(st.take(a, axis, 1), axis, 0, 1))


def _fwd_avg(a, axis):
    # 0.5 * (a[i] + a[i+1]) with a[N] = 0
    return 0.5 * (a + st.zpad(st.take(a, axis, 1), axis, 0, 1))


def _fwd_avg_adj(a, axis):
    return 0.5 * (a + st.zpad(st.take(a, axis, 0, -1), axis, 1, 0))


def _condat_in(p):
    expect_kind(p.w1, K.CENTER)
    expect_kind(p.w2, K.CENTER)
    return st.zero_last(p.w1.data, 0), st.zero_last(p.w2.data, 1)


def condat_L_ops(p: CenterVec) -> tuple[CenterVec, CenterVec, CenterVec]:
    """Condat's (L_dot p, L_lr p, L_ud p), all stored on CENTER."""
    a1, a2 = _condat_in(p)
    ref = p.w1
    dot = CenterVec(_img(K.CENTER, ref, _back(a1, 0)), _img(K.CENTER, ref, _back(a2, 1)))
    # sites (n1, n2 + 1/2): none exist for n2 = N2
    lr1 = st.zero_last(_back(_fwd_avg(a1, 1), 0), 1)
    lr = CenterVec(_img(K.CENTER, ref, lr1), _img(K.CENTER, ref, a2))
    # sites (n1 + 1/2, n2): none exist for n1 = N1
    ud2 = st.zero_last(_back(_fwd_avg(a2, 0), 1), 0)
    ud = CenterVec(_img(K.CENTER, ref, a1), _img(K.CENTER, ref, ud2))
    return dot, lr, ud


def condat_L_adj(dot: CenterVec, lr: CenterVec, ud: CenterVec) -> CenterVec:
    """Sum of the transposes of the three Condat operators."""
    for f in (dot, lr, ud):
        expect_kind(f.w1, K.CENTER)
        expect_kind(f.w2, K.CENTER)
    b1 = _back_adj(dot.w1.data, 0) + _fwd_avg_adj(_back_adj(st.zero_last(lr.w1.data, 1), 0), 1) + ud.w1.data
    b2 = _back_adj(dot.w2.data, 1) + lr.w2.data + _fwd_avg_adj(_back_adj(st.zero_last(ud.w2.data, 0), 1), 0)
    ref = dot.w1
    return CenterVec(_img(K.CENTER, ref, st.zero_last(b1, 0)), _img(K.CENTER, ref, st.zero_last(b2, 1)))
