"""Classic finite-difference operators on CENTER images.

Forward differences use homogeneous Neumann closure (zero on the last
row/column). Backward differences and divergences are defined as the exact
negative adjoints of the forward operators, so that

    <grad u, p> = -<u, div_vec p>
    <sym_grad w, v> = -<w, div_tensor v>     (off-diagonal counted twice)
    <grad2 u, v> = <u, div2 v>

hold to rounding for all arguments.
"""

import numpy as np

from . import _stencil as st
from .grid import CenterTensor, CenterVec, GridImage, GridKind, expect_kind

C = GridKind.CENTER


def _center(u):
    return expect_kind(u, C)


def dx_plus(u: GridImage) -> GridImage:
    return _center(u).map(lambda a: st.fwd(a, 0))


def dy_plus(u: GridImage) -> GridImage:
    return _center(u).map(lambda a: st.fwd(a, 1))


def dx_minus(w: GridImage) -> GridImage:
    """Backward difference: w[0] on the first row, -w[N1-2] on the last."""
    return _center(w).map(lambda a: st.bwd(a, 0))


def dy_minus(w: GridImage) -> GridImage:
    return _center(w).map(lambda a: st.bwd(a, 1))


def grad(u: GridImage) -> CenterVec:
    return CenterVec(dx_plus(u), dy_plus(u))


def div_vec(p: CenterVec) -> GridImage:
    return dx_minus(p.w1) + dy_minus(p.w2)


def sym_grad(w: CenterVec) -> CenterTensor:
    off = 0.5 * (dy_plus(w.w1) + dx_plus(w.w2))
    return CenterTensor(dx_plus(w.w1), dy_plus(w.w2), off)


def div_tensor(v: CenterTensor) -> CenterVec:
    return CenterVec(dx_minus(v.v1) + dy_minus(v.v3), dx_minus(v.v3) + dy_minus(v.v2))


def div2(v: CenterTensor) -> GridImage:
    return div_vec(div_tensor(v))


def grad2(u: GridImage) -> CenterTensor:
    return sym_grad(grad(u))


# --- central differences with mirror boundary -----------------------------

def _central(a, axis):
    # mirror extension u(0) := u(1), u(N+1) := u(N)
    ext = np.concatenate([st.take(a, axis, 0, 1), a, st.take(a, axis, -1)], axis=axis)
    return 0.5 * (st.take(ext, axis, 2) - st.take(ext, axis, 0, -2))


def _central_adj(p, axis):
    # transpose of _central: shifts transpose to zero pads, then fold the
    # mirrored end samples back onto the first/last rows
    r = 0.5 * (st.zpad(p, axis, 2, 0) - st.zpad(p, axis, 0, 2))
    out = st.take(r, axis, 1, -1).copy()
    first = [slice(None)] * p.ndim
    last = [slice(None)] * p.ndim
    first[axis], last[axis] = 0, -1
    out[tuple(first)] += r[tuple(first)]
    out[tuple(last)] += r[tuple(last)]
    return out


def grad_central(u: GridImage) -> CenterVec:
    """Central differences 0.5*(u[i+1] - u[i-1]) with mirror boundary."""
    _center(u)
    return CenterVec(u.map(lambda a: _central(a, 0)), u.map(lambda a: _central(a, 1)))


def div_central(p: CenterVec) -> GridImage:
    """Negative adjoint of :func:`grad_central`."""
    _center(p.w1)
    a = _central_adj(p.w1.data, 0) + _central_adj(p.w2.data, 1)
    return p.w1.with_data(-a)
