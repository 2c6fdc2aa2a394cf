"""Primal-dual (Chambolle-Pock) solvers for denoising and TGV values.

Every solver is an instance of :func:`chambolle_pock` with its own linear
operator, proximal maps and energy. All auxiliary and dual blocks start at
zero. Denoising starts from u = f; value computations use only the given
image.
"""

from __future__ import annotations

import functools
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import ops_classic as oc
from . import ops_convert as cv
from . import ops_staggered as os_
from .functionals import (
    constraint_residuals,
    magnitude,
    norm1,
    tgv_classic_energy,
    tgv_new_energy,
    tv_central,
    tv_iso,
)
from .grid import (
    CenterTensor,
    CenterVec,
    Composite,
    GridImage,
    GridKind,
    check_same,
    expect_kind,
    pairing,
    zeros_like,
)

TV_SIGMA = 0.99 / 3
TV_TAU = 0.99 / 8
TGV_STEP = 5 / 37


class StepSizeError(ValueError):
    """sigma * tau * ||A||^2 >= 1 for the operator of a solver."""


@dataclass(frozen=True)
class PdConfig:
    sigma: float
    tau: float
    max_iters: int = 500
    check_every: int = 50
    tol: float = 0.0

    def __post_init__(self):
        if not (self.sigma > 0 and self.tau > 0):
            raise ValueError(f"step sizes must be positive, got sigma={self.sigma}, tau={self.tau}")
        if self.max_iters < 1 or self.check_every < 1:
            raise ValueError("max_iters and check_every must be at least 1")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")

    @classmethod
    def tv(cls, **kw) -> "PdConfig":
        return cls(sigma=TV_SIGMA, tau=TV_TAU, **kw)

    @classmethod
    def tgv(cls, **kw) -> "PdConfig":
        return cls(sigma=TGV_STEP, tau=TGV_STEP, **kw)


@dataclass
class PdState:
    z: object
    y: object
    z_bar: object
    k: int = 0


@dataclass
class SolveReport:
    iterations: int
    energy: float
    wall_time: float
    trace: list[float] = field(default_factory=list)
    residuals: tuple[float, float] | None = None
    opnorm: float | None = None
    solution: object = None


# --- generic iteration ---------------------------------------------------

def chambolle_pock(
    state: PdState,
    K: Callable,
    K_adj: Callable,
    prox_fstar: Callable,
    prox_g: Callable,
    sigma: float,
    tau: float,
    iters: int,
    callback: Callable[[PdState], bool | None] | None = None,
) -> PdState:
    """Run ``iters`` steps of

        y     <- prox_{sigma F*}(y + sigma K z_bar)
        z_new <- prox_{tau G}(z - tau K* y)
        z_bar <- 2 z_new - z

    ``callback(state)`` runs after each step; returning True stops early.
    """
    z, y, z_bar, k = state.z, state.y, state.z_bar, state.k
    for _ in range(iters):
        y = prox_fstar(y + sigma * K(z_bar), sigma)
        z_new = prox_g(z - tau * K_adj(y), tau)
        z_bar = 2.0 * z_new - z
        z = z_new
        k += 1
        state = PdState(z, y, z_bar, k)
        if callback is not None and callback(state):
            break
    return state


# --- proximal building blocks -----------------------------------------

def shrink(w, threshold: float):
    """Per-pixel shrinkage (1 - t / max(|w|, t)) * w using the field's magnitude."""
    if threshold < 0:
        raise ValueError(f"threshold must be nonnegative, got {threshold}")
    if threshold == 0:
        return w
    factor = (1.0 - threshold / np.maximum(magnitude(w), threshold))[:, :, None]
    if isinstance(w, GridImage):
        return w.with_data(factor * w.data)
    return w.map(lambda c: c.with_data(factor * c.data))


def project_ball(p, radius: float):
    """radius * p / max(|p|, radius): projection onto the pointwise ball."""
    scale = (radius / np.maximum(magnitude(p), radius))[:, :, None]
    return p.map(lambda c: c.with_data(c.data * scale))


def prox_data(u: GridImage, f: GridImage, tau: float) -> GridImage:
    """(u + tau f) / (1 + tau): prox of the quadratic data term."""
    check_same(u, f)
    return u.with_data((u.data + tau * f.data) / (1.0 + tau))


def _identity(y, sigma):
    return y


# --- operator norms ------------------------------------------------------

@dataclass(frozen=True)
class OpNorm:
    raw: float
    converged: bool
    inflation: float = 1.05

    @property
    def bound(self) -> float:
        return self.inflation * self.raw


def _randomize(template, rng):
    if isinstance(template, GridImage):
        return template.with_data(rng.standard_normal(template.data.shape))
    return template.map(lambda c: _randomize(c, rng))


def estimate_opnorm(apply, apply_adjoint, template, iters: int = 500, rtol: float = 1e-6, seed: int = 0) -> OpNorm:
    """Power iteration on A*A starting from a seeded random element shaped like ``template``.

    ``raw`` is the final estimate of ||A||; ``bound`` adds a 5% margin. If
    the estimate has not settled to ``rtol`` after ``iters`` steps a
    RuntimeWarning is issued and ``converged`` is False.
    """
    x = _randomize(template, np.random.default_rng(seed))
    x = x / np.sqrt(pairing(x, x))
    est, prev = 0.0, -1.0
    for _ in range(iters):
        y = apply_adjoint(apply(x))
        est = np.sqrt(max(pairing(x, y), 0.0))
        nrm = np.sqrt(pairing(y, y))
        if nrm == 0:
            return OpNorm(0.0, True)
        x = y / nrm
        if abs(est - prev) <= rtol * est:
            return OpNorm(float(est), True)
        prev = est
    warnings.warn(f"power iteration not converged after {iters} steps", RuntimeWarning, stacklevel=2)
    return OpNorm(float(est), False)


def _check_steps(name, n1, n2, channels, cfg):
    est = _instance_norm(name, n1, n2, channels)
    if cfg.sigma * cfg.tau * est.bound**2 >= 1.0:
        raise StepSizeError(
            f"{name}: sigma*tau*||A||^2 = {cfg.sigma * cfg.tau * est.bound**2:.4f} >= 1 "
            f"(||A|| <= {est.bound:.4f} including a 5% margin)"
        )
    return est.raw


@functools.lru_cache(maxsize=64)
def _instance_norm(name, n1, n2, channels) -> OpNorm:
    f = GridImage(GridKind.CENTER, n1, n2, np.zeros((n1, n2, channels)))
    K, K_adj, z = _OPERATORS[name](f)
    with warnings.catch_warnings():
        # an unsettled estimate is still a usable lower bound; the 5% margin covers it
        warnings.simplefilter("ignore", RuntimeWarning)
        return estimate_opnorm(K, K_adj, z, iters=100)


# --- instance operators ---------------------------------------------------
#
# Each entry maps an image to (K, K*, primal template).


def _tv_ops(f):
    return oc.grad, lambda p: -oc.div_vec(p), f


def _central_ops(f):
    return oc.grad_central, lambda p: -oc.div_central(p), f


@dataclass(frozen=True, eq=False)
class CondatPrimal(Composite):
    w_dot: CenterVec
    w_lr: CenterVec
    w_ud: CenterVec
    u: GridImage


def _condat_K(z):
    return cv.condat_L_adj(z.w_dot, z.w_lr, z.w_ud) - oc.grad(z.u)


def _condat_K_adj(p):
    dot, lr, ud = cv.condat_L_ops(p)
    return CondatPrimal(dot, lr, ud, oc.div_vec(p))


def _condat_ops(f):
    zc = cv.center_vec(*f.dims)
    return _condat_K, _condat_K_adj, CondatPrimal(zc, zc, zc, f)


@dataclass(frozen=True, eq=False)
class TgvPrimal(Composite):
    v: CenterTensor
    w: CenterVec
    u: GridImage
    omega: CenterVec


@dataclass(frozen=True, eq=False)
class TgvDual(Composite):
    v: CenterTensor
    w: CenterVec


def _tgv_K(z):
    return TgvDual(z.v - oc.sym_grad(z.omega), z.w - oc.grad(z.u) + z.omega)


def _tgv_K_adj(y):
    return TgvPrimal(y.v, y.w, oc.div_vec(y.w), oc.div_tensor(y.v) + y.w)


def _tgv_zero(f):
    zc = zeros_like(f)
    return TgvPrimal(CenterTensor(zc, zc, zc), CenterVec(zc, zc), f, CenterVec(zc, zc))


def _tgv_ops(f):
    return _tgv_K, _tgv_K_adj, _tgv_zero(f)


def _tgv_new_ops(f):
    return cv.apply_Lbar_star, cv.apply_Lbar, cv.zero_primal(f)


@dataclass(frozen=True, eq=False)
class ValuePrimal(Composite):
    """New-TGV decomposition variables for a fixed image."""

    v_dot: CenterTensor
    w_dot: CenterVec
    w_lr: CenterVec
    w_ud: CenterVec
    omega: object


def _value_new_K(z):
    v = cv.adj_L_dot_tensor(z.v_dot) - os_.sym_grad_new(z.omega)
    w = cv.lstar_sum(z.w_dot, z.w_lr, z.w_ud) + z.omega
    return cv.DualBundle(v, w)


def _value_new_K_adj(y):
    return ValuePrimal(
        cv.L_dot_tensor(y.v), cv.L_dot_vec(y.w), cv.L_lr(y.w), cv.L_ud(y.w), os_.div_new_tensor(y.v) + y.w
    )


def _value_new_ops(f):
    b = cv.zero_primal(f)
    return _value_new_K, _value_new_K_adj, ValuePrimal(b.v_dot, b.w_dot, b.w_lr, b.w_ud, b.omega)


@dataclass(frozen=True, eq=False)
class ValueClassicPrimal(Composite):
    v: CenterTensor
    w: CenterVec
    omega: CenterVec


def _value_classic_K(z):
    return TgvDual(z.v - oc.sym_grad(z.omega), z.w + z.omega)


def _value_classic_K_adj(y):
    return ValueClassicPrimal(y.v, y.w, oc.div_tensor(y.v) + y.w)


def _value_classic_ops(f):
    t = _tgv_zero(f)
    return _value_classic_K, _value_classic_K_adj, ValueClassicPrimal(t.v, t.w, t.omega)


_OPERATORS = {
    "tv": _tv_ops,
    "tv-central": _central_ops,
    "tv-condat": _condat_ops,
    "tgv": _tgv_ops,
    "tgv-new": _tgv_new_ops,
    "tgv-value": _value_classic_ops,
    "tgv-new-value": _value_new_ops,
}


def operator_for(name: str, f: GridImage):
    """(K, K*, zero-initialised primal) of a solver instance, for inspection."""
    return _OPERATORS[name](f)


# --- driver ----------------------------------------------------------------

def _run(name, f, state, prox_fstar, prox_g, energy, cfg, callback):
    expect_kind(f, GridKind.CENTER)
    norm = _check_steps(name, *f.dims, cfg)
    K, K_adj, _ = _OPERATORS[name](f)
    trace: list[float] = []
    t0 = time.perf_counter()

    def monitor(s):
        stop = bool(callback(s)) if callback is not None else False
        if s.k % cfg.check_every == 0:
            trace.append(energy(s.z))
            if cfg.tol > 0 and len(trace) > 1:
                prev, cur = trace[-2], trace[-1]
                stop = stop or abs(cur - prev) <= cfg.tol * max(abs(cur), 1e-300)
        return stop

    state = chambolle_pock(state, K, K_adj, prox_fstar, prox_g, cfg.sigma, cfg.tau, cfg.max_iters, monitor)
    wall = time.perf_counter() - t0
    rep = SolveReport(state.k, energy(state.z), wall, trace, opnorm=norm)
    return state, rep


def _data_term(u, f):
    return 0.5 * float(np.sum((u.data - f.data) ** 2))


def _positive(**kw):
    for k, v in kw.items():
        if not v > 0:
            raise ValueError(f"{k} must be positive, got {v}")


def denoise_tv(f: GridImage, lam: float, cfg: PdConfig | None = None, callback=None):
    """min_u 1/2 |u - f|^2 + lam * TV_iso(u)."""
    _positive(lam=lam)
    cfg = cfg or PdConfig.tv()
    y0 = oc.grad(zeros_like(f))
    st = PdState(f, y0, f)
    st, rep = _run(
        "tv", f, st,
        lambda p, s: project_ball(p, lam),
        lambda u, t: prox_data(u, f, t),
        lambda u: _data_term(u, f) + lam * tv_iso(u),
        cfg, callback,
    )
    return st.z, rep


def denoise_tv_central(f: GridImage, lam: float, cfg: PdConfig | None = None, callback=None):
    """Same as :func:`denoise_tv` with central differences."""
    _positive(lam=lam)
    cfg = cfg or PdConfig.tv()
    y0 = oc.grad(zeros_like(f))
    st = PdState(f, y0, f)
    st, rep = _run(
        "tv-central", f, st,
        lambda p, s: project_ball(p, lam),
        lambda u, t: prox_data(u, f, t),
        lambda u: _data_term(u, f) + lam * tv_central(u),
        cfg, callback,
    )
    return st.z, rep


def denoise_condat(f: GridImage, lam: float, cfg: PdConfig | None = None, callback=None):
    """Denoising with Condat's TV, split as L_dot* w_dot + L_lr* w_lr + L_ud* w_ud = grad u."""
    _positive(lam=lam)
    cfg = cfg or PdConfig.tv()
    _, _, z0 = _condat_ops(f)
    st = PdState(z0, oc.grad(zeros_like(f)), z0)

    def prox_g(z, t):
        return CondatPrimal(
            shrink(z.w_dot, lam * t), shrink(z.w_lr, lam * t), shrink(z.w_ud, lam * t), prox_data(z.u, f, t)
        )

    def energy(z):
        return _data_term(z.u, f) + lam * (norm1(z.w_dot) + norm1(z.w_lr) + norm1(z.w_ud))

    st, rep = _run("tv-condat", f, st, _identity, prox_g, energy, cfg, callback)
    return st.z.u, rep


def denoise_tgv(f: GridImage, alpha0: float, alpha1: float, cfg: PdConfig | None = None, callback=None):
    """Classic second-order TGV denoising."""
    _positive(alpha0=alpha0, alpha1=alpha1)
    cfg = cfg or PdConfig.tgv()
    z0 = _tgv_zero(f)
    y0 = _tgv_K(_tgv_zero(zeros_like(f)))
    st = PdState(z0, y0, z0)

    def prox_g(z, t):
        return TgvPrimal(shrink(z.v, alpha0 * t), shrink(z.w, alpha1 * t), prox_data(z.u, f, t), z.omega)

    def energy(z):
        return _data_term(z.u, f) + tgv_classic_energy(z.u, z.omega, alpha0, alpha1)

    st, rep = _run("tgv", f, st, _identity, prox_g, energy, cfg, callback)
    return st.z.u, rep


def denoise_tgv_new(f: GridImage, alpha0: float, alpha1: float, cfg: PdConfig | None = None, callback=None):
    """Denoising with the rotation-invariant staggered TGV."""
    _positive(alpha0=alpha0, alpha1=alpha1)
    cfg = cfg or PdConfig.tgv()
    z0 = cv.zero_primal(f)
    st = PdState(z0, cv.zero_dual(*f.dims), z0)

    def prox_g(z, t):
        return cv.PrimalBundle(
            shrink(z.v_dot, alpha0 * t),
            shrink(z.w_dot, alpha1 * t),
            shrink(z.w_lr, alpha1 * t),
            shrink(z.w_ud, alpha1 * t),
            prox_data(z.u, f, t),
            z.omega,
        )

    def energy(z):
        return _data_term(z.u, f) + tgv_new_energy(z, alpha0, alpha1)

    st, rep = _run("tgv-new", f, st, _identity, prox_g, energy, cfg, callback)
    rep.residuals = constraint_residuals(st.z)
    return st.z.u, rep


def tgv_value_new(u: GridImage, alpha0: float, alpha1: float, cfg: PdConfig | None = None, callback=None):
    """Value of the staggered TGV at ``u``.

    Returns (value, report); ``report.solution`` holds the final
    decomposition as a :class:`PrimalBundle` around ``u``.
    """
    _positive(alpha0=alpha0, alpha1=alpha1)
    cfg = cfg or PdConfig.tgv(max_iters=1000)
    _, _, z0 = _value_new_ops(u)
    gu = os_.grad_new(u)
    st = PdState(z0, cv.zero_dual(*u.dims), z0)

    def prox_fstar(y, s):
        return cv.DualBundle(y.v, y.w - s * gu)

    def prox_g(z, t):
        return ValuePrimal(
            shrink(z.v_dot, alpha0 * t),
            shrink(z.w_dot, alpha1 * t),
            shrink(z.w_lr, alpha1 * t),
            shrink(z.w_ud, alpha1 * t),
            z.omega,
        )

    def energy(z):
        return alpha0 * norm1(z.v_dot) + alpha1 * (norm1(z.w_dot) + norm1(z.w_lr) + norm1(z.w_ud))

    st, rep = _run("tgv-new-value", u, st, prox_fstar, prox_g, energy, cfg, callback)
    z = st.z
    bundle = cv.PrimalBundle(z.v_dot, z.w_dot, z.w_lr, z.w_ud, u, z.omega)
    rep.residuals = constraint_residuals(bundle)
    rep.solution = bundle
    return rep.energy, rep


def tgv_value_classic(u: GridImage, alpha0: float, alpha1: float, cfg: PdConfig | None = None, callback=None):
    """Value of classic TGV at ``u`` via the split form w = grad u - omega, v = sym_grad omega.

    Returns (value, report); ``report.solution`` is (v, w, omega).
    """
    _positive(alpha0=alpha0, alpha1=alpha1)
    cfg = cfg or PdConfig.tgv(max_iters=1000)
    _, _, z0 = _value_classic_ops(u)
    gu = oc.grad(u)
    y0 = TgvDual(z0.v, z0.w)
    st = PdState(z0, y0, z0)

    def prox_fstar(y, s):
        return TgvDual(y.v, y.w - s * gu)

    def prox_g(z, t):
        return ValueClassicPrimal(shrink(z.v, alpha0 * t), shrink(z.w, alpha1 * t), z.omega)

    def energy(z):
        return alpha1 * norm1(z.w) + alpha0 * norm1(z.v)

    st, rep = _run("tgv-value", u, st, prox_fstar, prox_g, energy, cfg, callback)
    z = st.z
    r1 = gu - z.omega - z.w
    r2 = oc.sym_grad(z.omega) - z.v
    rep.residuals = (_maxabs(r1), _maxabs(r2))
    rep.solution = (z.v, z.w, z.omega)
    return rep.energy, rep


def _maxabs(x):
    return max(float(np.max(np.abs(c.data))) for c in x.parts())
