"""Closed-form regularizer evaluations and pointwise magnitudes.

Magnitudes follow the Frobenius convention: for vector fields
|w| = sqrt(w1^2 + w2^2), for symmetric tensors |v| = sqrt(v1^2 + v2^2 + 2 v3^2).
With several channels every square becomes a squared Euclidean norm over
the channel axis, so channels are coupled pixel by pixel.
"""

import numpy as np

from .grid import GridImage, ShapeMismatchError
from .ops_classic import grad, grad_central, sym_grad
from .ops_convert import PrimalBundle, adj_L_dot_tensor, lstar_sum
from .ops_staggered import grad_new, sym_grad_new


def magnitude(field) -> np.ndarray:
    """Per-pixel magnitude of a field whose components share one grid.

    Returns an array of the storage shape (no channel axis).
    """
    if isinstance(field, GridImage):
        return np.sqrt(np.sum(field.data**2, axis=2))
    parts = field.parts()
    if len({(p.kind, p.data.shape) for p in parts}) != 1:
        raise ShapeMismatchError("magnitude needs all components on the same grid")
    weights = field._weights or (1.0,) * len(parts)
    sq = sum(wt * np.sum(p.data**2, axis=2) for wt, p in zip(weights, parts))
    return np.sqrt(sq)


def norm1(field) -> float:
    """Sum of per-pixel magnitudes."""
    return float(np.sum(magnitude(field)))


def _positive(**alphas):
    for name, a in alphas.items():
        if not a > 0:
            raise ValueError(f"{name} must be positive, got {a}")


def tv_iso(u: GridImage) -> float:
    """Isotropic TV: sum of |(D_x+ u, D_y+ u)|."""
    return norm1(grad(u))


def tv_central(u: GridImage) -> float:
    """TV with central differences and mirror boundary."""
    return norm1(grad_central(u))


def tgv_classic_energy(u: GridImage, omega, alpha0: float, alpha1: float) -> float:
    """alpha1 * ||grad u - omega||_1 + alpha0 * ||sym_grad omega||_1."""
    _positive(alpha0=alpha0, alpha1=alpha1)
    return alpha1 * norm1(grad(u) - omega) + alpha0 * norm1(sym_grad(omega))


def tgv_new_energy(z: PrimalBundle, alpha0: float, alpha1: float) -> float:
    """alpha0 |v_dot|_1 + alpha1 (|w_dot|_1 + |w_lr|_1 + |w_ud|_1)."""
    _positive(alpha0=alpha0, alpha1=alpha1)
    return alpha0 * norm1(z.v_dot) + alpha1 * (norm1(z.w_dot) + norm1(z.w_lr) + norm1(z.w_ud))


def _maxabs(x) -> float:
    if isinstance(x, GridImage):
        return float(np.max(np.abs(x.data)))
    return max(_maxabs(p) for p in x.parts())


def constraint_residuals(z: PrimalBundle) -> tuple[float, float]:
    """Max-norm defects of the two linear constraints of the new TGV.

    First:  grad_new u - omega = L_dot* w_dot + L_lr* w_lr + L_ud* w_ud
    Second: sym_grad_new omega = L_dot* v_dot
    """
    r1 = grad_new(z.u) - z.omega - lstar_sum(z.w_dot, z.w_lr, z.w_ud)
    r2 = sym_grad_new(z.omega) - adj_L_dot_tensor(z.v_dot)
    return _maxabs(r1), _maxabs(r2)

