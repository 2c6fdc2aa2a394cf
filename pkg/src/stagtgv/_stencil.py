"""Array-level stencil helpers shared by the operator modules.

All helpers take an ``axis`` (0 or 1) and never modify their input.
"""

import numpy as np


def zpad(a, axis, before=0, after=0):
    """Zero-pad ``a`` along ``axis``."""
    width = [(0, 0)] * a.ndim
    width[axis] = (before, after)
    return np.pad(a, width)


def take(a, axis, start, stop=None):
    """``a[start:stop]`` along ``axis``."""
    idx = [slice(None)] * a.ndim
    idx[axis] = slice(start, stop)
    return a[tuple(idx)]


def zero_ends(a, axis):
    """Copy of ``a`` with the first and last slice along ``axis`` zeroed."""
    out = a.copy()
    idx = [slice(None)] * a.ndim
    idx[axis] = [0, -1]
    out[tuple(idx)] = 0.0
    return out


def zero_last(a, axis):
    out = a.copy()
    idx = [slice(None)] * a.ndim
    idx[axis] = -1
    out[tuple(idx)] = 0.0
    return out


def diff(a, axis):
    return np.diff(a, axis=axis)


def pairsum(a, axis):
    """Sum of neighbouring slices: out[i] = a[i] + a[i+1] (length shrinks by one)."""
    return take(a, axis, 1) + take(a, axis, 0, -1)


def padsum(a, axis):
    """Transpose of :func:`pairsum`: zero-pad both ends, then pair-sum."""
    return pairsum(zpad(a, axis, 1, 1), axis)


def fwd(a, axis):
    """Forward difference with a zero last slice (Neumann closure)."""
    return zpad(diff(a, axis), axis, 0, 1)


def bwd(a, axis):
    """Minus the transpose of :func:`fwd`."""
    return diff(zpad(take(a, axis, 0, -1), axis, 1, 1), axis)
