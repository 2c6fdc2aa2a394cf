"""Shared test utilities: random fields and dense-matrix extraction."""

import numpy as np

from stagtgv.grid import GridImage, GridKind, new_image


def rand_like(x, rng):
    """Random normal field with the structure of ``x``."""
    if isinstance(x, GridImage):
        return x.with_data(rng.standard_normal(x.data.shape))
    return x.map(lambda c: rand_like(c, rng))


def center(arr):
    return GridImage.from_array(GridKind.CENTER, np.asarray(arr, dtype=float))


def random_center(n1, n2, rng, channels=1):
    return rand_like(new_image(GridKind.CENTER, n1, n2, channels), rng)


def leaves(x):
    if isinstance(x, GridImage):
        return [x]
    return [c for p in x.parts() for c in leaves(p)]


def flatten(x):
    return np.concatenate([c.data.ravel() for c in leaves(x)])


def unflatten(template, vec):
    out, pos = [], 0

    def build(t):
        nonlocal pos
        if isinstance(t, GridImage):
            n = t.data.size
            img = t.with_data(vec[pos : pos + n].reshape(t.data.shape).copy())
            pos += n
            return img
        return type(t)(*(build(p) for p in t.parts()))

    out = build(template)
    assert pos == vec.size
    return out


def matrix_of(op, template):
    """Dense matrix of a linear operator, from its action on every basis element."""
    n = flatten(template).size
    cols = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        cols.append(flatten(op(unflatten(template, e))))
    return np.stack(cols, axis=1)


def rel_err(a, b):
    scale = max(abs(a), abs(b), 1e-300)
    return abs(a - b) / scale
