"""Grid kinds, scalar fields on them, and grouped vector/tensor fields.

Storage convention for base dimensions (N1, N2)::

    axis 0 -> n1 (x, "first" coordinate)
    axis 1 -> n2 (y, "second" coordinate)
    axis 2 -> channel

    kind           storage shape     storage index i  <->  logical n1
    CENTER         (N1,   N2)        n1 = i + 1
    HORIZ_EDGE     (N1+1, N2)        n1 = i + 1/2
    VERT_EDGE      (N1,   N2+1)      (same as CENTER along axis 0)
    CENTER_EXT_X   (N1+2, N2)        n1 = i        (0 .. N1+1)
    CENTER_EXT_Y   (N1,   N2+2)      (same as CENTER along axis 0)
    CORNER         (N1+1, N2+1)      (n1, n2) = (i + 1/2, j + 1/2)

The axis-1 map is the mirror image of the axis-0 map. Half-integer
coordinates are never stored. Each kind carries a fixed integer offset.

                n2 ->
          +-----+-----+
     n1   |  .  |  .  |     .  CENTER sample (pixel centre)
     |    +--|--+--|--+     -- VERT_EDGE sample (between columns)
     v    |  .  |  .  |     |  HORIZ_EDGE sample (between rows)
          +-----+-----+     +  CORNER sample

Everything is float64; channels are always present (C = 1 for grayscale).
"""

from __future__ import annotations

import enum
import operator
from dataclasses import dataclass, fields
from typing import Callable

import numpy as np


class GridError(ValueError):
    """Base class for invalid grid arguments."""


class DimensionError(GridError):
    pass


class GridKindError(GridError):
    pass


class ShapeMismatchError(GridError):
    pass


class GridKind(enum.Enum):
    CENTER = "center"
    HORIZ_EDGE = "horiz_edge"
    VERT_EDGE = "vert_edge"
    CENTER_EXT_X = "center_ext_x"
    CENTER_EXT_Y = "center_ext_y"
    CORNER = "corner"

    @property
    def pad(self) -> tuple[int, int]:
        """Extra storage rows/columns relative to the base dimensions."""
        return _PAD[self]

    def storage_shape(self, n1: int, n2: int) -> tuple[int, int]:
        p1, p2 = _PAD[self]
        return n1 + p1, n2 + p2

    def rotated(self) -> "GridKind":
        """Kind occupied by a field of this kind after a 90 degree rotation."""
        return _ROT[self]


_PAD = {
    GridKind.CENTER: (0, 0),
    GridKind.HORIZ_EDGE: (1, 0),
    GridKind.VERT_EDGE: (0, 1),
    GridKind.CENTER_EXT_X: (2, 0),
    GridKind.CENTER_EXT_Y: (0, 2),
    GridKind.CORNER: (1, 1),
}

_ROT = {
    GridKind.CENTER: GridKind.CENTER,
    GridKind.HORIZ_EDGE: GridKind.VERT_EDGE,
    GridKind.VERT_EDGE: GridKind.HORIZ_EDGE,
    GridKind.CENTER_EXT_X: GridKind.CENTER_EXT_Y,
    GridKind.CENTER_EXT_Y: GridKind.CENTER_EXT_X,
    GridKind.CORNER: GridKind.CORNER,
}


@dataclass(frozen=True, eq=False)
class GridImage:
    """A (multichannel) scalar field on one grid kind.

    ``data`` has shape ``kind.storage_shape(n1, n2) + (channels,)``. Treat
    instances as immutable: operators always return new arrays.
    """

    kind: GridKind
    n1: int
    n2: int
    data: np.ndarray

    def __post_init__(self):
        expected = self.kind.storage_shape(self.n1, self.n2)
        shape = self.data.shape
        if self.data.ndim != 3 or shape[:2] != expected or shape[2] < 1:
            raise ShapeMismatchError(
                f"{self.kind.value} field with base dims ({self.n1}, {self.n2}) "
                f"needs data of shape {expected + ('C',)}, got {shape}"
            )

    @classmethod
    def from_array(cls, kind: GridKind, array, n1: int | None = None, n2: int | None = None) -> "GridImage":
        """Copy ``array`` into a new field, inferring base dims from its shape.

        A 2-D array is treated as a single channel.
        """
        data = np.array(array, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3:
            raise ShapeMismatchError(f"expected a 2-D or 3-D array, got {data.ndim}-D")
        p1, p2 = kind.pad
        n1 = data.shape[0] - p1 if n1 is None else n1
        n2 = data.shape[1] - p2 if n2 is None else n2
        _check_dims(n1, n2, data.shape[2])
        if not np.all(np.isfinite(data)):
            raise ValueError("field contains non-finite values")
        return cls(kind, n1, n2, data)

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.n1, self.n2, self.channels

    def with_data(self, data: np.ndarray) -> "GridImage":
        return GridImage(self.kind, self.n1, self.n2, data)

    def map(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridImage":
        return self.with_data(fn(self.data))

    def _binary(self, other, op):
        if isinstance(other, GridImage):
            check_same(self, other)
            return self.with_data(op(self.data, other.data))
        if np.isscalar(other):
            return self.with_data(op(self.data, other))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, operator.add)

    def __sub__(self, other):
        return self._binary(other, operator.sub)

    def __mul__(self, other):
        return self._binary(other, operator.mul)

    def __truediv__(self, other):
        return self._binary(other, operator.truediv)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __neg__(self):
        return self.with_data(-self.data)

    def __repr__(self):
        return f"GridImage({self.kind.value}, n1={self.n1}, n2={self.n2}, C={self.channels})"


def _check_dims(n1, n2, channels=1):
    if n1 < 2 or n2 < 2:
        raise DimensionError(f"base dimensions must be at least 2x2, got {n1}x{n2}")
    if channels < 1:
        raise DimensionError(f"need at least one channel, got {channels}")


def new_image(kind: GridKind, n1: int, n2: int, channels: int = 1, fill: float = 0.0) -> GridImage:
    _check_dims(n1, n2, channels)
    shape = kind.storage_shape(n1, n2) + (channels,)
    return GridImage(kind, n1, n2, np.full(shape, float(fill)))


def check_same(a: GridImage, b: GridImage):
    if a.kind is not b.kind or a.data.shape != b.data.shape or (a.n1, a.n2) != (b.n1, b.n2):
        raise ShapeMismatchError(f"incompatible fields: {a!r} vs {b!r}")


def expect_kind(u: GridImage, *kinds: GridKind) -> GridImage:
    if not isinstance(u, GridImage):
        raise TypeError(f"expected a GridImage, got {type(u).__name__}")
    if u.kind not in kinds:
        names = ", ".join(k.value for k in kinds)
        raise GridKindError(f"expected a field on {names}, got {u.kind.value}")
    return u


# --- grouped fields -------------------------------------------------------

class Composite:
    """Mixin giving dataclasses of fields componentwise arithmetic."""

    _weights: tuple = ()

    def parts(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))

    def map(self, fn, *others):
        """Apply ``fn`` to matching components of ``self`` and ``others``."""
        cols = zip(self.parts(), *(o.parts() for o in others))
        return type(self)(*(fn(*c) for c in cols))

    def _binary(self, other, op):
        if isinstance(other, Composite):
            if type(other) is not type(self):
                raise ShapeMismatchError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
            return self.map(op, other)
        if np.isscalar(other):
            return self.map(lambda a: op(a, other))
        return NotImplemented

    def __add__(self, other):
        return self._binary(other, operator.add)

    def __sub__(self, other):
        return self._binary(other, operator.sub)

    def __mul__(self, other):
        return self._binary(other, operator.mul)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other):
        return self._binary(other, operator.truediv)

    def __neg__(self):
        return self.map(operator.neg)


@dataclass(frozen=True, eq=False)
class VecField(Composite):
    """Two-component field.

    Staggered variant: ``w1`` on HORIZ_EDGE, ``w2`` on VERT_EDGE.
    Centred variants keep both components on one grid (CENTER, HORIZ_EDGE
    or VERT_EDGE), e.g. the outputs of the conversion operators.
    """

    w1: GridImage
    w2: GridImage

    def __post_init__(self):
        if self.w1.dims != self.w2.dims:
            raise ShapeMismatchError(f"components disagree: {self.w1!r} vs {self.w2!r}")


@dataclass(frozen=True, eq=False)
class TensorField(Composite):
    """Symmetric 2x2 tensor field ``[[v1, v3], [v3, v2]]``.

    Staggered variant: v1 on CENTER_EXT_X, v2 on CENTER_EXT_Y, v3 on CORNER.
    Centred variant: all three on CENTER.
    """

    v1: GridImage
    v2: GridImage
    v3: GridImage

    _weights = (1.0, 1.0, 2.0)

    def __post_init__(self):
        if not (self.v1.dims == self.v2.dims == self.v3.dims):
            raise ShapeMismatchError("tensor components disagree in dims")


# Centred fields use the same containers; the aliases document intent.
CenterVec = VecField
CenterTensor = TensorField


def zeros_like(x):
    if isinstance(x, GridImage):
        return x.with_data(np.zeros_like(x.data))
    return x.map(zeros_like)


def inner(a, b) -> float:
    """Plain sum of elementwise products over every stored entry."""
    if isinstance(a, GridImage):
        check_same(a, b)
        return float(np.vdot(a.data, b.data))
    if type(a) is not type(b):
        raise ShapeMismatchError(f"cannot pair {type(a).__name__} with {type(b).__name__}")
    return sum(inner(x, y) for x, y in zip(a.parts(), b.parts()))


def pairing(a, b) -> float:
    """Inner product with the Frobenius identification for tensors.

    Same as :func:`inner` except that the off-diagonal tensor component
    counts twice (``[[v1, v3], [v3, v2]]`` has two copies of ``v3``). This is
    the pairing under which every divergence here is minus the adjoint of
    the corresponding gradient.
    """
    if isinstance(a, GridImage):
        return inner(a, b)
    if type(a) is not type(b):
        raise ShapeMismatchError(f"cannot pair {type(a).__name__} with {type(b).__name__}")
    weights = a._weights or (1.0,) * len(a.parts())
    return sum(wt * pairing(x, y) for wt, x, y in zip(weights, a.parts(), b.parts()))


# --- 90 degree rotation ----------------------------------------------------

def rotate_any(u: GridImage) -> GridImage:
    """Rotate a field on any grid: output(n1, n2) = u(n2, N2 - n1 + 1).

    On storage this is ``np.rot90`` for every kind, since each grid's
    offset pattern is symmetric about the centre of the domain.
    """
    data = np.ascontiguousarray(np.rot90(u.data, axes=(0, 1)))
    return GridImage(u.kind.rotated(), u.n2, u.n1, data)


def rotate90(u: GridImage) -> GridImage:
    """Rotate a CENTER image by 90 degrees, channelwise."""
    expect_kind(u, GridKind.CENTER)
    return rotate_any(u)


def rotate_vec(w: VecField) -> VecField:
    """Vector rotation: (w1, w2) -> (-R w2, R w1)."""
    return VecField(-rotate_any(w.w2), rotate_any(w.w1))


def rotate_tensor(v: TensorField) -> TensorField:
    """Tensor rotation: (v1, v2, v3) -> (R v2, R v1, -R v3)."""
    return TensorField(rotate_any(v.v2), rotate_any(v.v1), -rotate_any(v.v3))
