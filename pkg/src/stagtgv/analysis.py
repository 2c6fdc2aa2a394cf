"""Quality metrics, parameter sweeps, rotation checks and synthetic phantoms."""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .grid import GridImage, GridKind, check_same, expect_kind, rotate90
from .models import ModelSpec, run_model
from .solver import PdConfig, tgv_value_classic, tgv_value_new

SSIM_WINDOW = 8
SSIM_K1 = 0.01
SSIM_K2 = 0.03
THREADS_ENV = "STAGTGV_THREADS"


@dataclass(frozen=True)
class MetricPair:
    psnr: float
    ssim: float


def _pair(u, ref):
    expect_kind(u, GridKind.CENTER)
    check_same(u, ref)


def psnr(u: GridImage, ref: GridImage, peak: float = 1.0) -> float:
    """10 log10(peak^2 / MSE) over all pixels and channels; inf if identical."""
    _pair(u, ref)
    mse = float(np.mean((u.data - ref.data) ** 2))
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak**2 / mse)


def _ssim_channel(x, y, win, c1, c2):
    def box(a):
        return sliding_window_view(a, (win, win)).mean(axis=(-2, -1))

    mx, my = box(x), box(y)
    vx = box(x * x) - mx * mx
    vy = box(y * y) - my * my
    cxy = box(x * y) - mx * my
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def ssim(u: GridImage, ref: GridImage, window: int = SSIM_WINDOW, data_range: float = 1.0) -> float:
    """Mean SSIM over all valid ``window`` x ``window`` uniform windows, averaged over channels.

    Uses population (1/n) window statistics and K1 = 0.01, K2 = 0.03.
    """
    _pair(u, ref)
    if u.n1 < window or u.n2 < window:
        raise ValueError(f"image {u.n1}x{u.n2} is smaller than the {window}x{window} SSIM window")
    c1, c2 = (SSIM_K1 * data_range) ** 2, (SSIM_K2 * data_range) ** 2
    vals = [_ssim_channel(u.data[:, :, c], ref.data[:, :, c], window, c1, c2) for c in range(u.channels)]
    return float(np.mean(vals))


def metrics(u: GridImage, ref: GridImage) -> MetricPair:
    return MetricPair(psnr(u, ref), ssim(u, ref))


# --- parameter sweep -------------------------------------------------------

@dataclass
class SweepResult:
    model: ModelSpec
    grid: list[float]
    psnr: list[float | None]
    ssim: list[float | None]
    errors: dict[str, str] = field(default_factory=dict)
    best_value: float | None = None
    best: MetricPair | None = None
    on_boundary: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["model"] = self.model.to_dict()
        return d


def _threads():
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def sweep(f: GridImage, ref: GridImage, model: ModelSpec, grid, threads: int | None = None) -> SweepResult:
    """Run ``model`` for every parameter in ``grid`` and pick the PSNR-best one.

    For TGV models the grid is over alpha1 with alpha0 = alpha_ratio * alpha1.
    Invalid points (e.g. nonpositive values) are recorded in ``errors`` and
    skipped.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("parameter grid is empty")
    _pair(f, ref)

    def one(value):
        try:
            spec = model.with_parameter(value)
            u, _ = run_model(f, spec)
            return value, metrics(u, ref), None
        except (ValueError, ArithmeticError) as exc:
            return value, None, f"{type(exc).__name__}: {exc}"

    n = threads or _threads()
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(one, grid))
    else:
        results = [one(v) for v in grid]

    by_value = {v: (m, e) for v, m, e in results}
    res = SweepResult(model, grid, [], [])
    for v in grid:
        m, err = by_value[v]
        res.psnr.append(m.psnr if m else None)
        res.ssim.append(m.ssim if m else None)
        if err:
            res.errors[repr(v)] = err
    valid = [i for i, p in enumerate(res.psnr) if p is not None]
    if valid:
        i = max(valid, key=lambda k: res.psnr[k])
        res.best_value = grid[i]
        res.best = MetricPair(res.psnr[i], res.ssim[i])
        res.on_boundary = len(grid) > 1 and grid[i] in (min(grid), max(grid))
        if res.on_boundary:
            warnings.warn(f"best {model.model} parameter {grid[i]} lies on the grid boundary", stacklevel=2)
    return res


# --- rotation invariance -----------------------------------------------------

@dataclass
class InvarianceRow:
    model: str
    value: float
    value_rotated: float
    abs_error: float
    rel_error: float


@dataclass
class InvarianceReport:
    alpha0: float
    alpha1: float
    iterations: int
    rows: list[InvarianceRow]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_table(self) -> str:
        lines = [
            f"(alpha0, alpha1) = ({self.alpha0:g}, {self.alpha1:g}), {self.iterations} iterations",
            f"{'model':<10}{'value':>16}{'rotated':>16}{'abs error':>13}{'rel error':>13}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.model:<10}{r.value:>16.6f}{r.value_rotated:>16.6f}{r.abs_error:>13.3e}{r.rel_error:>13.3e}"
            )
        return "\n".join(lines)


def invariance_report(u: GridImage, alpha0: float, alpha1: float, cfg: PdConfig | None = None) -> InvarianceReport:
    """TGV values of u and of its 90 degree rotation for both discretizations."""
    cfg = cfg or PdConfig.tgv(max_iters=1000)
    ur = rotate90(u)
    rows = []
    for name, fn in (("tgv", tgv_value_classic), ("tgv-new", tgv_value_new)):
        a, _ = fn(u, alpha0, alpha1, cfg)
        b, _ = fn(ur, alpha0, alpha1, cfg)
        err = abs(a - b)
        rows.append(InvarianceRow(name, a, b, err, err / abs(a) if a else err))
    return InvarianceReport(alpha0, alpha1, cfg.max_iters, rows)


# --- phantoms ----------------------------------------------------------------

PHANTOMS = ("checkerboard", "piecewise_constant", "piecewise_affine", "piecewise_smooth")


def _coords(n1, n2):
    x = (np.arange(n1)[:, None] + 0.5) / n1
    y = (np.arange(n2)[None, :] + 0.5) / n2
    return np.broadcast_to(x, (n1, n2)), np.broadcast_to(y, (n1, n2))


def make_phantom(kind: str, n1: int, n2: int, **params) -> GridImage:
    """Deterministic synthetic test images with values in [0, 1].

    checkerboard:        ``square`` (pixels, default 8), ``levels`` (default (0, 1))
    piecewise_constant:  flat shapes (rectangle, disk, triangle) on a flat background
    piecewise_affine:    linear ramps separated by jumps
    piecewise_smooth:    quadratic and linear patches separated by jumps

    Checkerboards accept any size >= 2; the other kinds need at least 16x16.
    """
    if kind not in PHANTOMS:
        raise ValueError(f"unknown phantom {kind!r}; choose from {', '.join(PHANTOMS)}")
    if kind == "checkerboard":
        square = int(params.pop("square", 8))
        lo, hi = params.pop("levels", (0.0, 1.0))
        _no_extra(params)
        if square < 1 or n1 < 2 or n2 < 2:
            raise ValueError("checkerboard needs square >= 1 and dims >= 2")
        i, j = np.arange(n1)[:, None], np.arange(n2)[None, :]
        img = np.where(((i // square) + (j // square)) % 2 == 0, lo, hi).astype(float)
        return GridImage.from_array(GridKind.CENTER, img)
    _no_extra(params)
    if n1 < 16 or n2 < 16:
        raise ValueError(f"{kind} phantom needs dims >= 16, got {n1}x{n2}")
    x, y = _coords(n1, n2)
    disk = (x - 0.62) ** 2 + (y - 0.38) ** 2 < 0.2**2
    rect = (x > 0.15) & (x < 0.45) & (y > 0.55) & (y < 0.9)
    tri = (y < 0.35) & (x > 0.15) & (y > 0.05) & (x - 0.15 < 0.9 * (y - 0.05) + 0.05) & (x > 0.2)
    if kind == "piecewise_constant":
        img = np.full((n1, n2), 0.2)
        img[rect] = 0.8
        img[disk] = 0.55
        img[tri] = 0.95
    elif kind == "piecewise_affine":
        img = 0.1 + 0.7 * x
        img = np.where(disk, 0.95 - 0.8 * (y - 0.18), img)
        img = np.where(rect, 0.15 + 0.6 * (x - 0.15) + 0.6 * (y - 0.55), img)
    else:
        img = 0.2 + 0.6 * (x - 0.5) ** 2 + 0.5 * y * (1 - y)
        img = np.where(disk, 0.9 - 1.5 * ((x - 0.62) ** 2 + (y - 0.38) ** 2), img)
        img = np.where(rect, 0.1 + 0.8 * (y - 0.55), img)
    return GridImage.from_array(GridKind.CENTER, np.clip(img, 0.0, 1.0))


def _no_extra(params):
    if params:
        raise ValueError(f"unexpected phantom parameters: {', '.join(sorted(params))}")
