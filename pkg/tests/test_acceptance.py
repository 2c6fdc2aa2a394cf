"""Acceptance criteria, one test each.

Every test carries ``@pytest.mark.acceptance(n, title)``; conftest prints a
PASS/FAIL line per criterion at the end of the run.
"""

import math
import subprocess
import sys
import time

import cvxpy as cp
import numpy as np
import pytest

import _reference as ref
from operators import PAIRS
from stagtgv import ops_convert as cv
from stagtgv.analysis import make_phantom, sweep
from stagtgv.functionals import tv_iso
from stagtgv.grid import GridKind, new_image, pairing, rotate90
from stagtgv.io import add_gaussian_noise
from stagtgv.models import ModelSpec
from stagtgv.solver import (
    PdConfig,
    denoise_tgv_new,
    estimate_opnorm,
    prox_data,
    shrink,
    tgv_value_classic,
    tgv_value_new,
)

from helpers import center, matrix_of, rand_like

acceptance = pytest.mark.acceptance


def _noisy(kind, sigma, seed, **params):
    clean = make_phantom(kind, 64, 64, **params)
    return add_gaussian_noise(clean, sigma, seed), clean


def _best_psnr(f, clean, spec, grid):
    res = sweep(f, clean, spec, grid)
    return res.best.psnr


# ---------------------------------------------------------------------------

@acceptance(1, "transpose identity on 20 random instances per operator pair")
def test_transpose_suite():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = 0.0
    for pair in PAIRS:
        for _ in range(20):
            n1, n2 = int(rng.integers(3, 9)), int(rng.integers(3, 7))
            x = rand_like(pair.domain(n1, n2), rng)
            y = rand_like(pair.codomain(n1, n2), rng)
            lhs, rhs = pairing(pair.forward(x), y), pairing(x, pair.adjoint(y))
            worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12, f"worst relative error {worst:.3e}"
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


@acceptance(2, "operators equal their assembled matrices on 4x3 grids")
def test_dense_matrices():
    for pair in PAIRS:
        fwd = matrix_of(pair.forward, pair.domain(4, 3))
        adj = matrix_of(pair.adjoint, pair.codomain(4, 3))
        assert np.allclose(fwd, pair.ref_forward(4, 3), rtol=0, atol=1e-14), pair.name
        assert np.allclose(adj, pair.ref_adjoint(4, 3), rtol=0, atol=1e-14), pair.name


@acceptance(3, "TV of the 2x2 delta is sqrt(2), of its rotation 2")
def test_tv_delta():
    u = center([[1.0, 0.0], [0.0, 0.0]])
    assert abs(tv_iso(u) - math.sqrt(2)) <= 1e-15
    assert abs(tv_iso(rotate90(u)) - 2.0) <= 1e-15


@acceptance(4, "staggered TGV value is 90 degree invariant, classic is not")
def test_value_invariance():
    u = center(np.random.default_rng(4).random((32, 32)))
    ur = rotate90(u)
    cfg = PdConfig.tgv(max_iters=1000)
    t0 = time.perf_counter()
    a, _ = tgv_value_new(u, 0.14, 0.07, cfg)
    b, _ = tgv_value_new(ur, 0.14, 0.07, cfg)
    c, _ = tgv_value_classic(u, 0.14, 0.07, cfg)
    d, _ = tgv_value_classic(ur, 0.14, 0.07, cfg)
    elapsed = time.perf_counter() - t0
    print(f"new {a:.15g} / {b:.15g}; classic {c:.15g} / {d:.15g}")
    assert abs(a - b) / a <= 1e-10
    assert abs(c - d) / c > 1e-6
    assert elapsed < 60.0


@acceptance(5, "denoising iterates commute with rotation")
def test_iterate_equivariance():
    f = center(np.random.default_rng(5).random((64, 64)))
    marks = (1, 10, 500)

    def run(img):
        seen = {}

        def cb(state):
            if state.k in marks:
                seen[state.k] = state.z.u

        denoise_tgv_new(img, 0.14, 0.07, PdConfig.tgv(max_iters=500), cb)
        return seen

    t0 = time.perf_counter()
    plain, rotated = run(f), run(rotate90(f))
    elapsed = time.perf_counter() - t0
    scale = np.abs(f.data).max()
    for k in marks:
        diff = np.abs(rotate90(plain[k]).data - rotated[k].data).max()
        assert diff <= 1e-10 * scale, f"k={k}: {diff:.3e}"
    assert elapsed < 60.0


@acceptance(6, "TGV models beat TV by 0.5 dB on a piecewise-affine phantom")
def test_staircase_separation():
    f, clean = _noisy("piecewise_affine", 0.05, 0)
    grid = list(np.geomspace(0.01, 0.2, 10))
    tv = _best_psnr(f, clean, ModelSpec("tv", lam=1.0), grid)
    tgv = _best_psnr(f, clean, ModelSpec("tgv", alpha1=1.0), grid)
    new = _best_psnr(f, clean, ModelSpec("tgv-new", alpha1=1.0), grid)
    print(f"PSNR tv {tv:.2f}  tgv {tgv:.2f}  tgv-new {new:.2f}")
    assert new >= tv + 0.5
    assert tgv >= tv + 0.5


@acceptance(7, "staggered models hold up under heavy noise on a checkerboard")
def test_heavy_noise():
    f, clean = _noisy("checkerboard", 0.5, 1, square=8)
    grid = list(np.geomspace(0.05, 1.5, 10))
    tv = _best_psnr(f, clean, ModelSpec("tv", lam=1.0), grid)
    condat = _best_psnr(f, clean, ModelSpec("tv-condat", lam=1.0), grid)
    tgv = _best_psnr(f, clean, ModelSpec("tgv", alpha1=1.0), grid)
    new = _best_psnr(f, clean, ModelSpec("tgv-new", alpha1=1.0), grid)
    print(f"PSNR tv {tv:.2f}  condat {condat:.2f}  tgv {tgv:.2f}  tgv-new {new:.2f}")
    assert condat >= tv - 0.05
    assert new >= tgv - 0.05


@acceptance(8, "central differences lose 2 dB to forward differences")
def test_central_artifact():
    f, clean = _noisy("piecewise_constant", 0.2, 2)
    grid = list(np.geomspace(0.02, 0.6, 10))
    tv = _best_psnr(f, clean, ModelSpec("tv", lam=1.0), grid)
    central = _best_psnr(f, clean, ModelSpec("tv-central", lam=1.0), grid)
    print(f"PSNR tv {tv:.2f}  tv-central {central:.2f}")
    assert tv - central >= 2.0


@acceptance(9, "power-iteration estimate of the staggered operator norm")
def test_step_size_contract():
    f = new_image(GridKind.CENTER, 64, 64)
    t0 = time.perf_counter()
    est = estimate_opnorm(cv.apply_Lbar_star, cv.apply_Lbar, cv.zero_primal(f), iters=2000)
    elapsed = time.perf_counter() - t0
    sq = est.raw**2
    print(f"||L||^2 ~ {sq:.4f} (converged={est.converged})")
    assert sq <= 54.7
    assert (5 / 37) ** 2 * sq < 1.0
    assert elapsed < 10.0


def _value_oracle(u, a0, a1):
    """Constrained maximization of <u, div div v> written directly as a cone program."""
    n1, n2 = u.shape
    E, G, W = ref.sym_grad_new(n1, n2), ref.grad_new(n1, n2), ref.tensor_weight(n1, n2)
    v = cp.Variable(E.shape[0])
    w = -E.T @ cp.multiply(W, v)
    s = -G.T @ w
    n = n1 * n2
    t = ref.L_dot_tensor(n1, n2) @ v
    cons = [cp.norm(cp.vstack([t[:n], t[n : 2 * n], math.sqrt(2) * t[2 * n :]]), 2, axis=0) <= a0]
    for M in (ref.L_dot_vec(n1, n2), ref.L_lr(n1, n2), ref.L_ud(n1, n2)):
        q = M @ w
        m = M.shape[0] // 2
        cons.append(cp.norm(cp.vstack([q[:m], q[m:]]), 2, axis=0) <= a1)
    prob = cp.Problem(cp.Maximize(u.ravel() @ s), cons)
    prob.solve(solver=cp.CLARABEL)
    assert prob.status == cp.OPTIMAL
    return prob.value


@acceptance(10, "3x3 staggered TGV value matches a generic cone solver")
def test_value_oracle():
    u = np.random.default_rng(10).random((3, 3))
    expected = _value_oracle(u, 2.0, 1.0)
    t0 = time.perf_counter()
    got, _ = tgv_value_new(center(u), 2.0, 1.0, PdConfig.tgv(max_iters=30000))
    elapsed = time.perf_counter() - t0
    print(f"primal-dual {got:.10f}  cone program {expected:.10f}")
    assert abs(got - expected) / expected <= 1e-4
    assert elapsed < 60.0


@acceptance(11, "shrinkage and data prox match scalar formulas")
def test_prox_oracles():
    rng = np.random.default_rng(11)
    n = 100
    f = center(rng.standard_normal((n, n)))
    u = center(rng.standard_normal((n, n)))
    w = rand_like(cv.center_vec(n, n), rng)
    tau, t = 0.37, 0.8

    got = shrink(w, t)
    a, b = w.w1.data[:, :, 0], w.w2.data[:, :, 0]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            mag = math.sqrt(a[i, j] ** 2 + b[i, j] ** 2)
            k = 1.0 - t / max(mag, t)
            worst = max(worst, abs(got.w1.data[i, j, 0] - k * a[i, j]), abs(got.w2.data[i, j, 0] - k * b[i, j]))
    assert worst <= 1e-14

    p = prox_data(u, f, tau).data[:, :, 0]
    x, y = u.data[:, :, 0], f.data[:, :, 0]
    worst = max(abs(p[i, j] - (x[i, j] + tau * y[i, j]) / (1 + tau)) for i in range(n) for j in range(n))
    assert worst <= 1e-14


@acceptance(12, "seeded CLI denoise runs are byte-identical")
def test_cli_determinism(tmp_path):
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}.png"
        subprocess.run(
            [sys.executable, "-m", "stagtgv", "denoise", "--phantom", "piecewise_smooth", "--size", "64", "64",
             "--noise-sigma", "0.1", "--seed", "12", "--model", "tgv-new", "--alpha1", "0.05",
             "--output", str(out)],
            check=True, capture_output=True,
        )
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
