"""Command line interface: ``stagtgv <command> ...``.

Exit codes: 0 success, 1 runtime failure (I/O, unreadable image, solver
error), 2 usage error (bad flags or invalid parameter values). Errors are
reported on stderr as one JSON object: {"error": ..., "message": ...}.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .analysis import PHANTOMS, SSIM_K1, SSIM_K2, SSIM_WINDOW, invariance_report, make_phantom, metrics, sweep
from .functionals import tv_iso
from .grid import GridError
from .io import (
    NOISE_GENERATOR,
    ImageFormatError,
    RunReport,
    add_gaussian_noise,
    atomic_write,
    file_hash,
    load_png,
    save_png,
)
from .models import DEFAULT_VALUE_ITERS, MODELS, ModelSpec, run_model
from .solver import PdConfig, StepSizeError, tgv_value_classic, tgv_value_new


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(2)


def _emit_error(kind, message):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def _metric_dict(m):
    return None if m is None else {"psnr": m.psnr, "ssim": m.ssim}


def _settings():
    return {
        "ssim": {"window": SSIM_WINDOW, "k1": SSIM_K1, "k2": SSIM_K2, "data_range": 1.0},
        "psnr_peak": 1.0,
        "noise_generator": NOISE_GENERATOR,
        "initialization": "u = f, auxiliary and dual variables zero",
    }


def _model_spec(args, model=None) -> ModelSpec:
    model = model or args.model
    try:
        if model in ("tgv", "tgv-new"):
            if args.lam is not None:
                raise UsageError(f"{model} takes --alpha1/--alpha0, not --lambda")
            if args.alpha1 is None:
                raise UsageError(f"{model} needs --alpha1")
            return ModelSpec(
                model, alpha0=args.alpha0, alpha1=args.alpha1, alpha_ratio=args.alpha_ratio,
                iters=args.iters, sigma=args.sigma, tau=args.tau, seed=getattr(args, "seed", None),
            )
        if args.alpha0 is not None or args.alpha1 is not None:
            raise UsageError(f"{model} takes --lambda, not --alpha0/--alpha1")
        if args.lam is None:
            raise UsageError(f"{model} needs --lambda")
        return ModelSpec(model, lam=args.lam, iters=args.iters, sigma=args.sigma, tau=args.tau,
                         seed=getattr(args, "seed", None))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _noise(args, clean):
    if args.noise_sigma is None:
        return clean, None
    if args.noise_sigma < 0:
        raise UsageError("--noise-sigma must be nonnegative")
    noisy = add_gaussian_noise(clean, args.noise_sigma, args.seed)
    return noisy, {"sigma": args.noise_sigma, "seed": args.seed, "generator": NOISE_GENERATOR}


def _input_image(args):
    if getattr(args, "phantom", None):
        n1, n2 = args.size
        try:
            return make_phantom(args.phantom, n1, n2), f"phantom:{args.phantom}:{n1}x{n2}"
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    if not args.input:
        raise UsageError("an --input image (or --phantom) is required")
    return load_png(args.input), file_hash(args.input)


# --- commands ------------------------------------------------------------------

def cmd_denoise(args):
    spec = _model_spec(args)
    clean, in_hash = _input_image(args)
    f, noise = _noise(args, clean)
    ref = load_png(args.reference) if args.reference else (clean if noise else None)
    t0 = time.perf_counter()
    u, rep = run_model(f, spec)
    wall = time.perf_counter() - t0
    save_png(u, args.output, args.bit_depth)
    report = RunReport(
        command="denoise",
        input_hash=in_hash,
        model=spec.to_dict(),
        noise=noise,
        metrics=_metric_dict(metrics(u, ref)) if ref is not None else None,
        energies={"final": rep.energy, "trace": rep.trace, "iterations": rep.iterations},
        wall_time=wall,
        settings=dict(_settings(), sigma=spec.config(f.channels).sigma, tau=spec.config(f.channels).tau,
                      iterations=spec.config(f.channels).max_iters, bit_depth=args.bit_depth,
                      output_hash=file_hash(args.output)),
    )
    if rep.residuals is not None:
        report.energies["constraint_residuals"] = list(rep.residuals)
    if args.tgv_values:
        a0, a1 = (spec.alpha0, spec.alpha1) if spec.is_tgv else (0.14, 0.07)
        report.tgv_values = _values(u, a0, a1, DEFAULT_VALUE_ITERS, "both")
    report.save(args.report or str(args.output) + ".json")
    return 0


def _values(u, alpha0, alpha1, iters, which):
    cfg = PdConfig.tgv(max_iters=iters)
    out = {"alpha0": alpha0, "alpha1": alpha1, "iterations": iters}
    if which in ("tgv", "both"):
        out["tgv"], _ = tgv_value_classic(u, alpha0, alpha1, cfg)
    if which in ("tgv-new", "both"):
        out["tgv-new"], _ = tgv_value_new(u, alpha0, alpha1, cfg)
    return out


def _alphas(args):
    a1 = args.alpha1
    a0 = args.alpha0 if args.alpha0 is not None else args.alpha_ratio * a1
    if not (a0 > 0 and a1 > 0):
        raise UsageError("alphas must be positive")
    return a0, a1


def cmd_tgv_value(args):
    u, in_hash = _input_image(args)
    a0, a1 = _alphas(args)
    t0 = time.perf_counter()
    vals = _values(u, a0, a1, args.iters, args.model)
    report = RunReport("tgv-value", in_hash, tgv_values=vals, wall_time=time.perf_counter() - t0,
                       settings={"sigma": 5 / 37, "tau": 5 / 37})
    print(report.to_json())
    if args.report:
        report.save(args.report)
    return 0


def cmd_rot_check(args):
    u, in_hash = _input_image(args)
    a0, a1 = _alphas(args)
    inv = invariance_report(u, a0, a1, PdConfig.tgv(max_iters=args.iters))
    if args.format == "table":
        print(inv.to_table())
    else:
        print(json.dumps(dict(inv.to_dict(), input_hash=in_hash), indent=2))
    return 0


def _parse_grid(text):
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            lo, hi, n = float(lo), float(hi), int(n)
            if lo <= 0 or hi <= 0 or n < 1:
                raise ValueError
            return list(np.geomspace(lo, hi, n))
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --grid {text!r}: use LO:HI:N (geometric) or a comma list") from None


def cmd_sweep(args):
    clean, in_hash = _input_image(args)
    f, noise = _noise(args, clean)
    ref = load_png(args.reference) if args.reference else clean
    grid = _parse_grid(args.grid)
    # placeholder parameter; every grid value replaces it (invalid ones fail per point)
    if args.model in ("tgv", "tgv-new"):
        template = _template(args, alpha1=1.0)
    else:
        template = _template(args, lam=1.0)
    t0 = time.perf_counter()
    res = sweep(f, ref, template, grid, threads=args.threads)
    out = dict(res.to_dict(), input_hash=in_hash, noise=noise, wall_time=time.perf_counter() - t0,
               settings=_settings(), version=__version__)
    text = json.dumps(out, indent=2)
    if args.output:
        atomic_write(args.output, text + "\n")
    else:
        print(text)
    return 0


def _template(args, **param):
    try:
        return ModelSpec(args.model, alpha_ratio=args.alpha_ratio, iters=args.iters, **param)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_phantom(args):
    n1, n2 = args.size
    params = {"square": args.square} if args.kind == "checkerboard" else {}
    try:
        u = make_phantom(args.kind, n1, n2, **params)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    save_png(u, args.output, args.bit_depth)
    print(json.dumps({"kind": args.kind, "size": [n1, n2], "output": args.output, "tv_iso": tv_iso(u)}))
    return 0


def cmd_metrics(args):
    a, b = load_png(args.image), load_png(args.reference)
    if a.dims != b.dims:
        raise UsageError(f"images differ in size: {a.dims} vs {b.dims}")
    m = metrics(a, b)
    print(json.dumps({"psnr": None if math.isinf(m.psnr) else m.psnr, "identical": math.isinf(m.psnr),
                      "ssim": m.ssim, "settings": _settings()["ssim"]}))
    return 0


# --- parser ----------------------------------------------------------------------

def _model_flags(p):
    p.add_argument("--lambda", dest="lam", type=float, help="TV weight (tv, tv-central, tv-condat)")
    p.add_argument("--alpha1", type=float, help="first-order TGV weight")
    p.add_argument("--alpha0", type=float, help="second-order TGV weight (default: ratio * alpha1)")
    p.add_argument("--alpha-ratio", type=float, default=2.0, help="alpha0 / alpha1 when --alpha0 is omitted")


def _source_flags(p):
    p.add_argument("--input", help="PNG image (8/16-bit, gray or RGB)")
    p.add_argument("--phantom", choices=PHANTOMS, help="use a synthetic phantom instead of --input")
    p.add_argument("--size", type=int, nargs=2, default=(64, 64), metavar=("N1", "N2"))


def _noise_flags(p):
    p.add_argument("--noise-sigma", type=float, help="add Gaussian noise of this standard deviation")
    p.add_argument("--seed", type=int, default=0, help="noise seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="stagtgv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("denoise", help="denoise an image and write PNG + JSON report")
    _source_flags(p)
    p.add_argument("--output", required=True, help="output PNG")
    p.add_argument("--model", required=True, choices=MODELS)
    _model_flags(p)
    p.add_argument("--iters", type=int, help="iterations (default 500 gray, 1500 colour)")
    p.add_argument("--sigma", type=float, help="dual step size")
    p.add_argument("--tau", type=float, help="primal step size")
    p.add_argument("--reference", help="clean PNG for PSNR/SSIM (defaults to --input when noise is added)")
    _noise_flags(p)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=8)
    p.add_argument("--report", help="JSON report path (default: OUTPUT.json)")
    p.add_argument("--tgv-values", action="store_true", help="also record both TGV values of the result")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("tgv-value", help="print the TGV value of an image")
    _source_flags(p)
    p.add_argument("--model", choices=("tgv", "tgv-new", "both"), default="tgv-new")
    p.add_argument("--alpha1", type=float, default=0.07)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha-ratio", type=float, default=2.0)
    p.add_argument("--iters", type=int, default=DEFAULT_VALUE_ITERS)
    p.add_argument("--report", help="also write the JSON report here")
    p.set_defaults(func=cmd_tgv_value)

    p = sub.add_parser("rot-check", help="compare TGV values of an image and its 90 degree rotation")
    _source_flags(p)
    p.add_argument("--alpha1", type=float, default=0.07)
    p.add_argument("--alpha0", type=float)
    p.add_argument("--alpha-ratio", type=float, default=2.0)
    p.add_argument("--iters", type=int, default=DEFAULT_VALUE_ITERS)
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_rot_check)

    p = sub.add_parser("sweep", help="PSNR-optimal parameter search over a grid")
    _source_flags(p)
    p.add_argument("--reference", help="clean PNG (defaults to the input)")
    _noise_flags(p)
    p.add_argument("--model", required=True, choices=MODELS)
    p.add_argument("--grid", required=True, help="LO:HI:N geometric grid or comma-separated values")
    p.add_argument("--alpha-ratio", type=float, default=2.0)
    p.add_argument("--iters", type=int)
    p.add_argument("--threads", type=int, help="parallel solver runs (default: $STAGTGV_THREADS or 1)")
    p.add_argument("--output", help="write the JSON result here instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("phantom", help="write a synthetic test image")
    p.add_argument("--kind", required=True, choices=PHANTOMS)
    p.add_argument("--size", type=int, nargs=2, default=(64, 64), metavar=("N1", "N2"))
    p.add_argument("--square", type=int, default=8, help="checkerboard square size")
    p.add_argument("--output", required=True)
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=16)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("metrics", help="PSNR and SSIM between two PNGs")
    p.add_argument("image")
    p.add_argument("reference")
    p.set_defaults(func=cmd_metrics)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "iters", None) is not None and args.iters < 1:
            raise UsageError("--iters must be at least 1")
        return args.func(args)
    except UsageError as exc:
        _emit_error("usage", exc)
        return 2
    except (StepSizeError, GridError) as exc:
        _emit_error("contract", exc)
        return 2
    except FileNotFoundError as exc:
        _emit_error("missing_file", f"{exc.filename}: {exc.strerror}")
        return 1
    except ImageFormatError as exc:
        _emit_error("image_format", exc)
        return 1
    except (OSError, ArithmeticError, RuntimeError, ValueError) as exc:
        _emit_error(type(exc).__name__, exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
