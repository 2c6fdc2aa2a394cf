"""Model specifications and a single entry point to run any denoising model."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from . import solver
from .grid import GridImage
from .solver import TGV_STEP, TV_SIGMA, TV_TAU, PdConfig

TV_MODELS = ("tv", "tv-central", "tv-condat")
TGV_MODELS = ("tgv", "tgv-new")
MODELS = TV_MODELS + TGV_MODELS

DEFAULT_ITERS = 500
DEFAULT_ITERS_COLOR = 1500
DEFAULT_VALUE_ITERS = 1000


@dataclass(frozen=True)
class ModelSpec:
    """Which regularizer to use and with which parameters.

    TV-family models take ``lam``; TGV-family models take ``alpha1`` and
    either an explicit ``alpha0`` or ``alpha0 = alpha_ratio * alpha1``.
    ``iters=None`` picks 500 iterations for grayscale and 1500 for colour.
    ``sigma``/``tau`` default to 0.99/3, 0.99/8 (TV family) or 5/37 (TGV family).
    """

    model: str
    lam: float | None = None
    alpha0: float | None = None
    alpha1: float | None = None
    alpha_ratio: float = 2.0
    iters: int | None = None
    sigma: float | None = None
    tau: float | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if self.model in TV_MODELS:
            if self.lam is None or self.alpha0 is not None or self.alpha1 is not None:
                raise ValueError(f"{self.model} takes lambda only")
            if not self.lam > 0:
                raise ValueError(f"lambda must be positive, got {self.lam}")
        else:
            if self.lam is not None or self.alpha1 is None:
                raise ValueError(f"{self.model} takes alpha1 (and optionally alpha0), not lambda")
            if self.alpha0 is None:
                if not self.alpha_ratio > 0:
                    raise ValueError(f"alpha ratio must be positive, got {self.alpha_ratio}")
                object.__setattr__(self, "alpha0", self.alpha_ratio * self.alpha1)
            if not (self.alpha0 > 0 and self.alpha1 > 0):
                raise ValueError(f"alphas must be positive, got ({self.alpha0}, {self.alpha1})")
        if self.iters is not None and self.iters < 1:
            raise ValueError(f"iters must be at least 1, got {self.iters}")
        for name in ("sigma", "tau"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive, got {val}")

    @property
    def is_tgv(self) -> bool:
        return self.model in TGV_MODELS

    @property
    def parameter(self) -> float:
        """The swept parameter: lambda or alpha1."""
        return self.alpha1 if self.is_tgv else self.lam

    def with_parameter(self, value: float) -> "ModelSpec":
        """Copy with lambda (or alpha1, keeping alpha0 = ratio * alpha1) set to ``value``."""
        if self.is_tgv:
            return replace(self, alpha1=value, alpha0=None)
        return replace(self, lam=value)

    def config(self, channels: int = 1) -> PdConfig:
        iters = self.iters or (DEFAULT_ITERS if channels == 1 else DEFAULT_ITERS_COLOR)
        if self.is_tgv:
            sigma, tau = TGV_STEP, TGV_STEP
        else:
            sigma, tau = TV_SIGMA, TV_TAU
        return PdConfig(sigma=self.sigma or sigma, tau=self.tau or tau, max_iters=iters)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        return cls(**d)


def run_model(f: GridImage, spec: ModelSpec, callback=None):
    """Denoise ``f`` with the model in ``spec``; returns (u, SolveReport)."""
    cfg = spec.config(f.channels)
    if spec.model == "tv":
        return solver.denoise_tv(f, spec.lam, cfg, callback)
    if spec.model == "tv-central":
        return solver.denoise_tv_central(f, spec.lam, cfg, callback)
    if spec.model == "tv-condat":
        return solver.denoise_condat(f, spec.lam, cfg, callback)
    if spec.model == "tgv":
        return solver.denoise_tgv(f, spec.alpha0, spec.alpha1, cfg, callback)
    return solver.denoise_tgv_new(f, spec.alpha0, spec.alpha1, cfg, callback)
