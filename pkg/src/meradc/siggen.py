"""Seeded test-signal generators and their exact output-code distributions.

Loading convention: the full-scale half-range is ``A = 2**(N-1) * delta``
and signals are centered at ``c = (2**(N-1) - 0.5) * delta``, which is the
boundary between the two middle codes, so code histograms are symmetric.
A Gaussian component with peak-to-RMS ratio ``r`` dB has standard
deviation ``A / 10**(r/20)``. Samples outside the input range are clipped
to its edges (a saturating front end), so the tails land on codes 0 and
``2**N - 1``.

Random numbers come from ``numpy.random.Generator(PCG64(seed))``. For the
mixture the component index for every sample is drawn first (one
``Generator.choice`` call), then one ``standard_normal`` vector, which keeps
output bit-exact for a given numpy version and seed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtr

from .errors import UnsupportedKind
from .pmf import Pmf
from .sarsim import AdcConfig

KINDS = ("uniform", "gaussian", "gaussian_mixture", "from_pmf_file")


@dataclass(frozen=True)
class SignalSpec:
    kind: str
    par_db: tuple[float, ...] = ()
    weights: tuple[float, ...] = ()
    seed: int = 0
    pmf: Pmf | None = None  # only for kind == "from_pmf_file"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        object.__setattr__(self, "par_db", tuple(float(r) for r in np.atleast_1d(self.par_db)))
        weights = tuple(float(w) for w in np.atleast_1d(self.weights)) if self.weights else ()
        if self.kind == "gaussian":
            if len(self.par_db) != 1:
                raise ValueError("gaussian needs exactly one par_db")
            weights = (1.0,)
        elif self.kind == "gaussian_mixture":
            if not self.par_db or len(weights) != len(self.par_db):
                raise ValueError("mixture needs one weight per par_db")
        if self.kind in ("gaussian", "gaussian_mixture"):
            if any(r <= 0 for r in self.par_db):
                raise ValueError("par_db must be positive")
            if any(w < 0 for w in weights) or abs(sum(weights) - 1.0) > 1e-9:
                raise ValueError(f"weights must be non-negative and sum to 1, got {weights}")
        if self.kind == "from_pmf_file" and self.pmf is None:
            raise ValueError("from_pmf_file needs a pmf")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def gaussian(cls, par_db: float, seed: int = 0) -> "SignalSpec":
        return cls("gaussian", (par_db,), seed=seed)

    @classmethod
    def mixture(cls, par_db: Sequence[float], weights: Sequence[float], seed: int = 0) -> "SignalSpec":
        return cls("gaussian_mixture", tuple(par_db), tuple(weights), seed=seed)


# Reference mixture: 10 dB with probability 0.1, 30 dB with probability 0.9.
MIXTURE_PAR_DB = (10.0, 30.0)
MIXTURE_WEIGHTS = (0.1, 0.9)


def full_scale(cfg: AdcConfig) -> float:
    return (1 << (cfg.bits - 1)) * cfg.delta


def mid_scale(cfg: AdcConfig) -> float:
    return ((1 << (cfg.bits - 1)) - 0.5) * cfg.delta


def sigma_for_par(par_db: float, cfg: AdcConfig) -> float:
    return full_scale(cfg) / 10 ** (par_db / 20)


def clip_to_range(xs: np.ndarray, cfg: AdcConfig) -> np.ndarray:
    hi = np.nextafter(cfg.x_max, -np.inf)
    return np.clip(xs, cfg.x_min, hi)


def generate(spec: SignalSpec, n_samples: int, cfg: AdcConfig) -> np.ndarray:
    """Draw ``n_samples`` analog inputs, already clipped to the input range."""
    if n_samples < 0:
        raise ValueError("n_samples must be >= 0")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "uniform":
        xs = rng.uniform(cfg.x_min, cfg.x_max, n_samples)
    elif spec.kind == "from_pmf_file":
        if spec.pmf.bits != cfg.bits:
            raise ValueError("pmf bits do not match config")
        codes = rng.choice(cfg.n_codes, size=n_samples, p=spec.pmf.probs)
        xs = cfg.delta * (codes + rng.uniform(-0.5, 0.5, n_samples))
    else:
        sigmas = np.array([sigma_for_par(r, cfg) for r in spec.par_db])
        if len(sigmas) == 1:
            comp = np.zeros(n_samples, dtype=np.int64)
        else:
            comp = rng.choice(len(sigmas), size=n_samples, p=np.array(spec.weights))
        xs = mid_scale(cfg) + sigmas[comp] * rng.standard_normal(n_samples)
    return clip_to_range(xs, cfg)


def gaussian_code_pmf(sigma: float, cfg: AdcConfig) -> np.ndarray:
    """Code probabilities of a clipped Gaussian centered at mid-scale."""
    half = cfg.n_codes // 2
    # Lower-half cell edges measured in cells from the center; the upper half
    # is the mirror image. Working below the center keeps tail CDFs small.
    offsets = np.arange(-half + 1, 1, dtype=np.float64) * cfg.delta
    if sigma == 0:
        cdf = 0.5 * (offsets == 0)
    else:
        cdf = ndtr(offsets / sigma)
    lower = np.diff(np.concatenate(([0.0], cdf)))
    return np.concatenate((lower, lower[::-1]))


def exact_pmf(spec: SignalSpec, cfg: AdcConfig) -> Pmf:
    """Exact output-code distribution of ``generate(spec, ...)``."""
    if spec.kind == "uniform":
        return Pmf.uniform(cfg.bits)
    if spec.kind == "from_pmf_file":
        raise UnsupportedKind("file-based signals have no analytic pmf; use the file pmf itself")
    probs = np.zeros(cfg.n_codes)
    for r, w in zip(spec.par_db, spec.weights):
        probs += w * gaussian_code_pmf(sigma_for_par(r, cfg), cfg)
    return Pmf.from_weights(probs, cfg.bits)
