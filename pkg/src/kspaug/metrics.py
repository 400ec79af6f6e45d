"""Image-quality metrics and the statistical noise validator.

SSIM follows the convention common in the accelerated-MRI literature:
7x7 uniform window, k1 = 0.01, k2 = 0.03, caller-supplied data range
(typically the maximum of the reference volume).  All metrics are
deterministic; the validator's statistical thresholds are meant to be
evaluated on seeded fixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.ndimage import uniform_filter

from .grid import ShapeError

__all__ = [
    "ssim",
    "psnr",
    "nmse",
    "NoiseReport",
    "validate_noise",
    "CovarianceReport",
    "cross_coil_covariance",
]

_WIN = 7
_K1 = 0.01
_K2 = 0.03


def _check_pair(x: np.ndarray, ref: np.ndarray):
    x = np.asarray(x, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if x.shape != ref.shape:
        raise ShapeError(f"shape mismatch: {x.shape} vs {ref.shape}")
    return x, ref


def ssim(x: np.ndarray, ref: np.ndarray, data_range: float) -> float:
    """Mean local structural similarity over all fully-valid 7x7 windows."""
    x, ref = _check_pair(x, ref)
    if data_range <= 0:
        raise ValueError("data_range must be positive")
    c1 = (_K1 * data_range) ** 2
    c2 = (_K2 * data_range) ** 2
    n = _WIN * _WIN
    cov_norm = n / (n - 1)

    ux = uniform_filter(x, _WIN)
    uy = uniform_filter(ref, _WIN)
    uxx = uniform_filter(x * x, _WIN)
    uyy = uniform_filter(ref * ref, _WIN)
    uxy = uniform_filter(x * ref, _WIN)
    vx = cov_norm * (uxx - ux * ux)
    vy = cov_norm * (uyy - uy * uy)
    vxy = cov_norm * (uxy - ux * uy)

    ssim_map = ((2 * ux * uy + c1) * (2 * vxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
    pad = _WIN // 2
    return float(np.mean(ssim_map[pad:-pad, pad:-pad]))


def psnr(x: np.ndarray, ref: np.ndarray, data_range: float) -> float:
    """Peak signal-to-noise ratio in dB; identical inputs give +inf."""
    x, ref = _check_pair(x, ref)
    if data_range <= 0:
        raise ValueError("data_range must be positive")
    mse = float(np.mean((x - ref) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(data_range * data_range / mse)


def nmse(x: np.ndarray, ref: np.ndarray) -> float:
    """Squared error normalized by the reference energy."""
    x, ref = _check_pair(x, ref)
    denom = float(np.sum(ref * ref))
    if denom == 0.0:
        raise ValueError("reference is identically zero")
    return float(np.sum((x - ref) ** 2) / denom)


@dataclass
class NoiseReport:
    """Moments and Gaussianity diagnostics of a complex sample set."""

    n: int
    mean: complex
    var_real: float
    var_imag: float
    corr: float
    ks_stat: float
    ks_p: float
    checks: dict = field(default_factory=dict)
    passed: bool = False

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mean_real": self.mean.real,
            "mean_imag": self.mean.imag,
            "var_real": self.var_real,
            "var_imag": self.var_imag,
            "corr": self.corr,
            "ks_stat": self.ks_stat,
            "ks_p": self.ks_p,
            "checks": dict(self.checks),
            "passed": self.passed,
        }


def validate_noise(samples, min_samples: int = 10_000) -> NoiseReport:
    """Test whether complex samples look like i.i.d. complex Gaussian noise.

    Pass requires: mean indistinguishable from zero (within six standard
    errors), real/imaginary variances within 5% of each other, real-imag
    correlation below 0.02 in magnitude, and a KS p-value of at least
    0.01 against the fitted normal law.
    """
    z = np.asarray(samples).ravel().astype(np.complex128)
    n = z.size
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {n}")
    re = z.real
    im = z.imag
    mean = complex(z.mean())
    var_r = float(re.var())
    var_i = float(im.var())
    sigma = math.sqrt((var_r + var_i) / 2.0)

    if var_r > 0 and var_i > 0:
        corr = float(np.corrcoef(re, im)[0, 1])
    else:
        corr = math.nan
    std_r = math.sqrt(var_r) if var_r > 0 else 1.0
    std_i = math.sqrt(var_i) if var_i > 0 else 1.0
    pooled = np.concatenate([(re - re.mean()) / std_r, (im - im.mean()) / std_i])
    ks = stats.kstest(pooled, "norm")

    var_hi = max(var_r, var_i)
    var_lo = min(var_r, var_i)
    checks = {
        "mean": bool(abs(mean) <= 6.0 * sigma / math.sqrt(n)) if sigma > 0 else abs(mean) == 0.0,
        "variance_symmetry": bool(var_lo > 0 and var_hi / var_lo <= 1.05),
        "correlation": bool(math.isfinite(corr) and abs(corr) < 0.02),
        "gaussianity": bool(ks.pvalue >= 0.01),
    }
    return NoiseReport(
        n=n,
        mean=mean,
        var_real=var_r,
        var_imag=var_i,
        corr=corr,
        ks_stat=float(ks.statistic),
        ks_p=float(ks.pvalue),
        checks=checks,
        passed=all(checks.values()),
    )


@dataclass
class CovarianceReport:
    """Empirical cross-coil covariance of per-pixel noise samples."""

    cov: np.ndarray  # (N, N) complex
    stderr: np.ndarray  # (N, N) float, standard error of each entry
    n: int

    def max_offdiag_score(self) -> float:
        """Largest |covariance| / stderr over coil pairs i != j."""
        n_coils = self.cov.shape[0]
        if n_coils < 2:
            return 0.0
        mask = ~np.eye(n_coils, dtype=bool)
        return float(np.max(np.abs(self.cov[mask]) / self.stderr[mask]))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "cov_real": self.cov.real.tolist(),
            "cov_imag": self.cov.imag.tolist(),
            "stderr": self.stderr.tolist(),
            "max_offdiag_score": self.max_offdiag_score(),
        }


def cross_coil_covariance(noise_stacks, min_samples: int = 10_000) -> CovarianceReport:
    """Covariance E[z_i conj(z_j)] across coils, estimated over pixels.

    ``noise_stacks`` is one (coils, H, W) array or an iterable of them
    sharing the coil count; all pixels are pooled as samples.
    """
    stacks = [np.asarray(noise_stacks)] if np.asarray(noise_stacks).ndim == 3 else [
        np.asarray(s) for s in noise_stacks
    ]
    n_coils = stacks[0].shape[0]
    x = np.concatenate([s.reshape(n_coils, -1) for s in stacks], axis=1).astype(np.complex128)
    n = x.shape[1]
    if n < min_samples:
        raise ValueError(f"need at least {min_samples} samples per coil pair, got {n}")
    xc = x - x.mean(axis=1, keepdims=True)
    cov = (xc @ xc.conj().T) / n
    stderr = np.empty((n_coils, n_coils))
    for i in range(n_coils):
        for j in range(n_coils):
            prod = xc[i] * np.conj(xc[j])
            stderr[i, j] = math.sqrt((prod.real.var() + prod.imag.var()) / n)
    return CovarianceReport(cov=cov, stderr=stderr, n=n)
