"""Pick-freeze Monte Carlo estimators of total Sobol' indices and mean dimension.

All estimators draw pairs (x, z) of independent uniform points from a single
Philox stream, so results depend only on ``(n, seed)``.  Standard errors come
from the delete-one jackknife, computed in closed form from running sums.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import quadrature as qd
from .errors import ConstantFunction
from .integrands import Integrand
from .subsets import Subset

MIN_SAMPLES = 64
PILOT = 256


@dataclass(frozen=True)
class SobolEstimate:
    tau2: np.ndarray
    tau2_se: np.ndarray
    sigma2: float
    sigma2_se: float
    mean_dimension: float
    mean_dimension_se: float
    n: int
    seed: int

    def to_json(self) -> dict:
        return {
            "tau2": self.tau2.tolist(),
            "sigma2": self.sigma2,
            "mean_dimension": self.mean_dimension,
            "se": {
                "tau2": self.tau2_se.tolist(),
                "sigma2": self.sigma2_se,
                "mean_dimension": self.mean_dimension_se,
            },
            "n": self.n,
            "seed": self.seed,
        }


def _pairs(d: int, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if n < MIN_SAMPLES:
        raise ValueError(f"need n >= {MIN_SAMPLES} samples")
    pts = qd.generator(seed).random((n, 2 * d))
    return pts[:, :d], pts[:, d:]


def _jackknife_se(loo: np.ndarray) -> np.ndarray:
    """Jackknife standard error from leave-one-out estimates along axis 0."""
    n = loo.shape[0]
    dev = loo - loo.mean(axis=0)
    return np.sqrt((n - 1) / n * np.sum(dev * dev, axis=0))


def _pooled_variance_loo(fx: np.ndarray, fz: np.ndarray):
    """Pooled sample variance of f(x) and f(z) and its leave-one-pair-out values."""
    n = len(fx)
    shift = 0.5 * (fx.mean() + fz.mean())
    a, b = fx - shift, fz - shift
    s1 = a.sum() + b.sum()
    s2 = (a * a).sum() + (b * b).sum()
    m = 2 * n
    full = (s2 - s1 * s1 / m) / (m - 1)
    l1 = s1 - a - b
    l2 = s2 - a * a - b * b
    loo = (l2 - l1 * l1 / (m - 2)) / (m - 3)
    return float(full), loo


def total_index_estimates(f: Integrand, n: int = 2**14, seed: int = 0) -> SobolEstimate:
    """Jansen estimates tau2_j = E[(f(x) - f(x with x_j from z))^2] / 2 for every j."""
    d = f.d
    x, z = _pairs(d, n, seed)
    fx = qd.evaluate(f, x)
    fz = qd.evaluate(f, z)
    terms = np.empty((n, d))
    for j in range(d):
        y = x.copy()
        y[:, j] = z[:, j]
        diff = fx - qd.evaluate(f, y)
        terms[:, j] = 0.5 * diff * diff
    tau2 = terms.mean(axis=0)
    tau2_loo = (terms.sum(axis=0) - terms) / (n - 1)
    tau2_se = _jackknife_se(tau2_loo)

    sigma2, sigma2_loo = _pooled_variance_loo(fx, fz)
    sigma2_se = float(_jackknife_se(sigma2_loo[:, None])[0])
    if sigma2 > 0:
        with np.errstate(divide="ignore", invalid="ignore"):
            md_loo = tau2_loo.sum(axis=1) / sigma2_loo
        md = float(tau2.sum() / sigma2)
        md_se = float(_jackknife_se(md_loo[:, None])[0])
    else:
        md, md_se = math.nan, math.nan
    return SobolEstimate(tau2, tau2_se, sigma2, sigma2_se, md, md_se, n, seed)


def mean_dimension_mc(f: Integrand, n: int = 2**14, seed: int = 0) -> tuple[float, float]:
    """Mean dimension sum_j tau2_j / sigma2 with its jackknife standard error."""
    est = total_index_estimates(f, n, seed)
    if not est.sigma2 > 3 * est.sigma2_se:
        raise ConstantFunction(f"variance estimate {est.sigma2:.3e} is within noise ({est.sigma2_se:.1e})")
    return est.mean_dimension, est.mean_dimension_se


def closed_variance_pickfreeze(f: Integrand, u: Subset, n: int = 2**14, seed: int = 0) -> tuple[float, float]:
    """Closed variance sum_{v ⊆ u} sigma^2_v as mean of (f(x) - c)(f(x_u : z_{-u}) - f(z)).

    The centring constant c comes from an independent pilot sample, so the
    estimate stays unbiased; it may be negative and is not clamped.
    """
    d = f.d
    x, z = _pairs(d, n, seed)
    c = float(qd.evaluate(f, qd.generator(seed, stream=1).random((PILOT, d))).mean())
    keep = ((u.bits >> np.arange(d)) & 1).astype(bool)
    terms = (qd.evaluate(f, x) - c) * (qd.evaluate(f, np.where(keep, x, z)) - qd.evaluate(f, z))
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(n))
