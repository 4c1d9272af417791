"""Integration rules on [0,1]^d: tensor Gauss-Legendre, midpoint, MC and randomized Halton."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import CapExceeded, EvaluationError

TENSOR_CAP = 10**7
GRID_CAP = 2**24
CHUNK = 1 << 16


@dataclass(frozen=True)
class GaussTensor:
    n: int = 16


@dataclass(frozen=True)
class Midpoint:
    n: int = 1024


@dataclass(frozen=True)
class MonteCarlo:
    n: int = 2**14
    replicates: int = 16
    seed: int = 0


@dataclass(frozen=True)
class RandomizedHalton:
    n: int = 2**14
    replicates: int = 16
    seed: int = 0


QuadSpec = GaussTensor | Midpoint | MonteCarlo | RandomizedHalton


def is_randomized(spec) -> bool:
    return isinstance(spec, (MonteCarlo, RandomizedHalton))


def default_spec(d: int):
    if d <= 6:
        return GaussTensor(16)
    return RandomizedHalton(2**14, 16, 0)


@dataclass(frozen=True)
class Estimate:
    value: float
    std_error: float | None
    n_evals: int


# ---------------------------------------------------------------------- 1-D rules
def _legendre_pair(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P_{n-1}(x), P_n(x)) by the three-term recurrence."""
    p0, p1 = np.ones_like(x), x.copy()
    for m in range(2, n + 1):
        p0, p1 = p1, ((2 * m - 1) * x * p1 - (m - 1) * p0) / m
    return p0, p1


@lru_cache(maxsize=64)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1] by Newton iteration on P_n."""
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))
    for _ in range(100):
        p0, p1 = _legendre_pair(n, x)
        step = p1 / (n * (x * p1 - p0) / (x * x - 1))
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    p0, p1 = _legendre_pair(n, x)
    dp = n * (x * p1 - p0) / (x * x - 1)
    w = 2.0 / ((1 - x * x) * dp * dp)
    order = np.argsort(x)
    return x[order], w[order]


def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights mapped to [0, 1]; weights sum to 1."""
    if n < 1:
        raise ValueError("need at least one node")
    x, w = _gauss_legendre(int(n))
    return (x + 1) / 2, w / 2


def midpoint_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n < 1:
        raise ValueError("need at least one node")
    return (np.arange(n) + 0.5) / n, np.full(n, 1.0 / n)


def axis_rule(spec, interval=(0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """The 1-D factor of a deterministic tensor spec, mapped to ``interval``."""
    if isinstance(spec, GaussTensor):
        x, w = gauss_legendre_01(spec.n)
    elif isinstance(spec, Midpoint):
        x, w = midpoint_01(spec.n)
    else:
        raise TypeError(f"{type(spec).__name__} is not a tensor rule")
    a, b = interval
    return a + (b - a) * x, (b - a) * w


def tensor_rule(d: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """All n**d tensor Gauss-Legendre nodes with their product weights."""
    if n**d > TENSOR_CAP:
        raise CapExceeded(f"tensor rule with {n}**{d} nodes exceeds {TENSOR_CAP}")
    x, w = gauss_legendre_01(n)
    grids = np.meshgrid(*([x] * d), indexing="ij")
    wgrids = np.meshgrid(*([w] * d), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return nodes, weights


# ---------------------------------------------------------------------- point sets
def first_primes(k: int) -> np.ndarray:
    limit = max(16, int(k * (math.log(k + 2) + math.log(math.log(k + 3)) + 2)))
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    primes = np.flatnonzero(sieve)
    if len(primes) < k:
        return first_primes(2 * k)
    return primes[:k]


def radical_inverse(index: np.ndarray, base: int) -> np.ndarray:
    i = np.asarray(index, dtype=np.int64).copy()
    out = np.zeros(i.shape)
    scale = 1.0 / base
    while np.any(i > 0):
        out += (i % base) * scale
        i //= base
        scale /= base
    return out


def halton(n: int, d: int, start: int = 1) -> np.ndarray:
    """First n Halton points (indices start, start+1, ...) in bases of the first d primes."""
    idx = np.arange(start, start + n)
    return np.stack([radical_inverse(idx, int(p)) for p in first_primes(d)], axis=1)


def low_discrepancy_points(d: int, n: int, kind: str = "halton", seed: int | None = None,
                           shift: np.ndarray | None = None) -> np.ndarray:
    """Halton points, optionally moved by a uniform random shift modulo 1.

    ``kind`` is ``"halton"`` or ``"shifted_halton"``; an explicit ``shift`` vector
    overrides the seeded one.
    """
    if d > 64:
        raise ValueError("low-discrepancy points support d <= 64")
    pts = halton(n, d)
    if kind == "halton" and shift is None:
        return pts
    if shift is None:
        shift = generator(seed or 0).random(d)
    return np.mod(pts + np.asarray(shift, dtype=np.float64), 1.0)


def generator(seed: int, stream: int | None = None) -> np.random.Generator:
    """Counter-based Philox stream; ``stream`` selects a child of the seed."""
    ss = np.random.SeedSequence(seed)
    if stream is not None:
        ss = ss.spawn(stream + 1)[stream]
    return np.random.Generator(np.random.Philox(ss))


def replicate_generators(seed: int, replicates: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(replicates)]


def replicate_points(spec, dim: int) -> list[np.ndarray]:
    """One point set per replicate for a randomized spec."""
    gens = replicate_generators(spec.seed, spec.replicates)
    if isinstance(spec, MonteCarlo):
        return [g.random((spec.n, dim)) for g in gens]
    base = halton(spec.n, dim)
    return [np.mod(base + g.random(dim), 1.0) for g in gens]


# ---------------------------------------------------------------------- integration
def evaluate(f: Callable, x: np.ndarray) -> np.ndarray:
    """Evaluate a vectorised integrand in chunks, rejecting non-finite values."""
    out = np.empty(len(x))
    for lo in range(0, len(x), CHUNK):
        chunk = x[lo:lo + CHUNK]
        vals = np.asarray(f(chunk), dtype=np.float64).reshape(len(chunk))
        bad = ~np.isfinite(vals)
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise EvaluationError(f"integrand returned {vals[i]} at {chunk[i].tolist()}", chunk[i])
        out[lo:lo + len(chunk)] = vals
    return out


def grid_values(f: Callable, d: int, spec, interval=(0.0, 1.0)) -> tuple[np.ndarray, np.ndarray]:
    """f on the full tensor grid, shaped (n,)*d, with the 1-D weights."""
    x, w = axis_rule(spec, interval)
    n = len(x)
    total = n**d
    if total > GRID_CAP:
        raise CapExceeded(f"tensor grid with {n}**{d} nodes exceeds {GRID_CAP}")
    out = np.empty(total)
    for lo in range(0, total, CHUNK):
        idx = np.arange(lo, min(total, lo + CHUNK))
        digits = np.stack(np.unravel_index(idx, (n,) * d), axis=1)
        out[lo:lo + len(idx)] = evaluate(f, x[digits])
    return out.reshape((n,) * d), w


def contract(values: np.ndarray, w: np.ndarray, axes) -> np.ndarray:
    """Integrate the tensor ``values`` over ``axes`` with 1-D weights ``w``."""
    out = values
    for ax in sorted(axes, reverse=True):
        out = np.tensordot(out, w, axes=([ax], [0]))
    return out


def integrate(f: Callable, d: int, spec=None) -> Estimate:
    """Integral of a vectorised f over [0,1]^d."""
    spec = spec or default_spec(d)
    if is_randomized(spec):
        reps = np.array([evaluate(f, p).mean() for p in replicate_points(spec, d)])
        se = float(reps.std(ddof=1) / math.sqrt(len(reps))) if len(reps) > 1 else float("nan")
        return Estimate(float(reps.mean()), se, spec.n * spec.replicates)
    grid, w = grid_values(f, d, spec)
    return Estimate(float(contract(grid, w, range(d))), None, grid.size)


def integrate_interval(g: Callable, interval, spec) -> float:
    x, w = axis_rule(spec, interval)
    vals = evaluate(lambda t: g(t[:, 0]), x[:, None])
    return float(vals @ w)


def mc_qmc_rmse(f, d: int, n: int = 1024, replicates: int = 16, seed: int = 0,
                true_mean: float | None = None) -> tuple[float, float]:
    """RMS errors of plain MC and random-shift Halton over independent replicates."""
    if true_mean is None:
        known = getattr(f, "known", {}) or {}
        true_mean = known.get("mean")
    if true_mean is None:
        ref = integrate(f, d, MonteCarlo(100 * n, replicates, seed + 1))
        true_mean = ref.value
    mc = replicate_points(MonteCarlo(n, replicates, seed), d)
    qmc = replicate_points(RandomizedHalton(n, replicates, seed), d)
    err_mc = np.array([evaluate(f, p).mean() - true_mean for p in mc])
    err_qmc = np.array([evaluate(f, p).mean() - true_mean for p in qmc])
    return float(np.sqrt(np.mean(err_mc**2))), float(np.sqrt(np.mean(err_qmc**2)))
