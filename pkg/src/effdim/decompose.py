"""ANOVA and anchored decompositions, weighted norms and Poincaré checks.

Variance components come from closed moments

    C_v = ∫ ( ∫ f(x) dx_{-v} )^2 dx_v,        C_∅ = mu^2,

followed by Möbius inversion sigma^2_u = sum_{v ⊆ u} (-1)^{|u|-|v|} C_v.
Deterministic specs evaluate f once on the tensor grid (or axis by axis for
product-form integrands); randomized specs use the pick-freeze identity
C_v = E[f(x) f(x_v : z_{-v})] on 2d-dimensional points.
"""
from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from . import quadrature as qd
from .bounds import critical_radius
from .errors import (
    CapExceeded,
    ConstantFunction,
    MeanNotZero,
    MissingDerivatives,
    NumericalInconsistency,
    ZeroFunction,
    ZeroMeanUndefined,
)
from .integrands import Integrand
from .subsets import Subset
from .weights import WeightScheme

ENUMERATION_CAP = 12
ANCHOR_CAP = 25
GAUSS_NEG_TOL = 1e-8
SIGMA_ROUNDOFF = 1e-13


@dataclass(frozen=True)
class FiniteDifference:
    """Nested central differences; ``h=None`` picks eps_mach^(1/(2+|u|))."""

    h: float | None = None


EXACT = "exact"


@dataclass
class VarianceDecomposition:
    mu: float
    sigma2: float
    components: dict[Subset, float]
    d: int
    method: str = "gauss"
    std_errors: dict[Subset, float] | None = None
    clamped: tuple[Subset, ...] = field(default=())

    @property
    def component_sum(self) -> float:
        return float(sum(self.components.values()))

    def __getitem__(self, u: Subset) -> float:
        return self.components.get(u, 0.0)

    def to_json(self) -> dict:
        comps = {str(u): v for u, v in sorted(self.components.items()) if u}
        out = {"mu": self.mu, "sigma2": self.sigma2, "components": comps, "method": self.method}
        if self.std_errors is not None:
            out["std_errors"] = {str(u): v for u, v in sorted(self.std_errors.items()) if u}
        if self.clamped:
            out["clamped"] = [str(u) for u in self.clamped]
        return out


# ---------------------------------------------------------------------- moments
def _needed_masks(d: int, subsets: Iterable[Subset] | None) -> np.ndarray:
    if subsets is None:
        if d > ENUMERATION_CAP:
            raise CapExceeded(f"full ANOVA enumeration capped at d={ENUMERATION_CAP}; pass a subset whitelist")
        return np.arange(1 << d)
    need = {0, (1 << d) - 1}
    for u in subsets:
        need.update(v.bits for v in u.subsets())
    return np.array(sorted(need))


def _axis_moments(f: Integrand, spec, deriv: bool = False, fd: FiniteDifference | None = None):
    """Per-axis (int g, int g^2, int g'^2) for product-form integrands."""
    x, w = qd.axis_rule(spec)
    m, s, t = [], [], []
    for g, dg in f.factors:
        gx = g(x)
        m.append(gx @ w)
        s.append((gx * gx) @ w)
        if deriv:
            if fd is None:
                dgx = dg(x)
            else:
                dgx = _fd_1d(g, x, fd.h if fd.h is not None else np.finfo(float).eps ** (1 / 3))
            t.append((dgx * dgx) @ w)
    return np.array(m), np.array(s), (np.array(t) if deriv else None)


def _product_over_masks(masks: np.ndarray, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
    out = np.ones(len(masks))
    for j in range(len(inside)):
        bit = (masks >> j) & 1
        out *= np.where(bit == 1, inside[j], outside[j])
    return out


def _grid_closed_moments(grid: np.ndarray, w: np.ndarray, masks: np.ndarray, d: int) -> np.ndarray:
    out = np.empty(len(masks))
    for i, m in enumerate(masks):
        drop = [j for j in range(d) if not (m >> j) & 1]
        inner = qd.contract(grid, w, drop)
        keep = d - len(drop)
        out[i] = float(qd.contract(inner * inner, w, range(keep))) if keep else float(inner) ** 2
    return out


def _pickfreeze_moments(values: Callable[[int, np.ndarray], np.ndarray], d: int, masks, spec,
                        shared: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Per-replicate estimates of E[g_v(x) g_v(x_v : z_{-v})] for each mask v.

    ``shared`` means g_v does not depend on v, so g(x) is evaluated once.
    Also returns the per-replicate means of g_∅(x).
    """
    reps, means = [], []
    for pts in qd.replicate_points(spec, 2 * d):
        x, z = pts[:, :d], pts[:, d:]
        row = np.empty(len(masks))
        g0 = values(0, x)
        means.append(g0.mean())
        for i, m in enumerate(masks):
            m = int(m)
            keep = ((m >> np.arange(d)) & 1).astype(bool)
            left = g0 if shared or m == 0 else values(m, x)
            row[i] = float(np.mean(left * values(m, np.where(keep, x, z))))
        reps.append(row)
    return np.array(reps), np.array(means)


def _closed_moments(f: Integrand, spec, masks: np.ndarray) -> tuple[np.ndarray, float]:
    """(C_v for each mask, mu); randomized specs give one row of C_v per replicate."""
    d = f.d
    if qd.is_randomized(spec):
        reps, means = _pickfreeze_moments(lambda m, x: qd.evaluate(f, x), d, masks, spec, shared=True)
        return reps, float(means.mean())
    if f.factors is not None:
        m, s, _ = _axis_moments(f, spec)
        return _product_over_masks(masks, s, m * m), float(np.prod(m))
    grid, w = qd.grid_values(f, d, spec)
    return _grid_closed_moments(grid, w, masks, d), float(qd.contract(grid, w, range(d)))


def closed_moments(f: Integrand, spec=None, subsets: Iterable[Subset] | None = None):
    """Closed moments C_v over the masks needed for ``subsets`` (all masks by default).

    Returns ``(masks, values)``; for randomized specs ``values`` has one row per replicate.
    """
    spec = spec or qd.default_spec(f.d)
    masks = _needed_masks(f.d, subsets)
    return masks, _closed_moments(f, spec, masks)[0]


def closed_moment(f: Integrand, v: Subset, spec=None) -> float:
    """C_v = ∫ (∫ f dx_{-v})^2 dx_v; C_∅ is mu^2."""
    masks, vals = closed_moments(f, spec, [v])
    col = int(np.searchsorted(masks, v.bits))
    return float(np.atleast_2d(vals)[:, col].mean())


def mobius(values: np.ndarray, d: int) -> np.ndarray:
    """Möbius inversion over the subset lattice along the last axis (length 2**d)."""
    out = np.array(values, dtype=np.float64, copy=True)
    lead = out.shape[:-1]
    for j in range(d):
        view = out.reshape(lead + (-1, 2, 1 << j))
        view[..., 1, :] -= view[..., 0, :]
    return out


def _mobius_sparse(masks: np.ndarray, values: np.ndarray, targets: set[int]) -> np.ndarray:
    """Möbius inversion at the ``targets`` masks, whose submasks must all be in ``masks``."""
    index = {int(m): i for i, m in enumerate(masks)}
    out = np.zeros_like(values)
    for i, m in enumerate(masks):
        m = int(m)
        if m not in targets:
            continue
        v = m
        while True:
            sign = -1.0 if (m.bit_count() - v.bit_count()) % 2 else 1.0
            out[..., i] += sign * values[..., index[v]]
            if v == 0:
                break
            v = (v - 1) & m
    return out


def anova_variances(f: Integrand, spec=None, subsets: Iterable[Subset] | None = None) -> VarianceDecomposition:
    """ANOVA variance components sigma^2_u of f.

    With ``subsets=None`` every u ⊆ 1:d is returned (d <= 12).  Negative
    estimates within tolerance (1e-8 scaled by ∫f² for deterministic rules,
    3 standard errors for randomized ones) are clamped to zero and listed in
    ``clamped``; anything more negative raises NumericalInconsistency.
    """
    d = f.d
    spec = spec or qd.default_spec(d)
    subsets = list(subsets) if subsets is not None else None
    masks = _needed_masks(d, subsets)
    key = ("closed", spec, None if subsets is None else tuple(masks.tolist()))
    moments, mu = _memoized(key, f, lambda: _closed_moments(f, spec, masks))
    want = None if subsets is None else {u.bits for u in subsets}
    raw = mobius(moments, d) if want is None else _mobius_sparse(masks, moments, want)
    se = None
    if qd.is_randomized(spec):
        se = raw.std(axis=0, ddof=1) / math.sqrt(len(raw))
        raw, moments = raw.mean(axis=0), moments.mean(axis=0)
        tol = 3 * se + 1e-15
    else:
        tol = np.full(len(masks), GAUSS_NEG_TOL * max(1.0, float(moments[-1])))
    sigma2 = float(moments[-1] - moments[0])
    if abs(sigma2) <= SIGMA_ROUNDOFF * abs(float(moments[-1])):
        sigma2 = 0.0  # constant up to rounding in int f^2 - mu^2
    components, errors, clamped = {Subset(0, d): 0.0}, ({} if se is not None else None), []
    for i, m in enumerate(masks):
        m = int(m)
        if m == 0 or (want is not None and m not in want):
            continue
        u = Subset(m, d)
        val = float(raw[i])
        if val < 0:
            if val < -tol[i]:
                raise NumericalInconsistency(f"sigma^2_{u} = {val:.3e} is negative beyond tolerance {tol[i]:.1e}")
            clamped.append(u)
            val = 0.0
        components[u] = val
        if errors is not None:
            errors[u] = float(se[i])
    return VarianceDecomposition(mu, sigma2, components, d, type(spec).__name__, errors, tuple(clamped))


# ---------------------------------------------------------------------- per-function dimensions
def _scale_function(sense) -> Callable[[Subset], int]:
    if callable(sense):
        return sense
    name = getattr(sense, "value", sense)
    if name == "truncation":
        return lambda u: u.ceil
    if name == "superposition":
        return len
    if name == "successive":
        return lambda u: 1 + u.ceil - u.floor if u else 0
    raise ValueError(f"unknown sense {sense!r}")


def effective_dimension(vd: VarianceDecomposition, epsilon: float, sense="superposition") -> int:
    """Effective dimension of a single function.

    ``"truncation"`` and ``"superposition"`` use the smallest s capturing at
    least (1 - eps) of the variance.  ``"successive"`` or a callable
    ``scale(u) -> int`` define nested families U_s = {u : scale(u) <= s} and
    return the smallest s whose excluded variance is below eps * sigma^2.
    """
    if not vd.sigma2 > 0:
        raise ConstantFunction("effective dimension needs a nonconstant function")
    scale = _scale_function(sense)
    by_scale: dict[int, float] = {}
    for u, v in vd.components.items():
        if u:
            k = int(scale(u))
            by_scale[k] = by_scale.get(k, 0.0) + v
    name = getattr(sense, "value", sense)
    top = max(by_scale) if by_scale else 1
    if name in ("truncation", "superposition"):
        acc = 0.0
        for s in range(1, vd.d + 1):
            acc += by_scale.get(s, 0.0)
            if acc >= (1 - epsilon) * vd.sigma2:
                return s
        return vd.d
    total = sum(by_scale.values())
    excluded = total
    for s in range(0, top + 1):
        excluded -= by_scale.get(s, 0.0)
        if excluded < epsilon * vd.sigma2:
            return max(s, 1)
    return top


def mean_dimension(vd: VarianceDecomposition) -> float:
    if not vd.sigma2 > 0:
        raise ConstantFunction("mean dimension needs a nonconstant function")
    return sum(len(u) * v for u, v in vd.components.items()) / vd.sigma2


# ---------------------------------------------------------------------- anchored decomposition
def anchored_component(f: Integrand, anchor, u: Subset, x) -> np.ndarray | float:
    """f*_u(x) = sum_{v ⊆ u} (-1)^{|u|-|v|} f(x_v : a_{-v}); x may be one point or a batch."""
    if len(u) > ANCHOR_CAP:
        raise CapExceeded(f"|u| = {len(u)} needs 2^{len(u)} evaluations (cap {ANCHOR_CAP})")
    a = np.asarray(anchor, dtype=np.float64)
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    single = np.ndim(x) == 1
    out = np.zeros(len(pts))
    for v in u.subsets():
        keep = ((v.bits >> np.arange(f.d)) & 1).astype(bool)
        y = np.where(keep, pts, a)
        sign = -1.0 if (len(u) - len(v)) % 2 else 1.0
        out += sign * f(y)
    return float(out[0]) if single else out


# ---------------------------------------------------------------------- derivatives and norms
def _fd_1d(g, x, h):
    lo = np.where(x - h < 0, x, x - h)
    hi = np.where(x + h > 1, x, x + h)
    return (g(hi) - g(lo)) / (hi - lo)


def finite_difference_partial(f: Integrand, u: Subset, x: np.ndarray, h: float | None = None) -> np.ndarray:
    """Nested differences over the coordinates in u; one-sided within h of the boundary."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    if not u:
        return f(x)
    if h is None:
        h = np.finfo(float).eps ** (1.0 / (2 + len(u)))
    cols = u.zero_based
    lo = np.where(x[:, cols] - h < 0, x[:, cols], x[:, cols] - h)
    hi = np.where(x[:, cols] + h > 1, x[:, cols], x[:, cols] + h)
    denom = np.prod(hi - lo, axis=1)
    out = np.zeros(len(x))
    for choice in range(1 << len(cols)):
        y = x.copy()
        sign = 1.0
        for k, c in enumerate(cols):
            if (choice >> k) & 1:
                y[:, c] = hi[:, k]
            else:
                y[:, c] = lo[:, k]
                sign = -sign
        out += sign * f(y)
    return out / denom


def _partial_fn(f: Integrand, derivatives):
    if derivatives == EXACT:
        if not f.has_partials:
            raise MissingDerivatives(f"{f.name} has no exact mixed partials; use FiniteDifference")
        return f.partial
    if isinstance(derivatives, FiniteDifference):
        return lambda u, x: finite_difference_partial(f, u, x, derivatives.h)
    raise ValueError(f"unknown derivative mode {derivatives!r}")


_MEMO: OrderedDict = OrderedDict()
MEMO_SIZE = 32


def _memoized(key: tuple, f: Integrand, compute: Callable):
    """Reuse results for the same integrand object; norms and tails share the expensive moments."""
    key = (id(f),) + key
    hit = _MEMO.get(key)
    if hit is not None and hit[0] is f:
        _MEMO.move_to_end(key)
        return hit[1]
    value = compute()
    _MEMO[key] = (f, value)
    if len(_MEMO) > MEMO_SIZE:
        _MEMO.popitem(last=False)
    return value


def derivative_moments(f: Integrand, spec=None, derivatives=EXACT) -> np.ndarray:
    """D_u = ∫ (∫ ∂^u f dx_{-u})^2 dx_u for every mask u (D_∅ = mu^2)."""
    d = f.d
    if d > ENUMERATION_CAP:
        raise CapExceeded(f"weighted norm sums 2^d terms; capped at d={ENUMERATION_CAP}")
    spec = spec or qd.default_spec(d)
    return _memoized(("deriv", spec, derivatives), f, lambda: _derivative_moments(f, spec, derivatives)).copy()


def _derivative_moments(f: Integrand, spec, derivatives) -> np.ndarray:
    d = f.d
    masks = np.arange(1 << d)
    if derivatives == EXACT and not f.has_partials:
        raise MissingDerivatives(f"{f.name} has no exact mixed partials; use FiniteDifference")
    if qd.is_randomized(spec):
        partial = _partial_fn(f, derivatives)
        reps, _ = _pickfreeze_moments(lambda m, x: partial(Subset(m, d), x), d, masks, spec)
        return reps.mean(axis=0)
    if f.factors is not None:
        fd = derivatives if isinstance(derivatives, FiniteDifference) else None
        m, _, t = _axis_moments(f, spec, deriv=True, fd=fd)
        return _product_over_masks(masks, t, m * m)
    partial = _partial_fn(f, derivatives)
    out = np.empty(len(masks))
    x, w = qd.axis_rule(spec)
    for m in masks:
        u = Subset(int(m), d)
        grid, _ = qd.grid_values(lambda p, u=u: partial(u, p), d, spec)
        drop = [j for j in range(d) if not (m >> j) & 1]
        inner = qd.contract(grid, w, drop)
        keep = d - len(drop)
        out[m] = float(qd.contract(inner * inner, w, range(keep))) if keep else float(inner) ** 2
    return out


def _inverse_weights(scheme: WeightScheme, d: int) -> np.ndarray:
    lw = scheme.all_log_weights(d)
    finite = np.isfinite(lw)
    return np.where(finite, np.exp(-np.where(finite, lw, 0.0)), 0.0)


def weighted_norm(f: Integrand, scheme: WeightScheme, spec=None, derivatives=EXACT) -> float:
    """||f||_gamma with ||f||^2 = sum_u gamma_u^{-1} ∫ (∫ ∂^u f dx_{-u})^2 dx_u."""
    dm = derivative_moments(f, spec, derivatives)
    with np.errstate(over="ignore"):  # an infinite norm means f lies outside the space
        return math.sqrt(max(float(np.sum(_inverse_weights(scheme, f.d) * dm)), 0.0))


def norm_anova_gap(f: Integrand, scheme: WeightScheme, spec=None, derivatives=EXACT) -> float:
    """||f||^2 minus mu^2/gamma_∅ + sum_u pi^(2|u|) sigma^2_u / gamma_u; never negative in exact arithmetic."""
    d = f.d
    dm = derivative_moments(f, spec, derivatives)
    vd = anova_variances(f, spec)
    sig = np.zeros(len(dm))
    lower = np.empty(len(dm))
    lower[0] = vd.mu**2
    for u, v in vd.components.items():
        if u:
            sig[u.bits] = v
            lower[u.bits] = math.pi ** (2 * len(u)) * v
    # termwise differences avoid cancelling two huge sums under tiny weights;
    # subsets where both moments are rounding noise contribute nothing
    eps = np.finfo(float).eps
    sig_noise = 8 * eps * (1 << d) * (vd.sigma2 + vd.mu**2)
    dm_noise = SIGMA_ROUNDOFF * float(np.max(np.abs(dm)))
    noise = (np.abs(dm) <= dm_noise) & (np.abs(sig) <= sig_noise)
    noise[0] = False
    diff = np.where(noise, 0.0, dm - lower)
    with np.errstate(over="ignore"):
        return float(np.sum(_inverse_weights(scheme, d) * diff))


def poincare_ratio(g: Callable[[np.ndarray], np.ndarray], interval=(0.0, 1.0), spec=None,
                   derivative: Callable[[np.ndarray], np.ndarray] | None = None) -> float:
    """(∫ g'^2) / (∫ g^2) over ``interval`` for zero-mean g; at least (pi/(b-a))^2."""
    spec = spec or qd.GaussTensor(64)
    a, b = interval
    x, w = qd.axis_rule(spec, interval)
    gx = np.asarray(g(x), dtype=np.float64)
    mass = float(gx @ w)
    sq = float((gx * gx) @ w)
    if sq <= 0:
        raise ZeroFunction("g vanishes on the interval")
    if abs(mass) > 1e-8 * max(1.0, math.sqrt(sq * (b - a))):
        raise MeanNotZero(f"∫g = {mass:.3e} is not zero")
    if derivative is None:
        h = np.finfo(float).eps ** (1 / 3) * (b - a)
        lo = np.where(x - h < a, x, x - h)
        hi = np.where(x + h > b, x, x + h)
        dg = (np.asarray(g(hi)) - np.asarray(g(lo))) / (hi - lo)
    else:
        dg = np.asarray(derivative(x), dtype=np.float64)
    return float((dg * dg) @ w) / sq


def paskov_dimension(f: Integrand, epsilon: float, fill: float = 0.5, spec=None) -> int:
    """Smallest k with |∫ f(x_{1:k}, fill, ..., fill) - mu| <= eps |mu|."""
    d = f.d
    spec = spec or qd.default_spec(d)
    mu = qd.integrate(f, d, spec).value
    scale = math.sqrt(abs(closed_moment(f, Subset.full(d), spec)))
    if abs(mu) <= 1e-12 * max(1.0, scale):
        raise ZeroMeanUndefined("the criterion is relative to |mu| and mu is zero")
    for k in range(1, d):
        def head(y, k=k):
            full = np.full((len(y), d), fill)
            full[:, :k] = y
            return f(full)
        if abs(qd.integrate(head, k, spec).value - mu) <= epsilon * abs(mu):
            return k
    return d


# ---------------------------------------------------------------------- critical ball
def ball_scaling(f: Integrand, scheme: WeightScheme, spec=None, derivatives=EXACT) -> float:
    """c^2 such that c f lies on the boundary of the critical ball."""
    norm = weighted_norm(f, scheme, spec, derivatives)
    if norm <= 0:
        raise ZeroFunction("zero norm: f cannot be scaled onto the critical ball")
    return (critical_radius(scheme, f.d).rho / norm) ** 2


def ball_tail_variance(f: Integrand, scheme: WeightScheme, s: int, sense="superposition",
                       spec=None, derivatives=EXACT) -> float:
    """Variance of c f beyond order (or largest index) s, with ||c f|| = rho*."""
    c2 = ball_scaling(f, scheme, spec, derivatives)
    vd = anova_variances(f, spec)
    key = _scale_function(sense)
    return c2 * sum(v for u, v in vd.components.items() if u and key(u) > s)
