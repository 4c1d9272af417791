"""Integrands on [0,1]^d and a registry of test functions with analytic facts.

An :class:`Integrand` wraps a vectorised evaluator ``f(x)`` for ``x`` of shape
``(n, d)``.  Product-form integrands may also expose their 1-D ``factors`` so
that tensor rules can be applied axis by axis.

The ``known`` dictionary of a registry entry holds exact values used as oracles:
``mean``, ``variance``, ``components`` (mask -> sigma^2_u) and ``norm2``
(a callable ``scheme -> ||f||^2``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .subsets import Subset

Factor = tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray] | None]


@dataclass
class Integrand:
    func: Callable[[np.ndarray], np.ndarray]
    d: int
    mixed_partial: Callable[[Subset, np.ndarray], np.ndarray] | None = None
    known: dict = field(default_factory=dict)
    factors: Sequence[Factor] | None = None
    name: str = "custom"
    smooth: bool = True

    def __post_init__(self):
        if not 1 <= self.d <= 64:
            raise ValueError("integrand dimension must be in 1..64")

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        return np.asarray(self.func(x), dtype=np.float64)

    def partial(self, u: Subset, x) -> np.ndarray:
        """Exact mixed partial derivative; the empty set gives f itself."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if not u:
            return self(x)
        if self.mixed_partial is None:
            raise AttributeError("integrand has no exact mixed partials")
        return np.asarray(self.mixed_partial(u, x), dtype=np.float64)

    @property
    def has_partials(self) -> bool:
        return self.mixed_partial is not None


def separable(factors: Sequence[Factor], name: str, known=None, smooth=True) -> Integrand:
    """f(x) = prod_j g_j(x_j) from pairs (g_j, g_j')."""
    factors = list(factors)
    d = len(factors)

    def func(x):
        out = np.ones(len(x))
        for j, (g, _) in enumerate(factors):
            out = out * g(x[:, j])
        return out

    has_deriv = all(dg is not None for _, dg in factors)

    def partial(u, x):
        out = np.ones(len(x))
        for j, (g, dg) in enumerate(factors):
            out = out * (dg(x[:, j]) if (u.bits >> j) & 1 else g(x[:, j]))
        return out

    return Integrand(func, d, partial if has_deriv else None, known or {}, factors, name, smooth)


def _sum_over_subsets(scheme, d: int, terms: np.ndarray) -> float:
    """sum_u terms[u] / gamma_u, dropping u = ∅ when gamma_∅ is infinite."""
    lw = scheme.all_log_weights(d)
    inv = np.where(np.isinf(lw), 0.0, np.exp(-np.where(np.isinf(lw), 0.0, lw)))
    with np.errstate(over="ignore"):
        return float(np.sum(inv * terms))


def _product_table(d: int, inside: np.ndarray, outside: np.ndarray) -> np.ndarray:
    """Array over masks of prod_{j in u} inside_j * prod_{j not in u} outside_j."""
    masks = np.arange(1 << d)
    out = np.ones(1 << d)
    for j in range(d):
        bit = (masks >> j) & 1
        out *= np.where(bit == 1, inside[j], outside[j])
    return out


# ---------------------------------------------------------------------- registry
def linear_sum(d: int = 2, coefs: Sequence[float] | None = None) -> Integrand:
    c = np.ones(d) if coefs is None else np.asarray(coefs, dtype=np.float64)
    d = len(c)

    def func(x):
        return x @ c

    def partial(u, x):
        if len(u) == 1:
            return np.full(len(x), c[u.indices[0] - 1])
        return np.zeros(len(x))

    mu = float(c.sum() / 2)
    comps = {1 << j: float(c[j] ** 2 / 12) for j in range(d)}

    def norm2(scheme):
        terms = np.zeros(1 << d)
        terms[0] = mu**2
        for j in range(d):
            terms[1 << j] = c[j] ** 2
        return _sum_over_subsets(scheme, d, terms)

    known = {"mean": mu, "variance": float(np.sum(c**2) / 12), "components": comps, "norm2": norm2}
    return Integrand(func, d, partial, known, None, "linear_sum")


def prod_centered(d: int = 2) -> Integrand:
    """prod_j (x_j - 1/2): a single ANOVA component of order d."""
    factors = [(lambda t: t - 0.5, lambda t: np.ones_like(t))] * d
    var = 12.0**-d

    def norm2(scheme):
        return float(1.0 / scheme.weight(Subset.full(d)))

    known = {"mean": 0.0, "variance": var, "components": {(1 << d) - 1: var}, "norm2": norm2}
    return separable(factors, "prod_centered", known)


def sine_extremal(d: int = 1) -> Integrand:
    """sqrt(2) sin(pi (x_1 - 1/2)): unit variance with the smallest possible norm."""
    r2 = math.sqrt(2.0)
    first = (lambda t: r2 * np.sin(np.pi * (t - 0.5)), lambda t: r2 * np.pi * np.cos(np.pi * (t - 0.5)))
    const = (lambda t: np.ones_like(t), lambda t: np.zeros_like(t))

    def norm2(scheme):
        return float(np.pi**2 / scheme.weight(Subset.of([1], d)))

    known = {"mean": 0.0, "variance": 1.0, "components": {1: 1.0}, "norm2": norm2}
    return separable([first] + [const] * (d - 1), "sine_extremal", known)


def gfunction(a: Sequence[float] = (0.0, 0.0, 3.0)) -> Integrand:
    """Sobol' g-function prod_j (|4x_j - 2| + a_j)/(1 + a_j).  Kinked at x_j = 1/2."""
    a = np.asarray(a, dtype=np.float64)
    d = len(a)
    factors = [(lambda t, aj=aj: (np.abs(4 * t - 2) + aj) / (1 + aj),
                lambda t, aj=aj: 4 * np.sign(t - 0.5) / (1 + aj)) for aj in a]
    v = 1.0 / (3 * (1 + a) ** 2)
    table = _product_table(d, v, np.ones(d))
    table[0] = 0.0
    comps = {m: float(table[m]) for m in range(1, 1 << d)}

    def norm2(scheme):
        return _sum_over_subsets(scheme, d, _product_table(d, 16 / (1 + a) ** 2, np.ones(d)))

    known = {"mean": 1.0, "variance": float(np.prod(1 + v) - 1), "components": comps, "norm2": norm2}
    return separable(factors, "gfunction", known, smooth=False)


def additive_sine(d: int = 3, coefs: Sequence[float] | None = None) -> Integrand:
    """sum_j c_j sin(2 pi x_j) with c_j = 1/j by default."""
    c = 1.0 / np.arange(1, d + 1) if coefs is None else np.asarray(coefs, dtype=np.float64)
    d = len(c)

    def func(x):
        return np.sin(2 * np.pi * x) @ c

    def partial(u, x):
        if len(u) == 1:
            j = u.indices[0] - 1
            return 2 * np.pi * c[j] * np.cos(2 * np.pi * x[:, j])
        return np.zeros(len(x))

    def norm2(scheme):
        terms = np.zeros(1 << d)
        for j in range(d):
            terms[1 << j] = 2 * np.pi**2 * c[j] ** 2
        return _sum_over_subsets(scheme, d, terms)

    comps = {1 << j: float(c[j] ** 2 / 2) for j in range(d)}
    known = {"mean": 0.0, "variance": float(np.sum(c**2) / 2), "components": comps, "norm2": norm2}
    return Integrand(func, d, partial, known, None, "additive_sine")


def _expm1_ratio(c: np.ndarray) -> np.ndarray:
    """(e^c - 1)/c with the limit 1 at c = 0."""
    safe = np.where(c == 0, 1.0, c)
    return np.where(c == 0, 1.0, np.expm1(safe) / safe)


def exp_product(d: int = 3, coefs: Sequence[float] | None = None) -> Integrand:
    """exp(sum_j c_j x_j): smooth, with ANOVA components of every order."""
    c = np.full(d, 0.5) if coefs is None else np.asarray(coefs, dtype=np.float64)
    d = len(c)
    factors = [(lambda t, cj=cj: np.exp(cj * t), lambda t, cj=cj: cj * np.exp(cj * t)) for cj in c]
    m, s = _expm1_ratio(c), _expm1_ratio(2 * c)
    table = _product_table(d, s - m**2, m**2)
    table[0] = 0.0
    comps = {k: float(table[k]) for k in range(1, 1 << d)}
    mu = float(np.prod(m))

    def norm2(scheme):
        return _sum_over_subsets(scheme, d, _product_table(d, c**2 * s, m**2))

    known = {"mean": mu, "variance": float(np.prod(s) - mu**2), "components": comps, "norm2": norm2}
    return separable(factors, "exp_product", known)


def from_expression(expr: str, d: int) -> Integrand:
    """Integrand from a numpy expression in x1..xd, e.g. ``"x1*x2 + sin(x3)"``."""
    names = {k: getattr(np, k) for k in ("sin", "cos", "exp", "log", "sqrt", "abs", "pi", "tanh", "prod", "sum")}

    def func(x):
        env = dict(names)
        env.update({f"x{j + 1}": x[:, j] for j in range(d)})
        env["x"] = x
        out = eval(expr, {"__builtins__": {}}, env)  # noqa: S307 - user supplied formula
        return np.broadcast_to(np.asarray(out, dtype=np.float64), (len(x),))

    return Integrand(func, d, None, {}, None, f"expr:{expr}")


REGISTRY: dict[str, Callable[..., Integrand]] = {
    "linear_sum": linear_sum,
    "prod_centered": prod_centered,
    "sine_extremal": sine_extremal,
    "gfunction": gfunction,
    "additive_sine": additive_sine,
    "exp_product": exp_product,
}


def get_integrand(name: str, **params) -> Integrand:
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown integrand {name!r}; choose from {sorted(REGISTRY)}") from None
    return factory(**params)


def known_components_array(f: Integrand) -> np.ndarray:
    """Exact sigma^2_u over all masks from ``f.known``."""
    out = np.zeros(1 << f.d)
    for m, v in f.known["components"].items():
        out[m] = v
    return out


