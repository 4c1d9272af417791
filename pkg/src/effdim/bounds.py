"""Space-level effective dimension bounds derived from the weights alone.

All searches compare logarithms: ``log gamma_{1:s}`` against
``2(s-1) log pi + log gamma_{{1}} + log eps`` and so on.  Two comparison
conventions are supported.  ``NONSTRICT`` uses ``>=`` (ties count);
``STRICT`` uses ``>``.  A tie is a relative difference below 1e-12.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import CapExceeded, ConditionViolated, DomainTooLarge, EmptySubset, OutOfDomain
from .subsets import Subset, mask_cardinality
from .weights import (
    ENUMERATION_CAP,
    INF,
    INFINITE_PREFIX,
    REL_TOL,
    Kind,
    WeightScheme,
    verify_cardinality_condition,
    verify_index_condition,
)

LOG_PI = math.log(math.pi)
TRUNCATION_SEARCH_CAP = 10**7
COMBINATION_CAP = 10**7
LOG_FLOAT_MAX = math.log(np.finfo(float).max)


class Mode(str, Enum):
    NONSTRICT = "nonstrict"
    STRICT = "strict"


class Sense(str, Enum):
    TRUNCATION = "truncation"
    SUPERPOSITION = "superposition"


class Tractability(str, Enum):
    QMC_RATE = "QmcRate"
    STRONGLY_TRACTABLE = "StronglyTractable"
    NOT_ESTABLISHED = "NotEstablished"


@dataclass(frozen=True)
class EffDimReport:
    epsilon: float
    sense: Sense
    value: float
    comparison_mode: Mode
    boundary_flag: bool
    notes: tuple[str, ...] = field(default=())

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "sense": self.sense.value, "value": _num(self.value),
                "mode": self.comparison_mode.value, "boundary": self.boundary_flag,
                "notes": list(self.notes)}


@dataclass(frozen=True)
class RhoStarResult:
    rho: float
    argmin_subset: Subset
    via: str  # "Proposition" or "GeneralSearch"


def _num(v):
    return "inf" if v == INF else v


def _check_eps(eps):
    if not 0 < eps < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")


def _compare(lhs: np.ndarray, rhs: np.ndarray, mode: Mode) -> tuple[np.ndarray, np.ndarray]:
    """(satisfied, tie) for lhs ⪰ rhs in log space."""
    tie = np.abs(lhs - rhs) <= REL_TOL
    above = (lhs > rhs) & ~tie
    return (above | tie) if Mode(mode) is Mode.NONSTRICT else above, tie


def _first_block_logs(scheme: WeightScheme, smax: int) -> np.ndarray:
    """log gamma_{1:s} for s = 1..smax."""
    if scheme.is_explicit:
        return np.array([scheme.log_weight(Subset.first(s, scheme.explicit_d)) for s in range(1, smax + 1)])
    s = np.arange(1, smax + 1)
    return scheme.log_orders(s) + np.cumsum(scheme.log_factors(s))


def _singleton_logs(scheme: WeightScheme, j: np.ndarray) -> np.ndarray:
    if scheme.is_explicit:
        return np.array([scheme.log_weight(Subset(1 << (k - 1), scheme.explicit_d)) for k in j])
    return scheme.log_orders(np.ones_like(j)) + scheme.log_factors(j)


# ---------------------------------------------------------------------- critical radius
def critical_radius(scheme: WeightScheme, d, method: str = "auto") -> RhoStarResult:
    """Smallest ball radius in the weighted norm that holds a unit-variance function.

    rho*^2 = min over nonempty u of pi^(2|u|) / gamma_u, attained by a product of
    centred sines over the minimising u.  Ties go to the smallest cardinality and
    then the smallest mask.  ``method="search"`` forces enumeration of all subsets.
    """
    scheme.check_dim(d)
    dd = INFINITE_PREFIX if d == INF else int(d)
    if method == "search" or scheme.is_explicit:
        lw = scheme.all_log_weights(dd)
        masks = np.arange(1, 1 << dd)
        cost = 2 * LOG_PI * mask_cardinality(masks) - lw[1:]
        best = cost.min()
        near = np.flatnonzero(cost <= best + REL_TOL)
        cards = mask_cardinality(masks[near])
        pick = near[np.lexsort((masks[near], cards))[0]]
        u, log_rho2 = Subset(int(masks[pick]), dd), float(cost[pick])
    else:
        j = np.arange(1, dd + 1)
        logf = scheme.log_factors(j)
        top = np.argsort(-logf, kind="stable")
        cost = 2 * LOG_PI * j - scheme.log_orders(j) - np.cumsum(logf[top])
        r = int(np.flatnonzero(cost <= cost.min() + REL_TOL)[0]) + 1
        u, log_rho2 = Subset.of((top[:r] + 1).tolist(), dd), float(cost[r - 1])
    single = 2 * LOG_PI - scheme.log_weight(Subset(1, u.d))
    via = "Proposition" if single <= log_rho2 + REL_TOL else "GeneralSearch"
    if via == "Proposition":
        u, log_rho2 = Subset(1, u.d), single
    return RhoStarResult(math.exp(0.5 * log_rho2), u, via)


def component_variance_bound(scheme: WeightScheme, u: Subset, d=None, rho: float | None = None) -> float:
    """Largest sigma^2_u any function in the critical ball can have: rho*^2 gamma_u pi^(-2|u|)."""
    if not u:
        raise EmptySubset("variance bound is defined for nonempty subsets only")
    if rho is None:
        rho = critical_radius(scheme, d if d is not None else u.d).rho
    return math.exp(2 * math.log(rho) + scheme.log_weight(u) - 2 * len(u) * LOG_PI)


# ---------------------------------------------------------------------- dimension bounds
def superposition_dimension_bound(scheme: WeightScheme, d, epsilon: float,
                                  mode: Mode = Mode.NONSTRICT) -> EffDimReport:
    """Superposition dimension bound max{s | gamma_{1:s} ⪰ pi^(2(s-1)) gamma_{{1}} eps}."""
    _check_eps(epsilon)
    mode = Mode(mode)
    scheme.check_dim(d)
    notes = []
    verdict = verify_cardinality_condition(scheme, d)
    if not verdict:
        u, s = verdict.witness
        raise ConditionViolated(f"cardinality condition fails: gamma_{u} > gamma_{{1:{s}}}")
    if verdict.verified_up_to != INF and d == INF:
        notes.append(f"cardinality condition verified for d <= {verdict.verified_up_to} only")
    smax = INFINITE_PREFIX if d == INF else int(d)
    if d == INF:
        notes.append(f"search range 1..{smax}")
    lhs = _first_block_logs(scheme, smax)
    s = np.arange(1, smax + 1)
    rhs = 2 * (s - 1) * LOG_PI + lhs[0] + math.log(epsilon)
    ok, tie = _compare(lhs, rhs, mode)
    value = int(s[ok].max()) if ok.any() else 1
    return EffDimReport(epsilon, Sense.SUPERPOSITION, value, mode, bool(tie.any()), tuple(notes))


def _truncation_infinite(scheme, epsilon, mode):
    """Truncation bound when d is unbounded."""
    params = scheme.params
    if scheme.kind is Kind.PRODUCT and "eta" in params:
        st, flag = _product_truncation(params["eta"], epsilon, mode)
        return st, flag, ()
    if scheme.kind in (Kind.ORDER, Kind.FINITE_ORDER):
        # gamma_{{s}} = Gamma_1 for every s
        return INF, False, ("singleton weights do not decay",)
    log_thr = float(_singleton_logs(scheme, np.array([1]))[0]) + math.log(epsilon)
    best, flag = 0, False
    step = 10**6
    for lo in range(1, TRUNCATION_SEARCH_CAP + 1, step):
        j = np.arange(lo, min(lo + step, TRUNCATION_SEARCH_CAP + 1))
        ok, tie = _compare(_singleton_logs(scheme, j), np.full(len(j), log_thr), mode)
        flag |= bool(tie.any())
        if ok.any():
            best = int(j[ok].max())
    if best == TRUNCATION_SEARCH_CAP:
        return INF, flag, (f"lower bound only: threshold still met at search cap {TRUNCATION_SEARCH_CAP}",)
    return max(best, 1), flag, (f"searched 1..{TRUNCATION_SEARCH_CAP}",)


def truncation_dimension_bound(scheme: WeightScheme, d, epsilon: float,
                               mode: Mode = Mode.NONSTRICT) -> EffDimReport:
    """Truncation dimension bound max{s | gamma_{{s}} ⪰ gamma_{{1}} eps}; d may be ``math.inf``."""
    _check_eps(epsilon)
    mode = Mode(mode)
    scheme.check_dim(d)
    verdict = verify_index_condition(scheme, d)
    if not verdict:
        u, s = verdict.witness
        raise ConditionViolated(f"index condition fails: gamma_{u} > gamma_{{{s}}}")
    notes = []
    if verdict.verified_up_to != INF and d == INF:
        notes.append(f"index condition verified for d <= {verdict.verified_up_to} only")
    if d == INF:
        value, flag, extra = _truncation_infinite(scheme, epsilon, mode)
        return EffDimReport(epsilon, Sense.TRUNCATION, value, mode, flag, tuple(notes) + tuple(extra))
    j = np.arange(1, int(d) + 1)
    logs = _singleton_logs(scheme, j)
    ok, tie = _compare(logs, np.full(len(j), logs[0] + math.log(epsilon)), mode)
    value = int(j[ok].max()) if ok.any() else 1
    return EffDimReport(epsilon, Sense.TRUNCATION, value, mode, bool(tie.any()), tuple(notes))


def _product_truncation(eta: float, epsilon: float, mode: Mode) -> tuple[float, bool]:
    """max{s : s^-eta >= eps} from the crossing point s* = eps^(-1/eta).

    An integer s ties when |log s^-eta - log eps| <= REL_TOL, which is
    |s - s*| <= s* REL_TOL / eta to first order.
    """
    if eta <= 0:
        return INF, False
    log_star = -math.log(epsilon) / eta
    if log_star > LOG_FLOAT_MAX:
        return INF, False
    star = math.exp(log_star)
    near = max(1, round(star))
    tie = abs(near - star) <= star * REL_TOL / eta
    if tie:
        value = near if Mode(mode) is Mode.NONSTRICT else near - 1
    else:
        value = math.floor(star)
    return max(1, int(value)), bool(tie)


def _product_superposition(eta: float, epsilon: float, mode: Mode) -> tuple[int, bool]:
    # -eta log s! - 2(s-1) log pi is strictly decreasing, so stop at the first failure
    value, flag, s = 1, False, 1
    log_eps = math.log(epsilon)
    while True:
        lhs = np.array([-eta * math.lgamma(s + 1)])
        ok, tie = _compare(lhs, np.array([2 * (s - 1) * LOG_PI + log_eps]), mode)
        flag |= bool(tie[0])
        if not ok[0]:
            return value, flag
        value, s = s, s + 1


def product_dimension_bounds(eta: float, epsilon: float,
                             mode: Mode = Mode.NONSTRICT) -> tuple[EffDimReport, EffDimReport]:
    """(truncation, superposition) bounds for gamma_j = j^(-eta) and unbounded d."""
    _check_eps(epsilon)
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    mode = Mode(mode)
    st, ft = _product_truncation(float(eta), epsilon, mode)
    ss, fs = _product_superposition(float(eta), epsilon, mode)
    notes = ("eps^(-1/eta) exceeds the floating range",) if st == INF and eta > 0 else ()
    return (EffDimReport(epsilon, Sense.TRUNCATION, st, mode, ft, notes),
            EffDimReport(epsilon, Sense.SUPERPOSITION, ss, mode, fs))


@dataclass(frozen=True)
class TableRow:
    epsilon: float
    eta: float
    trunc: float
    super: int
    trunc_boundary: bool
    super_boundary: bool

    def as_record(self) -> dict:
        return {"epsilon": self.epsilon, "eta": self.eta, "trunc": _num(self.trunc), "super": self.super,
                "trunc_boundary": self.trunc_boundary, "super_boundary": self.super_boundary}


TABLE1_ETAS = (2.0, 1.0, 0.0)
TABLE1_EPSILONS = (0.1, 0.01, 0.001, 0.0001)


def effective_dimension_table(etas=TABLE1_ETAS, epsilons=TABLE1_EPSILONS,
                              mode: Mode = Mode.NONSTRICT, workers: int = 1) -> list[TableRow]:
    """Product-weight bounds for every (eps, eta) cell, eps-major."""
    if not etas or not epsilons:
        raise ValueError("need at least one eta and one epsilon")
    cells = [(eps, eta) for eps in epsilons for eta in etas]

    def row(cell):
        eps, eta = cell
        t, s = product_dimension_bounds(eta, eps, mode)
        return TableRow(eps, eta, t.value, s.value, t.boundary_flag, s.boundary_flag)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(row, cells))
    return [row(c) for c in cells]


# ---------------------------------------------------------------------- interactions
def _prunable(scheme: WeightScheme, d: int) -> bool:
    """True when adding an index never raises the bound and later indices add less."""
    if scheme.is_explicit:
        return False
    j = np.arange(1, d + 1)
    logf = scheme.log_factors(j)
    logo = np.concatenate([[0.0], scheme.log_orders(j)])
    if np.any(np.diff(logf) > 0):
        return False
    growth = np.diff(logo[1:]) if d > 1 else np.zeros(0)
    return bool(np.all(logf - 2 * LOG_PI <= 0)) and bool(np.all(growth + logf[0] - 2 * LOG_PI <= 0))


def important_subsets(scheme: WeightScheme, d: int, epsilon: float, max_order: int,
                      mode: Mode = Mode.NONSTRICT) -> list[tuple[Subset, float]]:
    """Subsets u with 1 <= |u| <= max_order whose variance bound reaches epsilon.

    Sorted by bound descending, then by cardinality and mask.
    """
    mode = Mode(mode)
    scheme.check_dim(d)
    max_order = min(max_order, d)
    log_rho2 = 2 * math.log(critical_radius(scheme, d).rho)
    log_thr = math.log(epsilon)

    def keep(lb):
        ok, _ = _compare(np.array([lb]), np.array([log_thr]), mode)
        return bool(ok[0])

    found: list[tuple[Subset, float]] = []
    if _prunable(scheme, d):
        logf = scheme.log_factors(np.arange(1, d + 1))
        logo = scheme.log_orders(np.arange(1, max_order + 1))

        def extend(members, sum_logf, start):
            r = len(members) + 1
            for j in range(start, d + 1):
                lb = log_rho2 + logo[r - 1] + sum_logf + logf[j - 1] - 2 * r * LOG_PI
                if not keep(lb):
                    break
                u = members + [j]
                found.append((Subset.of(u, d), math.exp(lb)))
                if r < max_order:
                    extend(u, sum_logf + logf[j - 1], j + 1)
        extend([], 0.0, 1)
    else:
        total = sum(math.comb(d, r) for r in range(1, max_order + 1))
        if d > ENUMERATION_CAP and total > COMBINATION_CAP:
            raise CapExceeded(f"{total} candidate subsets exceed the enumeration cap")
        for r in range(1, max_order + 1):
            for combo in itertools.combinations(range(1, d + 1), r):
                u = Subset.of(combo, d)
                lb = log_rho2 + scheme.log_weight(u) - 2 * r * LOG_PI
                if keep(lb):
                    found.append((u, math.exp(lb)))
    found.sort(key=lambda item: (-item[1], len(item[0]), item[0].bits))
    return found


# ---------------------------------------------------------------------- asymptotics
def lambert_w0(x: float) -> float:
    """Principal branch of the Lambert W function, by Halley iteration."""
    x = float(x)
    branch = -1.0 / math.e
    if x < branch:
        if x > branch - 1e-15:
            return -1.0
        raise OutOfDomain(f"W0 is undefined below -1/e, got {x}")
    if x == 0.0:
        return 0.0
    if x == math.inf:
        return math.inf
    if x < -0.25:
        # series about the branch point in p = sqrt(2(ex + 1))
        p = math.sqrt(max(0.0, 2.0 * (math.e * x + 1.0)))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    elif x < 3.0:
        w = math.log1p(x) * (1.0 - math.log1p(math.log1p(x)) / (2.0 + math.log1p(x)))
    else:
        lx = math.log(x)
        llx = math.log(lx)
        w = lx - llx + llx / lx
    for _ in range(100):
        ew = math.exp(w)
        r = w * ew - x
        wp1 = w + 1.0
        if wp1 == 0.0:
            break
        step = r / (ew * wp1 - (w + 2.0) * r / (2.0 * wp1))
        w -= step
        if abs(step) <= 1e-16 * (1.0 + abs(w)):
            break
    return w


def asymptote_argument(epsilon: float, eta: float, lam: float = 0.9) -> float:
    """A = log(1/eps)/(lam*eta), the right side of s log s <= A."""
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    if eta <= 0:
        raise ValueError("eta must be positive")
    _check_eps(epsilon)
    return math.log(1.0 / epsilon) / (lam * eta)


def _asymptotic_argument(epsilon, eta, lam):
    a = asymptote_argument(epsilon, eta, lam)
    if a < math.e * (1 - REL_TOL):
        raise DomainTooLarge(f"A = {a:.4g} < e: epsilon too large for the asymptotic regime")
    return max(a, math.e)


def superposition_asymptote(epsilon: float, eta: float, lam: float = 0.9) -> float:
    """log(A) / W0(A) with A = log(1/eps)/(lam*eta).

    The ratio tends to 1 as eps -> 0.  The quantity that actually bounds the
    superposition dimension is :func:`superposition_growth_bound`.
    """
    a = _asymptotic_argument(epsilon, eta, lam)
    return math.log(a) / lambert_w0(a)


def superposition_growth_bound(epsilon: float, eta: float, lam: float = 0.9) -> float:
    """Largest s with s log s <= A, namely A / W0(A) = exp(W0(A)).

    Whenever s! >= s^(lam s) holds on the relevant range (always for lam = 1/2),
    this bounds the product-weight superposition dimension, and it behaves like
    A / log A as eps -> 0.
    """
    a = _asymptotic_argument(epsilon, eta, lam)
    return a / lambert_w0(a)


def tractability_class(eta: float) -> Tractability:
    """Label for gamma_j = j^(-eta): sum gamma_j^(1/2) < inf needs eta > 2, sum gamma_j < inf needs eta > 1."""
    if eta > 2:
        return Tractability.QMC_RATE
    if eta > 1:
        return Tractability.STRONGLY_TRACTABLE
    return Tractability.NOT_ESTABLISHED
