"""Weight families gamma_u for the unanchored weighted norm.

Every non-explicit family is handled as ``gamma_u = Gamma_|u| * prod_{j in u} gamma_j``:
product weights take ``Gamma_r = 1``, order weights take ``gamma_j = 1``.  All
internal arithmetic is in log space so that factorial-type weights do not overflow.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import CapExceeded, MissingWeight
from .subsets import Subset, mask_cardinality, mask_ceiling

ENUMERATION_CAP = 20
ANALYTIC_CAP = 2000
INFINITE_PREFIX = 200
REL_TOL = 1e-12
INF = math.inf


class Kind(str, Enum):
    PRODUCT = "product"
    ORDER = "order"
    POD = "pod"
    FINITE_ORDER = "finite_order"
    EXPLICIT = "explicit"


def _log_of_values(values, what):
    arr = np.asarray(values, dtype=np.float64)
    if np.any(arr <= 0) or not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} must be positive and finite")
    return np.log(arr)


def _sequence_lookup(logs: np.ndarray, offset: int, what: str):
    def lookup(k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=np.int64)
        if k.size and (k.min() < offset or k.max() - offset >= len(logs)):
            raise ValueError(f"{what} defined only for indices {offset}..{offset + len(logs) - 1}")
        return logs[k - offset]
    return lookup


class WeightScheme:
    """A rule assigning gamma_u > 0 to every coordinate subset u.

    Use the constructors :func:`product`, :func:`order`, :func:`pod`,
    :func:`finite_order` and :func:`explicit` rather than calling this directly.
    ``empty_weight`` may be ``math.inf`` to obtain the semi-norm that drops u = ∅.
    """

    def __init__(self, kind, *, product_factors=None, order_factors=None, pod_exponents=None,
                 explicit_table=None, explicit_d=None, empty_weight=1.0, params=None,
                 log_factor=None, log_order=None, max_dim=None, exact_infinite=False):
        self.kind = Kind(kind)
        self.product_factors = product_factors
        self.order_factors = order_factors
        self.pod_exponents = pod_exponents
        self.explicit_table = explicit_table
        self.explicit_d = explicit_d
        self.empty_weight = float(empty_weight)
        if not self.empty_weight > 0:
            raise ValueError("empty weight must be positive (or inf)")
        self.params = dict(params or {})
        self._log_factor = log_factor
        self._log_order = log_order
        self.max_dim = max_dim
        # True when conditions verified on a prefix extend to every d
        self.exact_infinite = exact_infinite

    # ------------------------------------------------------------------ evaluation
    @property
    def is_explicit(self) -> bool:
        return self.kind is Kind.EXPLICIT

    def log_factors(self, j) -> np.ndarray:
        """log gamma_j for 1-based indices j (zeros for pure order weights)."""
        j = np.asarray(j, dtype=np.int64)
        if self._log_factor is None:
            return np.zeros(j.shape)
        return np.asarray(self._log_factor(j), dtype=np.float64)

    def log_orders(self, r) -> np.ndarray:
        """log Gamma_r for r >= 1 (zeros for pure product weights)."""
        r = np.asarray(r, dtype=np.int64)
        if self._log_order is None:
            return np.zeros(r.shape)
        return np.asarray(self._log_order(r), dtype=np.float64)

    def log_weight(self, u: Subset) -> float:
        if not u:
            return math.log(self.empty_weight) if self.empty_weight < INF else INF
        if self.is_explicit:
            if u.bits >> self.explicit_d or u.bits not in self.explicit_table:
                raise MissingWeight(f"explicit weight table has no entry for {u}")
            return math.log(self.explicit_table[u.bits])
        if self.max_dim is not None and u.ceil > self.max_dim:
            raise MissingWeight(f"weights defined only up to index {self.max_dim}, got {u}")
        idx = np.asarray(u.indices)
        return float(self.log_orders(len(idx)) + self.log_factors(idx).sum())

    def weight(self, u: Subset) -> float:
        lw = self.log_weight(u)
        return INF if lw == INF else math.exp(lw)

    def check_dim(self, d) -> None:
        if d != INF and (int(d) != d or d < 1):
            raise ValueError(f"dimension must be a positive integer or inf, got {d}")
        limit = self.explicit_d if self.is_explicit else self.max_dim
        if limit is not None and d > limit:
            raise ValueError(f"{self.kind.value} weights are defined only for d <= {limit}")

    def all_log_weights(self, d: int) -> np.ndarray:
        """log gamma_u for every mask 0..2**d - 1 (entry 0 is log gamma_empty)."""
        if d > ENUMERATION_CAP:
            raise CapExceeded(f"exhaustive subset enumeration capped at d={ENUMERATION_CAP}, got {d}")
        self.check_dim(d)
        masks = np.arange(1 << d, dtype=np.int64)
        if self.is_explicit:
            out = np.empty(1 << d)
            for m in range(1, 1 << d):
                if m not in self.explicit_table:
                    raise MissingWeight(f"explicit weight table has no entry for {Subset(m, d)}")
                out[m] = math.log(self.explicit_table[m])
        else:
            logf = self.log_factors(np.arange(1, d + 1))
            out = np.zeros(1 << d)
            for j in range(d):
                out += ((masks >> j) & 1) * logf[j]
            card = mask_cardinality(masks)
            logo = np.concatenate([[0.0], self.log_orders(np.arange(1, d + 1))])
            out += logo[card]
        out[0] = math.log(self.empty_weight) if self.empty_weight < INF else INF
        return out

    # ------------------------------------------------------------------ serialisation
    def to_json(self) -> dict:
        out = dict(self.params)
        out["kind"] = self.kind.value
        if self.is_explicit:
            out["d"] = self.explicit_d
            out["weights"] = {str(Subset(m, self.explicit_d)): w for m, w in sorted(self.explicit_table.items())}
        if self.empty_weight != 1.0:
            out["empty"] = "inf" if self.empty_weight == INF else self.empty_weight
        return out

    def __repr__(self) -> str:
        return f"WeightScheme({json.dumps(self.to_json(), ensure_ascii=False)})"


# ---------------------------------------------------------------------- constructors
def _factor_source(eta, factors):
    if (eta is None) == (factors is None):
        raise ValueError("give exactly one of eta or factors")
    if eta is not None:
        eta = float(eta)

        def logf(j):
            return -eta * np.log(np.asarray(j, dtype=np.float64))
        return logf, None, {"eta": eta}
    if callable(factors):
        def logf(j):
            return _log_of_values(factors(np.asarray(j)), "product factors")
        return logf, None, {}
    logs = _log_of_values(list(factors), "product factors")
    return _sequence_lookup(logs, 1, "product factors"), len(logs), {"factors": [float(v) for v in factors]}


def product(eta=None, *, factors=None, empty_weight=1.0) -> WeightScheme:
    """Product weights gamma_u = prod_{j in u} gamma_j, with gamma_j = j**-eta by default."""
    logf, max_dim, params = _factor_source(eta, factors)
    return WeightScheme(Kind.PRODUCT, product_factors=factors if factors is not None else (lambda j: np.asarray(j, float) ** -params["eta"]),
                        empty_weight=empty_weight, params=params, log_factor=logf, max_dim=max_dim,
                        exact_infinite=eta is not None)


def order(gamma=None, *, factors=None, empty_weight=None) -> WeightScheme:
    """Order weights gamma_u = Gamma_|u|.

    ``gamma`` gives Gamma_r = gamma**r.  ``factors`` is the sequence
    (Gamma_0, Gamma_1, ...) where Gamma_0 is the empty-set weight.
    """
    if (gamma is None) == (factors is None):
        raise ValueError("give exactly one of gamma or factors")
    if gamma is not None:
        g = float(gamma)
        if g <= 0:
            raise ValueError("order rate must be positive")

        def logo(r):
            return np.asarray(r, dtype=np.float64) * math.log(g)
        return WeightScheme(Kind.ORDER, order_factors=lambda r: g ** np.asarray(r, float),
                            empty_weight=1.0 if empty_weight is None else empty_weight,
                            params={"gamma": g}, log_order=logo, exact_infinite=g <= 1.0)
    vals = [float(v) for v in factors]
    logs = _log_of_values(vals[1:], "order factors")
    return WeightScheme(Kind.ORDER, order_factors=tuple(vals),
                        empty_weight=vals[0] if empty_weight is None else empty_weight,
                        params={"factors": vals}, log_order=_sequence_lookup(logs, 1, "order factors"),
                        max_dim=len(logs))


def pod(alpha=None, beta=None, *, order_factors=None, product_factors=None) -> WeightScheme:
    """POD weights gamma_u = Gamma_|u| prod_{j in u} gamma_j.

    With ``alpha``/``beta`` this is the family (|u|!)**alpha * prod j**-beta.
    """
    if alpha is not None or beta is not None:
        a, b = float(alpha), float(beta)

        def logo(r):
            return a * np.array([math.lgamma(k + 1) for k in np.atleast_1d(r)]).reshape(np.shape(r))

        def logf(j):
            return -b * np.log(np.asarray(j, dtype=np.float64))
        return WeightScheme(Kind.POD, pod_exponents=(a, b), empty_weight=1.0,
                            params={"alpha": a, "beta": b}, log_factor=logf, log_order=logo,
                            exact_infinite=True)
    ovals = [float(v) for v in order_factors]
    logf, max_dim, params = _factor_source(None, product_factors)
    logs = _log_of_values(ovals[1:], "order factors")
    max_dim = len(logs) if max_dim is None else min(max_dim, len(logs))
    params["order_factors"] = ovals
    return WeightScheme(Kind.POD, order_factors=tuple(ovals), product_factors=product_factors,
                        empty_weight=ovals[0], params=params, log_factor=logf,
                        log_order=_sequence_lookup(logs, 1, "order factors"), max_dim=max_dim)


def finite_order(factors: Sequence[float], tail: float = np.finfo(float).tiny) -> WeightScheme:
    """Finite-order weights: Gamma_r from ``factors`` (Gamma_0, ..., Gamma_r0), ``tail`` above r0.

    Weights must stay positive, so orders beyond r0 get the tiny ``tail`` value
    instead of zero.
    """
    vals = [float(v) for v in factors]
    logs = _log_of_values(vals[1:], "order factors")
    if tail <= 0:
        raise ValueError("tail weight must be positive")
    log_tail = math.log(tail)
    r0 = len(logs)

    def logo(r):
        r = np.asarray(r, dtype=np.int64)
        out = np.full(r.shape, log_tail)
        inside = (r >= 1) & (r <= r0)
        out[inside] = logs[r[inside] - 1]
        return out
    return WeightScheme(Kind.FINITE_ORDER, order_factors=tuple(vals), empty_weight=vals[0],
                        params={"factors": vals, "tail": tail}, log_order=logo, exact_infinite=True)


def explicit(table: Mapping, d: int, empty_weight: float | None = None) -> WeightScheme:
    """General weights from a table keyed by Subset, int mask, or ``"{1,3}"`` strings."""
    masks = {}
    for key, w in table.items():
        if isinstance(key, Subset):
            m = key.bits
        elif isinstance(key, str):
            m = Subset.parse(key, d).bits
        else:
            m = int(key)
        if m >> d:
            raise ValueError(f"subset {key} lies outside 1:{d}")
        if m == 0:
            if empty_weight is None:
                empty_weight = w
            continue
        w = float(w)
        if not w > 0:
            raise ValueError(f"weight for {key} must be positive")
        masks[m] = w
    missing = [Subset(m, d) for m in range(1, 1 << d) if m not in masks] if d <= ENUMERATION_CAP else []
    if missing:
        raise MissingWeight(f"explicit table must cover every nonempty subset; missing {missing[0]}")
    return WeightScheme(Kind.EXPLICIT, explicit_table=masks, explicit_d=d,
                        empty_weight=1.0 if empty_weight is None else float(empty_weight))


def materialize(scheme: WeightScheme, d: int) -> WeightScheme:
    """Explicit copy of ``scheme`` restricted to 1:d."""
    lw = scheme.all_log_weights(d)
    table = {m: math.exp(lw[m]) for m in range(1, 1 << d)}
    return explicit(table, d, empty_weight=scheme.empty_weight)


def _parse_empty(value):
    if value is None:
        return None
    if isinstance(value, str) and value.lower() in ("inf", "infinity", "∞"):
        return INF
    return float(value)


def from_json(obj) -> WeightScheme:
    """Parse the small JSON description, e.g. ``{"kind": "product", "eta": 2}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    kind = obj.get("kind")
    empty = _parse_empty(obj.get("empty"))
    if kind == "product":
        s = product(obj.get("eta"), factors=obj.get("factors"),
                    empty_weight=1.0 if empty is None else empty)
    elif kind == "order":
        s = order(obj.get("gamma"), factors=obj.get("factors"))
    elif kind == "pod":
        if "alpha" in obj:
            s = pod(obj["alpha"], obj["beta"])
        else:
            s = pod(order_factors=obj["order_factors"], product_factors=obj["factors"])
    elif kind == "finite_order":
        s = finite_order(obj["factors"], obj.get("tail", np.finfo(float).tiny))
    elif kind == "explicit":
        return explicit(obj["weights"], int(obj["d"]), empty_weight=empty)
    else:
        raise ValueError(f"unknown weight kind {kind!r}")
    if empty is not None:
        s.empty_weight = empty
    return s


# ---------------------------------------------------------------------- conditions
@dataclass(frozen=True)
class ConditionVerdict:
    """Outcome of a weight-condition check; truthy iff the condition holds."""

    holds: bool
    witness: tuple[Subset, int] | None = None
    verified_up_to: float = INF
    method: str = "exhaustive"

    def __bool__(self) -> bool:
        return self.holds


def weight_of(scheme: WeightScheme, u: Subset) -> float:
    return scheme.weight(u)


def _exhaustive(scheme, d, key):
    lw = scheme.all_log_weights(d)
    masks = np.arange(1 << d, dtype=np.int64)
    order_key = mask_cardinality(masks) if key == "card" else mask_ceiling(masks)
    # best log weight (smallest mask on ties) for each key value, then suffix maxima
    best = np.full(d + 2, -INF)
    arg = np.zeros(d + 2, dtype=np.int64)
    for k in range(1, d + 1):
        sel = np.flatnonzero(order_key == k)
        i = int(np.argmax(lw[sel]))
        best[k], arg[k] = lw[sel][i], sel[i]
    for s in range(1, d + 1):
        ref = lw[(1 << s) - 1] if key == "card" else lw[1 << (s - 1)]
        cand = best[s:d + 1]
        k = int(np.argmax(cand)) + s
        if best[k] > ref + REL_TOL:
            return ConditionVerdict(False, (Subset(int(arg[k]), d), s), d, "exhaustive")
    return ConditionVerdict(True, None, d, "exhaustive")


def _analytic_cardinality(scheme, d):
    j = np.arange(1, d + 1)
    logf = scheme.log_factors(j)
    logo = scheme.log_orders(j)
    first = logo + np.cumsum(logf)
    order_idx = np.argsort(-logf, kind="stable")
    best = logo + np.cumsum(logf[order_idx])
    for s in range(1, d + 1):
        r = int(np.argmax(best[s - 1:])) + s
        if best[r - 1] > first[s - 1] + REL_TOL:
            u = Subset.of((order_idx[:r] + 1).tolist(), d)
            return ConditionVerdict(False, (u, s), d, "analytic")
    return ConditionVerdict(True, None, d, "analytic")


def _analytic_index(scheme, d):
    j = np.arange(1, d + 1)
    logf = scheme.log_factors(j)
    logo = scheme.log_orders(j)
    best = np.empty(d)
    members: list[list[int]] = []
    if np.all(np.diff(logf) <= 0):
        # top r-1 indices below t are simply 1..r-1
        prefix = np.concatenate([[0.0], np.cumsum(logf)])
        run = np.maximum.accumulate(logo + prefix[:-1])
        arg = np.zeros(d, dtype=np.int64)
        cur = 0
        for t in range(d):
            if logo[t] + prefix[t] > logo[cur] + prefix[cur]:
                cur = t
            arg[t] = cur
        best = logf + run
        members = [list(range(1, int(arg[t]) + 1)) + [t + 1] for t in range(d)]
    else:
        if d > ANALYTIC_CAP:
            raise CapExceeded(f"non-monotone factors: index condition check capped at d={ANALYTIC_CAP}")
        for t in range(d):
            prev = np.argsort(-logf[:t], kind="stable")
            vals = logo[:t + 1] + np.concatenate([[0.0], np.cumsum(logf[prev])])
            r = int(np.argmax(vals))
            best[t] = logf[t] + vals[r]
            members.append(sorted((prev[:r] + 1).tolist()) + [t + 1])
    for s in range(1, d + 1):
        ref = logo[0] + logf[s - 1]
        t = int(np.argmax(best[s - 1:])) + s - 1
        if best[t] > ref + REL_TOL:
            return ConditionVerdict(False, (Subset.of(members[t], d), s), d, "analytic")
    return ConditionVerdict(True, None, d, "analytic")


def _verify(scheme, d, method, key):
    scheme.check_dim(d)
    exhaustive_fn = _exhaustive
    analytic_fn = _analytic_cardinality if key == "card" else _analytic_index
    if d == INF:
        if scheme.is_explicit:
            raise ValueError("explicit weights need a finite d")
        v = analytic_fn(scheme, INFINITE_PREFIX)
        if not v.holds or scheme.exact_infinite:
            return ConditionVerdict(v.holds, v.witness, INF if v.holds else v.verified_up_to, v.method)
        return v
    d = int(d)
    if method == "auto":
        method = "exhaustive" if scheme.is_explicit else "analytic"
    if method == "exhaustive":
        if d > ENUMERATION_CAP:
            raise CapExceeded(f"exhaustive subset enumeration capped at d={ENUMERATION_CAP}, got {d}")
        return exhaustive_fn(scheme, d, key)
    if scheme.is_explicit:
        raise ValueError("explicit weights support only exhaustive verification")
    return analytic_fn(scheme, d)


def verify_cardinality_condition(scheme: WeightScheme, d, method: str = "auto") -> ConditionVerdict:
    """Check that |u| >= s implies gamma_u <= gamma_{1:s} for s = 1..d.

    ``method`` is ``"exhaustive"`` (all 2**d subsets, d <= 20), ``"analytic"``
    (closed-form maxima for product/order/POD families) or ``"auto"``.
    """
    return _verify(scheme, d, method, "card")


def verify_index_condition(scheme: WeightScheme, d, method: str = "auto") -> ConditionVerdict:
    """Check that ceil(u) >= s implies gamma_u <= gamma_{{s}} for s = 1..d."""
    return _verify(scheme, d, method, "ceil")
