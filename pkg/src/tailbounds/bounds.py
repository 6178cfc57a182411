"""Even-moment upper bounds for sums of dependent random variables.

The engine here bounds E(X_1 + ... + X_n)^m for even m, for variables that
satisfy strong negative correlation (E X_i (X_1+...+X_{i-1})^l <= 0 for odd
l < m) together with per-variable bounds on conditional even moments
E(X_i^l | X_1+...+X_{i-1}).  Tail probabilities follow by Markov's
inequality applied to the m-th moment, optionally minimized over m.

All moment bounds are computed and stored in natural-log domain:
(48*n*m)^(m/2) overflows double precision already for modest m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping

import numpy as np
from scipy.special import logsumexp

from .errors import IncompleteProfileError, InvalidArgumentError, OutOfRegimeError

__all__ = [
    "BoundConstants",
    "BoundMethod",
    "MomentProfile",
    "TypicalProfile",
    "TailBoundResult",
    "theorem1_closed_bound",
    "theorem1_recursion_bound",
    "main_theorem_bound",
    "markov_tail",
    "optimize_m",
    "chernoff_corollary_bound",
    "general_chernoff_bound",
    "hoeffding_azuma_bound",
    "nearest_even",
]

_LOG_11_5 = math.log(11.0 / 5.0)


class BoundMethod(str, Enum):
    THEOREM1_CLOSED = "Theorem1Closed"
    THEOREM1_RECURSION = "Theorem1Recursion"
    MAIN_THEOREM = "MainTheorem"
    CHERNOFF_COROLLARY = "ChernoffCorollary"
    GENERAL_CHERNOFF = "GeneralChernoff"
    HOEFFDING_AZUMA = "HoeffdingAzuma"


@dataclass(frozen=True)
class BoundConstants:
    """Generic constants of the bound family.

    c_theorem1 is the explicit constant of the closed-form moment bound
    (48*n*m)^(m/2).  c_main plays the same role in the typical/worst-case
    bound.  c_mopt is the c in the moment-order rule m = t^2/(c*n); the
    Markov-minimizing choice for a (c1*n*m)^(m/2) moment bound is
    c_mopt = e*c1.  None of these are sharp; tests treat them as
    dominance/shape parameters, never as reproducible absolutes.
    """

    c_theorem1: float = 48.0
    c_main: float = 48.0
    c_mopt: float = 48.0 * math.e

    def __post_init__(self):
        if min(self.c_theorem1, self.c_main, self.c_mopt) <= 0:
            raise InvalidArgumentError("bound constants must be strictly positive")


DEFAULT_CONSTANTS = BoundConstants()


def _check_even_order(m, name="m"):
    if not isinstance(m, (int, np.integer)) or m < 2 or m % 2 != 0:
        raise InvalidArgumentError(f"{name} must be an even integer >= 2, got {m!r}")


def nearest_even(x, lo=2, hi=None):
    """Nearest even integer to x, clamped to [lo, hi].

    Exact half-way ties resolve by round-half-to-even on x/2.
    """
    m = 2 * int(round(x / 2.0))
    m = max(lo, m)
    if hi is not None:
        m = min(m, hi)
    return m


def _even_floor(n):
    return n if n % 2 == 0 else n - 1


class MomentProfile:
    """Per-variable upper bounds M_{i,l} on conditional even moments.

    Variables are indexed i = 1..n (matching the usual mathematical
    numbering); orders are even integers >= 2.  Values are stored in
    log domain; zeros are representable as -inf.
    """

    def __init__(self, n, orders, log_m):
        orders = tuple(int(o) for o in orders)
        if n < 1:
            raise InvalidArgumentError("n must be >= 1")
        if len(set(orders)) != len(orders) or sorted(orders) != list(orders):
            raise InvalidArgumentError("orders must be strictly ascending")
        for o in orders:
            _check_even_order(o, "order")
        log_m = np.asarray(log_m, dtype=float)
        if log_m.shape != (n, len(orders)):
            raise InvalidArgumentError(
                f"log_m must have shape ({n}, {len(orders)}), got {log_m.shape}"
            )
        if np.isnan(log_m).any():
            raise InvalidArgumentError("moment bounds must not be NaN")
        self.n = int(n)
        self.orders = orders
        self.log_m = log_m
        self._order_pos = {o: j for j, o in enumerate(orders)}

    @classmethod
    def from_values(cls, n, values: Mapping[tuple, float]):
        """Build from a map (i, l) -> M_{i,l} with 1-based variable index i."""
        orders = sorted({l for (_, l) in values})
        log_m = np.full((n, len(orders)), np.nan)
        pos = {o: j for j, o in enumerate(orders)}
        for (i, l), v in values.items():
            if not 1 <= i <= n:
                raise InvalidArgumentError(f"variable index {i} outside 1..{n}")
            if v < 0:
                raise InvalidArgumentError(f"moment bound M[{i},{l}] must be >= 0")
            log_m[i - 1, pos[l]] = -np.inf if v == 0 else math.log(v)
        if np.isnan(log_m).any():
            i, j = map(int, np.argwhere(np.isnan(log_m))[0])
            raise IncompleteProfileError(i + 1, orders[j])
        return cls(n, orders, log_m)

    @classmethod
    def uniform(cls, n, by_order: Mapping[int, float]):
        """Profile with M_{i,l} independent of i."""
        orders = sorted(by_order)
        row = []
        for o in orders:
            v = by_order[o]
            if v < 0:
                raise InvalidArgumentError(f"moment bound for order {o} must be >= 0")
            row.append(-np.inf if v == 0 else math.log(v))
        return cls(n, orders, np.tile(row, (n, 1)))

    def has(self, i, l):
        return 1 <= i <= self.n and l in self._order_pos

    def log_bound(self, i, l):
        if not self.has(i, l):
            raise IncompleteProfileError(i, l)
        return float(self.log_m[i - 1, self._order_pos[l]])

    def bound(self, i, l):
        return float(math.exp(self.log_bound(i, l))) if self.log_bound(i, l) > -np.inf else 0.0

    def is_uniform(self, rtol=1e-12):
        first = self.log_m[0]
        return bool(
            np.all(
                (self.log_m == first[None, :])
                | np.isclose(self.log_m, first[None, :], rtol=rtol, atol=0.0)
            )
        )

    def to_uniform(self):
        """Round-trip a uniform profile to its order -> value map."""
        if not self.is_uniform():
            raise InvalidArgumentError("profile is not uniform across variables")
        return {o: (0.0 if self.log_m[0, j] == -np.inf else math.exp(self.log_m[0, j]))
                for j, o in enumerate(self.orders)}

    def require_orders_through(self, m):
        for l in range(2, m + 1, 2):
            if l not in self._order_pos:
                raise IncompleteProfileError(1, l)


class TypicalProfile:
    """Worst-case bounds M_{i,l} plus typical-case bounds L_{i,l} and
    atypical-event probabilities delta_{i,l} = Pr(not typical)."""

    def __init__(self, base: MomentProfile, log_l, delta):
        log_l = np.asarray(log_l, dtype=float)
        delta = np.asarray(delta, dtype=float)
        shape = base.log_m.shape
        if log_l.shape != shape or delta.shape != shape:
            raise InvalidArgumentError(f"L and delta must have shape {shape}")
        if np.any((delta < 0) | (delta > 1)) or np.isnan(delta).any():
            raise InvalidArgumentError("delta values must lie in [0, 1]")
        # Typical never exceeds worst case; tolerate float fuzz only.
        if np.any(log_l > base.log_m + 1e-9):
            raise InvalidArgumentError("L values must not exceed the matching M values")
        self.base = base
        self.log_l = log_l
        self.delta = delta

    @classmethod
    def from_values(cls, base: MomentProfile, l_values: Mapping[tuple, float],
                    delta_values: Mapping[tuple, float]):
        n, orders = base.n, base.orders
        pos = {o: j for j, o in enumerate(orders)}
        log_l = np.full((n, len(orders)), np.nan)
        delta = np.full((n, len(orders)), np.nan)
        for (i, l), v in l_values.items():
            if v < 0:
                raise InvalidArgumentError(f"L[{i},{l}] must be >= 0")
            log_l[i - 1, pos[l]] = -np.inf if v == 0 else math.log(v)
        for (i, l), v in delta_values.items():
            delta[i - 1, pos[l]] = v
        if np.isnan(log_l).any() or np.isnan(delta).any():
            bad = np.argwhere(np.isnan(log_l) | np.isnan(delta))[0]
            raise IncompleteProfileError(int(bad[0]) + 1, orders[int(bad[1])])
        return cls(base, log_l, delta)

    @classmethod
    def uniform(cls, n, m_by_order, l_by_order, delta_by_order):
        base = MomentProfile.uniform(n, m_by_order)
        orders = base.orders
        log_l = np.tile(
            [(-np.inf if l_by_order[o] == 0 else math.log(l_by_order[o])) for o in orders],
            (n, 1),
        )
        delta = np.tile([float(delta_by_order[o]) for o in orders], (n, 1))
        return cls(base, log_l, delta)

    @property
    def n(self):
        return self.base.n


@dataclass(frozen=True)
class TailBoundResult:
    """A tail bound Pr(|sum| >= t) <= tail_probability obtained by Markov
    from a log-domain bound on the m_used-th moment."""

    t: float
    m_used: int
    moment_bound: float  # log domain
    tail_probability: float
    method: BoundMethod
    rate_constant: float | None = None  # realized c in the method's exp form, if any

    def __post_init__(self):
        expected = markov_tail(self.moment_bound, self.m_used, self.t)
        if not math.isclose(self.tail_probability, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise InvalidArgumentError(
                "tail_probability must equal min(1, exp(moment_bound - m*log t))"
            )


def theorem1_closed_bound(n, m, constants: BoundConstants = DEFAULT_CONSTANTS):
    """log of the closed-form moment bound (c1*n*m)^(m/2).

    Valid as a bound on E(sum X_i)^m when the variables satisfy strong
    negative correlation and E(X_i^l | X_1+...+X_{i-1}) <= (n/m)^((l-2)/2) l!
    for even l <= m; the caller asserts that hypothesis.
    """
    _check_even_order(m)
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    return (m / 2.0) * math.log(constants.c_theorem1 * n * m)


def theorem1_recursion_bound(profile: MomentProfile, m):
    """log of g(n, m), the dynamic-programming moment bound.

    g(i, 0) = 1; g(1, q) = M_{1,q}; and for i >= 2,

        g(i, q) = g(i-1, q) + (11/5) * sum over even t in [2, q] of
                  (q^t / t!) * M_{i,t} * g(i-1, q-t).

    g(n, m) upper-bounds E(sum X_i)^m whenever the profile's conditional
    moment bounds hold and the variables are strongly negatively
    correlated.  All arithmetic is log-sum-exp.
    """
    _check_even_order(m)
    profile.require_orders_through(m)
    if profile.n < 1:
        raise InvalidArgumentError("profile must cover at least one variable")
    qs = list(range(0, m + 1, 2))
    qpos = {q: j for j, q in enumerate(qs)}
    # i = 1 base row: g(1,0)=1, g(1,q)=M_{1,q}.
    g_prev = np.empty(len(qs))
    g_prev[0] = 0.0
    for q in qs[1:]:
        g_prev[qpos[q]] = profile.log_bound(1, q)
    for i in range(2, profile.n + 1):
        g_next = np.empty_like(g_prev)
        g_next[0] = 0.0
        for q in qs[1:]:
            terms = [g_prev[qpos[q]]]
            logq = math.log(q)
            for t in range(2, q + 1, 2):
                terms.append(
                    _LOG_11_5
                    + t * logq
                    - math.lgamma(t + 1)
                    + profile.log_bound(i, t)
                    + g_prev[qpos[q - t]]
                )
            g_next[qpos[q]] = logsumexp(terms)
        g_prev = g_next
    return float(g_prev[qpos[m]])


def main_theorem_bound(profile: TypicalProfile, m,
                       constants: BoundConstants = DEFAULT_CONSTANTS):
    """log of the typical/worst-case moment bound.

    With c = c_main, n variables, and hat-M_{i,2l} = M_{i,2l} *
    delta_{i,2l}^(2/(m-2l+2)), the bound on E(sum X_i)^m is

        (c*m)^(m/2) * ( sum_{l=1}^{m/2} (m^(1-1/l)/l^2)
                        * (sum_i L_{i,2l})^(1/l) )^(m/2)
      + (c*m)^m * sum_{l=1}^{m/2} (1/(n*l^2))
                        * sum_i (n * hat-M_{i,2l})^(m/(2l)),

    with the convention 0^(positive) = 0 so a zero delta removes the
    worst-case term for that (i, l) exactly.
    """
    _check_even_order(m)
    base = profile.base
    base.require_orders_through(m)
    n = base.n
    c = constants.c_main
    half = m // 2
    opos = base._order_pos

    with np.errstate(divide="ignore"):
        log_delta = np.log(profile.delta)

    typ_terms = []
    worst_terms = []
    for l in range(1, half + 1):
        j = opos[2 * l]
        # typical part: (m^(1-1/l)/l^2) * (sum_i L_{i,2l})^(1/l)
        log_sum_l = logsumexp(profile.log_l[:, j])
        typ_terms.append((1.0 - 1.0 / l) * math.log(m) - 2.0 * math.log(l)
                         + log_sum_l / l)
        # worst part: (1/(n l^2)) * sum_i (n M delta^(2/(m-2l+2)))^(m/2l)
        expo = 2.0 / (m - 2 * l + 2)
        log_hat = math.log(n) + base.log_m[:, j] + expo * log_delta[:, j]
        log_inner = logsumexp((m / (2.0 * l)) * log_hat)
        worst_terms.append(-math.log(n) - 2.0 * math.log(l) + log_inner)

    log_term1 = (m / 2.0) * (math.log(c * m) + logsumexp(typ_terms))
    log_term2 = m * math.log(c * m) + logsumexp(worst_terms)
    return float(np.logaddexp(log_term1, log_term2))


def markov_tail(moment_bound, m, t):
    """min(1, exp(moment_bound - m*log t)): Markov's inequality applied to
    the m-th moment, with moment_bound in log domain."""
    _check_even_order(m)
    if not t > 0:
        raise InvalidArgumentError(f"t must be > 0, got {t!r}")
    log_p = moment_bound - m * math.log(t)
    return 1.0 if log_p >= 0.0 else math.exp(log_p)


def optimize_m(bound_fn: Callable[[int], float], t, m_max,
               method: BoundMethod = BoundMethod.THEOREM1_CLOSED):
    """Exhaustively minimize markov_tail(bound_fn(m), m, t) over even m in
    [2, m_max]; ties resolve to the smaller m (weakest hypothesis).

    bound_fn maps an even order m to a log-domain moment bound.  Callers
    that know the number of variables n should pass m_max <= n.
    """
    _check_even_order(m_max, "m_max")
    if not t > 0:
        raise InvalidArgumentError(f"t must be > 0, got {t!r}")
    best = None
    for m in range(2, m_max + 1, 2):
        mb = bound_fn(m)
        p = markov_tail(mb, m, t)
        if best is None or p < best[0]:
            best = (p, m, mb)
    p, m, mb = best
    return TailBoundResult(t=float(t), m_used=m, moment_bound=mb,
                           tail_probability=p, method=method)


def chernoff_corollary_bound(n, sigma2, t,
                             constants: BoundConstants = DEFAULT_CONSTANTS):
    """Tail bound for variables with all conditional even moments <= sigma2
    (through the order used) and strong negative correlation, for
    0 < t <= n*sigma2.

    Applies the closed-form bound to the sigma-scaled variables with the
    moment order m = nearest even integer to t^2/(c_mopt*n*sigma2), clamped
    to [2, n]: tail <= (c_theorem1*n*m*sigma2/t^2)^(m/2).  rate_constant is
    the realized c in the equivalent form exp(-c*t^2/(n*sigma2)).
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if not sigma2 > 0:
        raise InvalidArgumentError("sigma2 must be > 0")
    if not t > 0:
        raise InvalidArgumentError("t must be > 0")
    if t > n * sigma2:
        raise OutOfRegimeError(
            f"t={t} exceeds n*sigma2={n * sigma2}; the bound requires t <= n*sigma2"
        )
    m = nearest_even(t * t / (constants.c_mopt * n * sigma2),
                     lo=2, hi=max(2, _even_floor(n)))
    moment = (m / 2.0) * math.log(constants.c_theorem1 * n * m * sigma2)
    p = markov_tail(moment, m, t)
    rate = 0.0 if p >= 1.0 else -math.log(p) * (n * sigma2) / (t * t)
    return TailBoundResult(t=float(t), m_used=m, moment_bound=moment,
                           tail_probability=p,
                           method=BoundMethod.CHERNOFF_COROLLARY,
                           rate_constant=rate)


def general_chernoff_bound(nu, t, constants: BoundConstants = DEFAULT_CONSTANTS):
    """Tail bound for sums of independent centered Bernoulli-type variables
    with nu = sum of the individual means.

    Uses m = nearest even integer >= 2 to t^2/(2*(nu+t)) and the moment
    bound (c_main*m*(nu+m))^(m/2), so tail <= (c_main*m*(nu+m)/t^2)^(m/2).
    rate_constant is the realized c in exp(-c*t^2/(2*(nu+t))).
    """
    if not nu > 0:
        raise InvalidArgumentError("nu must be > 0")
    if not t > 0:
        raise InvalidArgumentError("t must be > 0")
    m = nearest_even(t * t / (2.0 * (nu + t)), lo=2)
    moment = (m / 2.0) * math.log(constants.c_main * m * (nu + m))
    p = markov_tail(moment, m, t)
    rate = 0.0 if p >= 1.0 else -math.log(p) * 2.0 * (nu + t) / (t * t)
    return TailBoundResult(t=float(t), m_used=m, moment_bound=moment,
                           tail_probability=p,
                           method=BoundMethod.GENERAL_CHERNOFF,
                           rate_constant=rate)


def hoeffding_azuma_bound(n, t, constants: BoundConstants = DEFAULT_CONSTANTS,
                          m_max=None):
    """Tail bound for |X_i| <= 1 martingale-difference-style variables:
    the closed-form moment bound minimized over even m <= n."""
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    if m_max is None:
        m_max = max(2, _even_floor(n))
    res = optimize_m(lambda m: theorem1_closed_bound(n, m, constants), t, m_max,
                     method=BoundMethod.HOEFFDING_AZUMA)
    p = res.tail_probability
    rate = 0.0 if p >= 1.0 else -math.log(p) * n / (t * t)
    return TailBoundResult(t=res.t, m_used=res.m_used,
                           moment_bound=res.moment_bound, tail_probability=p,
                           method=BoundMethod.HOEFFDING_AZUMA,
                           rate_constant=rate)
