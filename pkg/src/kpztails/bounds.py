"""Tail-probability envelopes for the scaled KPZ height.

Every function here evaluates a printed envelope formula, never an equality:
the underlying statements are asymptotic with absolute constants that are not
pinned down, so the constants (K, K1, K2, s0) are explicit user parameters
defaulting to 1 and all comparisons against simulation are one-sided
non-violation checks.  Raw envelope values may exceed 1; clamping is the
caller's job.

Conventions
-----------
Lower-tail envelopes bound P(height <= -s); upper-tail envelopes bound
P(height >= s).  Two-sided statements produce a (value_lower, value) pair
with e^(-c1 s^(3/2)) <= P <= e^(-c2 s^(3/2)), c1 > c2.  The coefficient
regimes i/ii/iii split on how s compares to T^(2/3); they are only asserted
for T > pi, and below that the result carries regime "none" with a vacuous
envelope (inf raw, clamping to 1).  Lower-tail results are labelled by the
dominant of the three summands: I_low (deep, s >> T^(2/3)), II_low
(intermediate), III_low (shallow).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

NOTE_CONSTANTS = "asymptotic statement; absolute constants not specified"
NOTE_SMALL_T = ("coefficient regimes require T > pi; only qualitative "
                "envelopes exist here (vacuous value returned)")
NOTE_BELOW_S0 = "s below the validity threshold s0; envelope vacuous"

LOWER_TAIL_REGIMES = ("I_low", "II_low", "III_low")


@dataclass(frozen=True)
class BoundQuery:
    """Envelope request: theorem family, tail location, and parameters."""

    theorem: str
    s: float
    T: float
    eps: float = 0.1
    delta: float = 0.1
    mu: float = 0.1
    zeta: float = 0.1
    constants: dict = field(default_factory=lambda: {"K": 1.0, "K1": 1.0,
                                                     "K2": 1.0, "s0": 1.0})

    THEOREMS = ("general_lower", "nw_lower", "nw_upper", "general_upper",
                "brownian_lower", "brownian_upper", "nw_upper_laplace")

    def __post_init__(self) -> None:
        if self.theorem not in self.THEOREMS:
            raise ValueError(f"unknown theorem family {self.theorem!r}")
        if self.s <= 0 or self.T <= 0:
            raise ValueError("s and T must be positive")


@dataclass(frozen=True)
class BoundResult:
    """Envelope value plus regime/coefficient metadata.

    value is the upper envelope on the tail probability; value_lower, when
    present, is the matching lower envelope of a two-sided statement.
    """

    value: float
    regime: str
    c1: Optional[float] = None
    c2: Optional[float] = None
    value_lower: Optional[float] = None
    validity_note: str = NOTE_CONSTANTS

    def __post_init__(self) -> None:
        # mathematically > 0; exact 0.0 is float underflow at huge s
        if not (self.value >= 0 or math.isinf(self.value) or math.isnan(self.value)):
            raise ValueError("envelope value must be nonnegative")
        if self.c1 is not None and self.c2 is not None and not self.c1 > self.c2:
            raise ValueError(f"need c1 > c2, got {self.c1} <= {self.c2}")

    @property
    def pair(self):
        """(lower, upper) envelope pair for two-sided statements."""
        return (self.value_lower, self.value)


def _check_range(name: str, value: float, lo: float, hi: float) -> None:
    if not lo < value < hi:
        raise ValueError(f"{name} must lie in ({lo}, {hi}), got {value}")


def _lower_tail_terms(s: float, T: float, eps: float, delta: float, K: float):
    """The three summands of the general lower-tail envelope."""
    t13 = T ** (1.0 / 3.0)
    e1 = t13 * 4.0 * (1.0 - eps) * s ** 2.5 / (15.0 * math.pi)
    e2 = K * s ** (3.0 - delta) + eps * s * t13
    e3 = (1.0 - eps) * s**3 / 12.0
    return (math.exp(-e1), math.exp(-e2), math.exp(-e3))


def lower_tail_upper_general(s: float, T: float, eps: float, delta: float,
                             K: float = 1.0) -> BoundResult:
    """Upper envelope for the lower tail P(h(0) <= -s), general initial data.

    Three-term sum exp(-T^(1/3) 4(1-eps) s^(5/2) / (15 pi))
    + exp(-K s^(3-delta) - eps s T^(1/3)) + exp(-(1-eps) s^3 / 12).
    The regime label reports which summand dominates.
    """
    _check_range("eps", eps, 0.0, 1.0 / 3.0)
    _check_range("delta", delta, 0.0, 1.0 / 3.0)
    if K <= 0:
        raise ValueError("K must be positive")
    if s <= 0 or T <= 0:
        raise ValueError("s and T must be positive")
    terms = _lower_tail_terms(s, T, eps, delta, K)
    regime = LOWER_TAIL_REGIMES[max(range(3), key=lambda i: terms[i])]
    return BoundResult(value=sum(terms), regime=regime)


def brownian_lower_tail(s: float, T: float, eps: float, delta: float,
                        K: float = 1.0) -> BoundResult:
    """Lower-tail envelope for Brownian initial data; identical term-for-term
    to the general-initial-data envelope."""
    return lower_tail_upper_general(s, T, eps, delta, K)


def nw_lower_tail(s: float, T: float, eps: float, delta: float,
                  K1: float = 1.0, K2: float = 1.0):
    """Narrow-wedge lower tail: (upper envelope, lower envelope) pair.

    The upper envelope is the same three-term sum with constant K1; the lower
    envelope is exp(-T^(1/3) 4 s^(5/2) (1+eps) / (15 pi)) + exp(-K2 s^3).
    """
    upper = lower_tail_upper_general(s, T, eps, delta, K1)
    if K2 <= 0:
        raise ValueError("K2 must be positive")
    t13 = T ** (1.0 / 3.0)
    lo = (math.exp(-t13 * 4.0 * s**2.5 * (1.0 + eps) / (15.0 * math.pi))
          + math.exp(-K2 * s**3))
    lower = BoundResult(value=lo, regime=upper.regime)
    return upper, lower


def classify_regime(s: float, T: float, eps: float, theorem: str,
                    mu: Optional[float] = None, s0: float = 0.0) -> str:
    """Regime label i/ii/iii for the upper-tail coefficient statements.

    Thresholds: regime i for s < lo, regime ii for s >= hi (ties at hi belong
    to ii, the printed interval being closed there), iii between.  For the
    general-data variant both thresholds carry the (1 - 2 mu/3)^(-1) factor
    and regime i uses eps^3 in place of eps^2.  T <= pi (or s below s0) has
    no coefficient statement and maps to "none".
    """
    if theorem not in ("nw_upper", "general_upper"):
        raise ValueError("regimes exist only for the upper-tail statements")
    if T <= math.pi or s < s0:
        return "none"
    t23 = T ** (2.0 / 3.0)
    if theorem == "nw_upper":
        lo = eps**2 * t23 / 8.0
        hi = (9.0 / 16.0) * t23 / eps**2
    else:
        if mu is None:
            raise ValueError("mu required for the general-data regimes")
        fac = 1.0 / (1.0 - 2.0 * mu / 3.0)
        lo = eps**3 * fac * t23 / 8.0
        hi = (9.0 / 16.0) * fac * t23 / eps**2
    if s >= hi:
        return "ii"
    if s < lo:
        return "i"
    return "iii"


def nw_upper_tail(s: float, T: float, eps: float, s0: float = 1.0) -> BoundResult:
    """Narrow-wedge upper tail: e^(-c1 s^(3/2)) <= P(upsilon(0) >= s)
    <= e^(-c2 s^(3/2)) with regime-dependent coefficients.

    i:   c1 = (4/3)(1+eps),  c2 = (4/3)(1-eps)
    ii:  c1 = 4 sqrt(3)(1+eps), c2 = (4/3)(1-eps)
    iii: c1 = 2^(7/2) eps^(-3), c2 = (4/3) eps
    """
    _check_range("eps", eps, 0.0, 0.5)
    regime = classify_regime(s, T, eps, "nw_upper", s0=s0)
    if regime == "none":
        note = NOTE_SMALL_T if T <= math.pi else NOTE_BELOW_S0
        return BoundResult(value=math.inf, regime="none", value_lower=0.0,
                           validity_note=f"{NOTE_CONSTANTS}; {note}")
    if regime == "i":
        c1, c2 = (4.0 / 3.0) * (1.0 + eps), (4.0 / 3.0) * (1.0 - eps)
    elif regime == "ii":
        c1, c2 = 4.0 * math.sqrt(3.0) * (1.0 + eps), (4.0 / 3.0) * (1.0 - eps)
    else:
        c1, c2 = 2.0**3.5 / eps**3, (4.0 / 3.0) * eps
    s32 = s**1.5
    return BoundResult(value=math.exp(-c2 * s32), regime=regime, c1=c1, c2=c2,
                       value_lower=math.exp(-c1 * s32))


def general_upper_tail(s: float, T: float, eps: float, mu: float,
                       s0: float = 1.0) -> BoundResult:
    """Upper tail for general initial data, two-sided coefficient pair.

    i:   c1 = (8/3)(1+mu)(1+eps),   c2 = (sqrt(2)/3)(1-mu)(1-eps)
    ii:  c1 = 8 sqrt(3)(1+mu)(1+eps), c2 as in i
    iii: c1 = 2^(9/2) eps^(-3) (1+mu), c2 = (sqrt(2)/3)(1-mu) eps
    """
    _check_range("eps", eps, 0.0, 0.5)
    _check_range("mu", mu, 0.0, 0.5)
    regime = classify_regime(s, T, eps, "general_upper", mu=mu, s0=s0)
    if regime == "none":
        note = NOTE_SMALL_T if T <= math.pi else NOTE_BELOW_S0
        return BoundResult(value=math.inf, regime="none", value_lower=0.0,
                           validity_note=f"{NOTE_CONSTANTS}; {note}")
    root2_3 = math.sqrt(2.0) / 3.0
    if regime == "i":
        c1 = (8.0 / 3.0) * (1.0 + mu) * (1.0 + eps)
        c2 = root2_3 * (1.0 - mu) * (1.0 - eps)
    elif regime == "ii":
        c1 = 8.0 * math.sqrt(3.0) * (1.0 + mu) * (1.0 + eps)
        c2 = root2_3 * (1.0 - mu) * (1.0 - eps)
    else:
        c1 = 2.0**4.5 / eps**3 * (1.0 + mu)
        c2 = root2_3 * (1.0 - mu) * eps
    s32 = s**1.5
    return BoundResult(value=math.exp(-c2 * s32), regime=regime, c1=c1, c2=c2,
                       value_lower=math.exp(-c1 * s32))


def brownian_upper_tail(s: float, T: float, eps: float, mu: float,
                        s0: float = 1.0) -> BoundResult:
    """Upper tail for Brownian initial data.

    Lower envelope e^(-c1 s^(3/2)); upper envelope e^(-c2 s^(3/2))
    + e^(-(mu s)^(3/2)/(9 sqrt 3)), coefficients from the general-data
    regimes.
    """
    base = general_upper_tail(s, T, eps, mu, s0=s0)
    if base.regime == "none":
        return base
    extra = math.exp(-((mu * s) ** 1.5) / (9.0 * math.sqrt(3.0)))
    return BoundResult(value=base.value + extra, regime=base.regime,
                       c1=base.c1, c2=base.c2, value_lower=base.value_lower,
                       validity_note=base.validity_note)


def nw_upper_laplace_bounds(s: float, T: float, eps: float, zeta: float):
    """Two envelope values from the Laplace-functional route to the
    narrow-wedge upper tail.

    upper      = e^(-T^(1/3) zeta s) + e^(-(4/3)(1-eps) s^(3/2))
    lower_side = e^(-T^(1/3)(1+zeta) s) + e^(-(4/3)(1+eps) s^(3/2))
    Requires 0 < zeta <= eps < 1.
    """
    if not 0.0 < zeta <= eps < 1.0:
        raise ValueError(f"need 0 < zeta <= eps < 1, got zeta={zeta}, eps={eps}")
    t13 = T ** (1.0 / 3.0)
    s32 = s**1.5
    upper = math.exp(-t13 * zeta * s) + math.exp(-(4.0 / 3.0) * (1.0 - eps) * s32)
    lower_side = (math.exp(-t13 * (1.0 + zeta) * s)
                  + math.exp(-(4.0 / 3.0) * (1.0 + eps) * s32))
    return (BoundResult(value=upper, regime="none"),
            BoundResult(value=lower_side, regime="none"))


def evaluate_query(q: BoundQuery):
    """Dispatch a BoundQuery to its envelope function.

    Returns a list of (label, BoundResult) rows, one per envelope the theorem
    family provides; labels are "upper" (bound on the tail probability) and
    "lower" (lower bound on the same probability, or the lower-side quantity
    for the Laplace route).
    """
    c = q.constants
    K = c.get("K", 1.0)
    K1 = c.get("K1", 1.0)
    K2 = c.get("K2", 1.0)
    s0 = c.get("s0", 1.0)
    if q.theorem == "general_lower":
        return [("upper", lower_tail_upper_general(q.s, q.T, q.eps, q.delta, K))]
    if q.theorem == "brownian_lower":
        return [("upper", brownian_lower_tail(q.s, q.T, q.eps, q.delta, K))]
    if q.theorem == "nw_lower":
        up, lo = nw_lower_tail(q.s, q.T, q.eps, q.delta, K1, K2)
        return [("upper", up), ("lower", lo)]
    if q.theorem == "nw_upper":
        r = nw_upper_tail(q.s, q.T, q.eps, s0=s0)
        return [("two_sided", r)]
    if q.theorem == "general_upper":
        r = general_upper_tail(q.s, q.T, q.eps, q.mu, s0=s0)
        return [("two_sided", r)]
    if q.theorem == "brownian_upper":
        r = brownian_upper_tail(q.s, q.T, q.eps, q.mu, s0=s0)
        return [("two_sided", r)]
    up, lo = nw_upper_laplace_bounds(q.s, q.T, q.eps, q.zeta)
    return [("upper", up), ("lower", lo)]
