"""Closed-form bounds and induction thresholds, plus the effective
Cebotarev count check with its brute-force counterpart.

Real-valued bounds are handled in exact rational arithmetic; square and
fourth roots are bracketed by integer-root intervals that get refined
until the comparison is decided, so acceptance never depends on floating
point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

from .errors import (BudgetExceeded, GenusZero, InapplicableDegree,
                     MalformedInput, NotNormal, UnsupportedRamifiedPrime)
from .extension import Extension, splits_completely
from .ffpoly import primes_of_degree

SPLIT_SCAN_BUDGET = 10 ** 6


def clg_lower_bound(q_prime: int, genus: int) -> Fraction:
    """(q'-1)(q'^2g - 2g q'^g + 1) / (2g (q'^(g+1) - 1)), exact."""
    if genus < 1:
        raise GenusZero("the class-number bound is stated for genus >= 1")
    num = (q_prime - 1) * (q_prime ** (2 * genus)
                           - 2 * genus * q_prime ** genus + 1)
    den = 2 * genus * (q_prime ** (genus + 1) - 1)
    return Fraction(num, den)


def genus_upper_from_classnumber(q: int, h: int) -> float:
    """8 + 2 log_q(h)."""
    if h < 1:
        raise MalformedInput("class number must be >= 1")
    return 8.0 + 2.0 * math.log(h, q)


def genus_bound_holds(q: int, h: int, genus: int) -> bool:
    """genus <= 8 + 2 log_q(h), decided exactly: q^(genus-8) <= h^2."""
    if genus <= 8:
        return True
    return q ** (genus - 8) <= h * h


def castelnuovo_normal_closure(r: int, genus_fprime: int) -> int:
    """(r-1) r^r + r^r g(F'), the genus bound for the normal closure of a
    degree-r separable extension."""
    if r < 1:
        raise MalformedInput("r must be >= 1")
    return (r - 1) * r ** r + r ** r * genus_fprime


def castelnuovo_pairwise(r_prime: int, genus: int) -> int:
    """Single compositum step: 2 r' g + r'^2."""
    return 2 * r_prime * genus + r_prime ** 2


# ---------------------------------------------------------------------------
# Effective Cebotarev


@dataclass(frozen=True)
class CebotarevParams:
    q: int          # base constant field size
    i: int          # target prime degree
    n: int          # constant-extension degree of E'/F
    k: int          # geometric extension degree
    g: int          # genus of E'
    d: int = 1      # [F : F_q(theta)], 1 for F = F_q(t) with theta = t

    def __post_init__(self):
        if min(self.q, self.i, self.n, self.k, self.d) < 1 or self.g < 0:
            raise MalformedInput("Cebotarev parameters must be nonnegative")

    def check_applicable(self) -> None:
        if self.i % self.n != 0:
            raise InapplicableDegree(
                f"the bound needs n | i; n = {self.n}, i = {self.i}")


def _iroot4(n: int) -> int:
    return math.isqrt(math.isqrt(n))


def _root_bounds(n: int, quarter: bool, scale_digits: int) -> Tuple[Fraction, Fraction]:
    """Rational bracket for n^(1/2) (or n^(1/4) when quarter)."""
    s = 10 ** scale_digits
    if quarter:
        lo = _iroot4(n * s ** 4)
    else:
        lo = math.isqrt(n * s * s)
    return Fraction(lo, s), Fraction(lo + 1, s)


def _power_bounds(q: int, i: int, denom: int,
                  scale_digits: int) -> Tuple[Fraction, Fraction]:
    """Bracket for q^(i/denom), denom in {2, 4}."""
    if i % denom == 0:
        v = Fraction(q ** (i // denom))
        return v, v
    if denom == 2:
        return _root_bounds(q ** i, False, scale_digits)
    if i % 2 == 0:
        return _root_bounds(q ** (i // 2), False, scale_digits)
    return _root_bounds(q ** i, True, scale_digits)


def cebotarev_bound(params: CebotarevParams) -> float:
    """(2/(ik)) ((k+g) q^(i/2) + k (2g+1) q^(i/4) + g + dk), as a float for
    display; the decision in cebotarev_check is exact."""
    params.check_applicable()
    lo, hi = _bound_interval(params, 12)
    return float((lo + hi) / 2)


def cebotarev_main_term(params: CebotarevParams) -> Fraction:
    return Fraction(params.q ** params.i, params.i * params.k)


def _bound_interval(params: CebotarevParams,
                    scale_digits: int) -> Tuple[Fraction, Fraction]:
    q, i, k, g, d = params.q, params.i, params.k, params.g, params.d
    half_lo, half_hi = _power_bounds(q, i, 2, scale_digits)
    quart_lo, quart_hi = _power_bounds(q, i, 4, scale_digits)
    factor = Fraction(2, i * k)
    lo = factor * ((k + g) * half_lo + k * (2 * g + 1) * quart_lo + g + d * k)
    hi = factor * ((k + g) * half_hi + k * (2 * g + 1) * quart_hi + g + d * k)
    return lo, hi


def cebotarev_deviation_below_bound(params: CebotarevParams,
                                    count: int) -> bool:
    """|count - q^i/(ik)| < bound, decided in exact rational arithmetic by
    refining the root brackets until the comparison separates."""
    params.check_applicable()
    dev = abs(Fraction(count) - cebotarev_main_term(params))
    for scale in (6, 12, 24, 48, 96):
        lo, hi = _bound_interval(params, scale)
        if dev < lo:
            return True
        if dev >= hi:
            return False
    raise AssertionError("root refinement failed to separate the comparison")


# ---------------------------------------------------------------------------
# Split-prime counting


def cebotarev_params_for(ext: Extension, i: int) -> CebotarevParams:
    n = ext.const_degree
    k = ext.m // n
    return CebotarevParams(ext.base.size, i, n, k, ext.genus, 1)


def _require_normal(ext: Extension) -> None:
    if ext.kind == "constant":
        return
    if ext.kind == "kummer":
        n = ext.params["n"]
        if (ext.base.size - 1) % n == 0:
            return
        raise NotNormal(
            f"Kummer degree {n} needs q = 1 mod n for normality")
    raise NotNormal(f"{ext.kind} extensions are not normal by construction")


def count_split_primes(ext: Extension, i: int,
                       budget: int = SPLIT_SCAN_BUDGET) -> int:
    """Number of degree-i primes that split completely in E'/F (and are
    unramified over F_q(theta) = F, which is automatic here)."""
    _require_normal(ext)
    if ext.base.size ** i > budget:
        raise BudgetExceeded(f"degree-{i} scan exceeds the budget")
    count = 0
    for prime in primes_of_degree(ext.base, i):
        try:
            if splits_completely(ext, prime):
                count += 1
        except UnsupportedRamifiedPrime:
            continue  # ramified primes never split completely
    return count


@dataclass
class CebotarevReport:
    count: int
    main_term: Fraction
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {"schema": 1, "count": self.count,
                "main_term": float(self.main_term),
                "main_term_exact": str(self.main_term),
                "bound": self.bound, "holds": self.holds}


def cebotarev_check(ext: Extension, i: int,
                    budget: int = SPLIT_SCAN_BUDGET) -> CebotarevReport:
    params = cebotarev_params_for(ext, i)
    params.check_applicable()
    count = count_split_primes(ext, i, budget)
    holds = cebotarev_deviation_below_bound(params, count)
    return CebotarevReport(count, cebotarev_main_term(params),
                           cebotarev_bound(params), holds)


# ---------------------------------------------------------------------------
# Induction thresholds


def induction_threshold(kp_size: int, r: int, s: int, deg_z: int) -> int:
    """|k(p)|^((r-1)(2^s - 1)) * deg(Z)^(2^s), exact."""
    if s < 1:
        raise MalformedInput("the induction threshold needs s >= 1")
    if kp_size < 2 or r < 1 or deg_z < 1:
        raise MalformedInput("arguments must be positive")
    return kp_size ** ((r - 1) * (2 ** s - 1)) * deg_z ** (2 ** s)


def separable_N(r: int, s: int) -> int:
    """N = 2(r-1)(2^s - 1) + r^2 2^(s+1), exact."""
    if s < 0 or r < 1:
        raise MalformedInput("need r >= 1 and s >= 0")
    return 2 * (r - 1) * (2 ** s - 1) + r * r * 2 ** (s + 1)


def bezout(deg_v: int, deg_w: int) -> int:
    """deg(V cap W) <= deg V * deg W: the ledger value."""
    if deg_v < 1 or deg_w < 1:
        raise MalformedInput("degrees must be positive")
    return deg_v * deg_w


def hecke_pullback(deg: int, index: int) -> int:
    """deg T_g(X) <= index * deg X: the ledger value."""
    if deg < 1 or index < 1:
        raise MalformedInput("arguments must be positive")
    return deg * index
