"""Finite extensions F'/F with one place over infinity: construction,
prime splitting, place counting, zeta numerator, class number, and the
predegree machinery.

Four shapes are constructible.  Constant extensions adjoin constants,
Kummer extensions adjoin x with x^n = a(t) (n prime to the
characteristic and to deg a, so infinity is totally ramified and the
defining polynomial is irreducible by the Eisenstein criterion at
infinity), Artin-Schreier extensions adjoin x with x^p - x = a(t)
(pole order at infinity prime to p after the standard reduction), and
the generic shape trusts caller-supplied genus and infinity data.

Splitting at an unramified prime reads the irreducible factors of the
defining polynomial over the residue field; ramified primes are handled
by the constructor's closed form or refused.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import (BudgetExceeded, MalformedInput, MultipleInfinitePlaces,
                     ReducibleDefiningPolynomial, UnsupportedRamifiedPrime,
                     UnsupportedShape)
from .ffpoly import (FiniteField, Poly, Prime, field_from_str, ord_at,
                     poly_factor, poly_from_str, poly_to_str,
                     primes_of_degree, residue_field)
from .localfield import (DEFAULT_BUDGET, Lattice, OrderStructure,
                         saturate_lattice, stabilizer_index)

PLACE_BUDGET = 10 ** 6


@dataclass(frozen=True)
class PlaceFactor:
    """One place above a prime: ramification index e, residue degree f
    (both over F), and the defining factor over k(p) when available."""
    e: int
    f: int
    factor: Optional[tuple] = None  # coefficient tuple over k(p)

    @property
    def local_degree(self) -> int:
        return self.e * self.f


@dataclass(frozen=True)
class SplittingType:
    prime: Prime
    places: Tuple[PlaceFactor, ...]
    unramified: bool

    def degree_one_place(self) -> Optional[PlaceFactor]:
        for pl in self.places:
            if pl.local_degree == 1:
                return pl
        return None


class Extension:
    """A finite extension F'/F = F_q(t) with exactly one place over
    infinity, presented by the minimal polynomial of a generator y."""

    def __init__(self, kind: str, base: FiniteField, m: int, genus: int,
                 q_prime: int, x_coeffs: Sequence[Poly],
                 ram_support: Dict[Prime, Tuple[Tuple[int, int], ...]],
                 maximality_bad: frozenset, inf_ram: Tuple[int, int],
                 separable: bool, const_degree: int, params: dict):
        self.kind = kind
        self.base = base
        self.m = m
        self.genus = genus
        self.q_prime = q_prime
        self.x_coeffs = tuple(x_coeffs)  # monic in x, coefficients in A
        self.ram_support = dict(ram_support)
        self.maximality_bad = maximality_bad
        self.inf_ram = inf_ram  # (e, f) over F at the unique infinite place
        self.separable = separable
        self.const_degree = const_degree  # [F_{q'} : F_q]
        self.params = params
        assert self.inf_ram[1] % self.const_degree == 0

    @property
    def infinite_place_degree(self) -> int:
        """Degree of the unique infinite place over F_{q'}."""
        return self.inf_ram[1] // self.const_degree

    # -- constructors --------------------------------------------------------

    @staticmethod
    def constant(base: FiniteField, n: int) -> "Extension":
        if n < 1:
            raise MalformedInput("constant degree must be >= 1")
        if n == 1:
            coeffs = [-Poly.one(base), Poly.one(base)]
        else:
            modulus = _first_irreducible(base, n)
            coeffs = [Poly.const(base, c) for c in modulus.coeffs]
        return Extension("constant", base, n, 0, base.size ** n, coeffs,
                         {}, frozenset(), (1, n), True, n, {"n": n})

    @staticmethod
    def kummer(base: FiniteField, n: int, a: Poly) -> "Extension":
        p = base.p
        if n < 2:
            raise MalformedInput("Kummer degree must be >= 2")
        if n % p == 0:
            raise UnsupportedShape("Kummer degree must be prime to q")
        if a.degree < 1:
            raise UnsupportedShape("Kummer radicand must be non-constant")
        import math
        if math.gcd(n, a.degree) != 1:
            raise UnsupportedShape(
                "only deg(a) prime to n is supported (certifies a single "
                "totally ramified place over infinity)")
        fac = poly_factor(a)
        ram: Dict[Prime, Tuple[Tuple[int, int], ...]] = {}
        bad = set()
        genus_sum = 0
        for f, mult in fac:
            pr = Prime(f, check=False)
            mres = mult % n
            if mres != 0:
                g = math.gcd(n, mres)
                if g == 1:
                    ram[pr] = ((n, 1),)
                else:
                    ram[pr] = None  # mixed tame case: refuse at use site
                genus_sum += g * (n // g - 1) * pr.degree
            if mult >= 2:
                bad.add(pr)
        genus_sum += n - 1  # totally ramified infinite place
        two_g = -2 * n + genus_sum
        assert two_g % 2 == 0 and two_g >= -2
        genus = (two_g + 2) // 2
        coeffs = [-a] + [Poly.zero(base)] * (n - 1) + [Poly.one(base)]
        return Extension("kummer", base, n, genus, base.size, coeffs,
                         ram, frozenset(bad), (n, 1), True, 1,
                         {"n": n, "a": a})

    @staticmethod
    def artin_schreier(base: FiniteField, a: Poly) -> "Extension":
        p = base.p
        a = _artin_schreier_reduce(base, a)
        if a.degree < 1:
            raise UnsupportedShape(
                "radicand reduces to a constant; use a constant extension")
        if a.degree % p == 0:
            raise UnsupportedShape(
                "pole order at infinity stays divisible by p after reduction")
        genus = (p - 1) * (a.degree - 1) // 2
        coeffs = [-a, -Poly.one(base)] + [Poly.zero(base)] * (p - 2) + \
            [Poly.one(base)]
        return Extension("artin_schreier", base, p, genus, base.size, coeffs,
                         {}, frozenset(), (p, 1), True, 1, {"a": a})

    @staticmethod
    def generic(base: FiniteField, x_coeffs: Sequence[Poly], genus: int,
                infinity_places: int = 1,
                inf_ram: Tuple[int, int] = (1, 1),
                q_prime: Optional[int] = None) -> "Extension":
        if infinity_places != 1:
            raise MultipleInfinitePlaces(
                "the datum requires exactly one place over infinity")
        coeffs = list(x_coeffs)
        if not coeffs or not coeffs[-1].is_one():
            raise MalformedInput("defining polynomial must be monic in x")
        m = len(coeffs) - 1
        if m < 1:
            raise ReducibleDefiningPolynomial("degree must be >= 1")
        # separable iff the formal x-derivative is nonzero
        deriv_nonzero = any(not coeffs[i].is_zero() and i % base.p != 0
                            for i in range(1, m + 1))
        qp = q_prime or base.size
        n_const = 1
        while base.size ** n_const < qp:
            n_const += 1
        if base.size ** n_const != qp:
            raise MalformedInput("q_prime must be a power of the base size")
        if deriv_nonzero:
            disc_primes = _discriminant_support(base, coeffs)
            ram = {pr: None for pr in disc_primes}
            return Extension("generic", base, m, genus, qp, coeffs, ram,
                             frozenset(disc_primes), inf_ram, True, n_const, {})
        # inseparable: only the pure shape x^(p^s) = a is supported
        inner = [i for i in range(1, m) if not coeffs[i].is_zero()]
        if inner or not _is_prime_power(m, base.p):
            raise UnsupportedShape(
                "inseparable defining polynomials are supported only in the "
                "pure form x^(p^s) - a")
        a = -coeffs[0]
        if _is_pth_power(base, a):
            raise ReducibleDefiningPolynomial("a is a p-th power in F")
        return Extension("generic", base, m, genus, qp, coeffs, {},
                         frozenset(), (m, 1), False, n_const, {"a": a})

    # -- serialization -------------------------------------------------------

    @staticmethod
    def from_json(spec: dict) -> "Extension":
        try:
            kind = spec["kind"]
            base = field_from_str(str(spec["base"]))
        except KeyError as exc:
            raise MalformedInput(f"extension spec missing {exc}") from exc
        if kind == "constant":
            return Extension.constant(base, int(spec["n"]))
        if kind == "kummer":
            return Extension.kummer(base, int(spec["n"]),
                                    poly_from_str(spec["a"], base))
        if kind == "artin_schreier":
            return Extension.artin_schreier(base, poly_from_str(spec["a"], base))
        if kind == "generic":
            coeffs = [poly_from_str(s, base) for s in spec["f"]]
            inf_ram = tuple(spec.get("infinity_ram", (1, 1)))
            return Extension.generic(base, coeffs, int(spec["genus"]),
                                     int(spec.get("infinity_places", 1)),
                                     (int(inf_ram[0]), int(inf_ram[1])),
                                     spec.get("q_prime"))
        raise MalformedInput(f"unknown extension kind {kind!r}")

    def to_json(self) -> dict:
        out = {"kind": self.kind, "base": str(self.base)}
        if self.kind == "constant":
            out["n"] = self.params["n"]
        elif self.kind == "kummer":
            out["n"] = self.params["n"]
            out["a"] = poly_to_str(self.params["a"])
        elif self.kind == "artin_schreier":
            out["a"] = poly_to_str(self.params["a"])
        else:
            out["f"] = [poly_to_str(c) for c in self.x_coeffs]
            out["genus"] = self.genus
            out["infinity_places"] = 1
            out["infinity_ram"] = list(self.inf_ram)
            if self.q_prime != self.base.size:
                out["q_prime"] = self.q_prime
        return out

    def __repr__(self):
        return f"Extension({self.to_json()!r})"


def make_extension(spec: dict) -> Extension:
    return Extension.from_json(spec)


def _first_irreducible(field: FiniteField, degree: int) -> Poly:
    from .ffpoly import _monic_polys
    for f in _monic_polys(field, degree):
        if f.is_irreducible():
            return f
    raise AssertionError("no irreducible polynomial found")


def _artin_schreier_reduce(base: FiniteField, a: Poly) -> Poly:
    """Subtract c^p - c terms until the degree is prime to p or the
    radicand is constant."""
    p = base.p
    root_exp = base.size // p
    while a.degree >= 1 and a.degree % p == 0:
        d = a.degree
        c = base.pow(a.lead(), root_exp)  # p-th root of the leading coeff
        corr = Poly.monomial(base, c, d // p)
        a = a - corr ** p + corr
        assert a.degree < d
    return a


def _is_prime_power(m: int, p: int) -> bool:
    while m % p == 0:
        m //= p
    return m == 1


def _is_pth_power(base: FiniteField, a: Poly) -> bool:
    if a.is_zero():
        return True
    return all(mult % base.p == 0 for _, mult in poly_factor(a))


def _discriminant_support(base: FiniteField, coeffs: Sequence[Poly]) -> frozenset:
    """Prime factors of res_x(f, df/dx) for a separable defining polynomial."""
    m = len(coeffs) - 1
    deriv = []
    for i in range(1, m + 1):
        c = coeffs[i]
        acc = Poly.zero(base)
        for _ in range(i % base.p):
            acc = acc + c
        deriv.append(acc)
    while deriv and deriv[-1].is_zero():
        deriv.pop()
    res = _poly_resultant(base, list(coeffs), deriv)
    if res.is_zero():
        raise ReducibleDefiningPolynomial(
            "vanishing discriminant for a separable polynomial")
    return frozenset(Prime(f, check=False) for f, _ in poly_factor(res)
                     if f.degree >= 1)


def _poly_resultant(base: FiniteField, f: List[Poly], g: List[Poly]) -> Poly:
    """Resultant of two x-polynomials with A-coefficients via the Sylvester
    matrix and fraction-free (Bareiss) elimination over F_q[t]."""
    n = len(f) - 1
    m = len(g) - 1
    size = n + m
    if size == 0:
        return Poly.one(base)
    zero = Poly.zero(base)
    mat = [[zero for _ in range(size)] for _ in range(size)]
    for i in range(m):
        for j, c in enumerate(reversed(f)):
            mat[i][i + j] = c
    for i in range(n):
        for j, c in enumerate(reversed(g)):
            mat[m + i][i + j] = c
    return _bareiss_det(base, mat)


def _bareiss_det(base: FiniteField, mat: List[List[Poly]]) -> Poly:
    n = len(mat)
    m = [row[:] for row in mat]
    prev = Poly.one(base)
    sign = 1
    for k in range(n - 1):
        if m[k][k].is_zero():
            piv = next((i for i in range(k + 1, n) if not m[i][k].is_zero()),
                       None)
            if piv is None:
                return Poly.zero(base)
            m[k], m[piv] = m[piv], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = m[i][j] * m[k][k] - m[i][k] * m[k][j]
                q, r = divmod(num, prev)
                assert r.is_zero(), "Bareiss division must be exact"
                m[i][j] = q
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


# ---------------------------------------------------------------------------
# Splitting

def splitting(ext: Extension, prime: Prime) -> SplittingType:
    """Factorization type of the prime in F'/F."""
    if prime.field is not ext.base:
        raise MalformedInput("prime and extension base fields differ")
    if not ext.separable:
        # purely inseparable pure form: a unique place, e = m, f = 1
        return SplittingType(prime, (PlaceFactor(ext.m, 1),), False)
    if prime in ext.ram_support:
        closed = ext.ram_support[prime]
        if closed is None:
            raise UnsupportedRamifiedPrime(
                f"no closed form for the ramified prime {prime}")
        places = tuple(PlaceFactor(e, f) for e, f in closed)
        return SplittingType(prime, places, False)
    kp = residue_field(prime)
    reduced = _reduced_defining_poly(ext, prime, kp)
    places = []
    for f, mult in poly_factor(reduced):
        assert mult == 1, "unexpected ramification away from the support"
        places.append(PlaceFactor(1, f.degree, tuple(f.coeffs)))
    places.sort(key=lambda pl: (pl.e, pl.f, pl.factor))
    total = sum(pl.e * pl.f for pl in places)
    assert total == ext.m
    return SplittingType(prime, tuple(places), True)


def _reduced_defining_poly(ext: Extension, prime: Prime, kp) -> Poly:
    if ext.kind == "kummer":
        a = ext.params["a"]
        n = ext.params["n"]
        mult = ord_at(prime, a)
        if mult:
            # a = p^mult * b with n | mult: substitute x -> x * p^(mult/n)
            b = a
            for _ in range(mult):
                b = b // prime.poly
            return Poly(kp, [kp.neg(kp.reduce(b))] + [0] * (n - 1) + [1])
        return Poly(kp, [kp.neg(kp.reduce(a))] + [0] * (n - 1) + [1])
    return Poly(kp, [kp.reduce(c) for c in ext.x_coeffs])


def splitting_pattern(ext: Extension, prime: Prime) -> Tuple[Tuple[int, int], ...]:
    """The multiset of (e, f) above a prime, without factor polynomials.

    Uses exact residue tests (power and trace conditions) instead of full
    factorization, so scans over many primes stay cheap; the result
    agrees with splitting(...) everywhere both are defined.
    """
    if prime.field is not ext.base:
        raise MalformedInput("prime and extension base fields differ")
    if not ext.separable:
        return ((ext.m, 1),)
    if prime in ext.ram_support:
        closed = ext.ram_support[prime]
        if closed is None:
            raise UnsupportedRamifiedPrime(
                f"no closed form for the ramified prime {prime}")
        return tuple(sorted(closed))
    if ext.kind == "constant":
        count, f = constant_splitting_law(ext.m, prime.degree)
        return ((1, f),) * count
    if ext.kind == "kummer":
        return _kummer_pattern(ext, prime)
    if ext.kind == "artin_schreier":
        return _artin_schreier_pattern(ext, prime)
    sp = splitting(ext, prime)
    return tuple(sorted((pl.e, pl.f) for pl in sp.places))


def _kummer_pattern(ext: Extension, prime: Prime) -> Tuple[Tuple[int, int], ...]:
    """Degrees of the irreducible factors of x^n - c over k(p), from the
    root-count ladder: x^n = c has gcd(n, Q^j - 1) roots in F_{Q^j} iff
    c^((Q^j-1)/gcd) = 1, else none."""
    import math
    kp = residue_field(prime)
    a = ext.params["a"]
    n = ext.params["n"]
    mult = ord_at(prime, a)
    b = a
    for _ in range(mult):
        b = b // prime.poly
    c = kp.reduce(b)
    q_res = kp.size
    pattern = []
    strict = {}
    total = 0
    j = 1
    while total < n:
        size_j = q_res ** j - 1
        g = math.gcd(n, size_j)
        if kp.pow(c, size_j // g) == 1:
            roots = g
        else:
            roots = 0
        new = roots - sum(strict.get(d, 0) for d in range(1, j) if j % d == 0)
        strict[j] = new
        if new:
            assert new % j == 0
            pattern.extend([(1, j)] * (new // j))
            total += new
        j += 1
    assert total == n
    return tuple(sorted(pattern))


def _artin_schreier_pattern(ext: Extension, prime: Prime) -> Tuple[Tuple[int, int], ...]:
    """x^p - x - c splits completely iff the absolute trace of c vanishes,
    and is irreducible otherwise."""
    kp = residue_field(prime)
    p = ext.base.p
    c = kp.reduce(ext.params["a"])
    tr = 0
    x = c
    steps = kp.e  # [k(p) : F_p]
    for _ in range(steps):
        tr = kp.add(tr, x)
        x = kp.pow(x, p)
    if tr == 0:
        return ((1, 1),) * p
    return ((1, p),)


def splits_completely(ext: Extension, prime: Prime) -> bool:
    pattern = splitting_pattern(ext, prime)
    return pattern == ((1, 1),) * ext.m


def constant_splitting_law(n: int, d: int) -> Tuple[int, int]:
    """(number of places, residue degree) of a degree-d prime in the
    constant extension of degree n."""
    import math
    g = math.gcd(n, d)
    return g, n // g


# ---------------------------------------------------------------------------
# Zeta and class numbers

@dataclass
class ZetaData:
    q_prime: int
    genus: int
    place_counts: List[int]          # b_d for d = 1..genus
    point_counts: List[int]          # N_i over F_{q'^i}, i = 1..genus
    coefficients: List[int]          # a_0..a_{2g} of the numerator P(u)
    h: int                           # class number of A'

    def numerator(self, u: Fraction) -> Fraction:
        return sum(Fraction(c) * u ** i for i, c in enumerate(self.coefficients))


def count_places(ext: Extension, degree: int,
                 budget: int = PLACE_BUDGET) -> int:
    """Number of places of F' of degree `degree` over its own constant
    field F_{q'}, including the infinite place."""
    n_const = ext.const_degree
    total = 0
    if degree == ext.infinite_place_degree:
        total += 1  # the unique infinite place
    scan = degree * n_const
    if ext.base.size ** scan > budget:
        raise BudgetExceeded(
            f"enumerating primes of degree up to {scan} exceeds the budget")
    for d in range(1, scan + 1):
        for prime in primes_of_degree(ext.base, d):
            for e, f in splitting_pattern(ext, prime):
                if d * f == degree * n_const:
                    total += 1
    return total


def zeta_numerator(ext: Extension, budget: int = PLACE_BUDGET) -> ZetaData:
    """Numerator P(u) of the zeta function of F', via the place counts
    b_1..b_g, the exponential-series expansion, and the functional
    equation a_{2g-i} = q'^(g-i) a_i; the class number is h = P(1) times
    the degree of the infinite place (1 for all structured shapes)."""
    g = ext.genus
    qp = ext.q_prime
    if g == 0:
        return ZetaData(qp, 0, [], [], [1], 1)
    b = [count_places(ext, d, budget) for d in range(1, g + 1)]
    n_counts = []
    for i in range(1, g + 1):
        total = 0
        for d in range(1, i + 1):
            if i % d == 0:
                total += d * b[d - 1]
        n_counts.append(total)
    # Z(u) = exp(sum N_i u^i / i); P = Z * (1-u)(1-q'u) up to u^g
    z = [Fraction(1)] + [Fraction(0)] * g
    s = [Fraction(0)] + [Fraction(n_counts[i - 1], i) for i in range(1, g + 1)]
    for k in range(1, g + 1):
        acc = Fraction(0)
        for i in range(1, k + 1):
            acc += i * s[i] * z[k - i]
        z[k] = acc / k
    low = [Fraction(0)] * (g + 1)
    for k in range(g + 1):
        acc = z[k]
        if k >= 1:
            acc -= (qp + 1) * z[k - 1]
        if k >= 2:
            acc += qp * z[k - 2]
        low[k] = acc
    coeffs = [0] * (2 * g + 1)
    for k in range(g + 1):
        assert low[k].denominator == 1, "numerator coefficients must be integers"
        coeffs[k] = int(low[k])
    for i in range(g):
        coeffs[2 * g - i] = qp ** (g - i) * coeffs[i]
    assert coeffs[0] == 1
    h = sum(coeffs)
    # |Cl(A')| = P(1) * deg(infinity'), and the structured shapes all have
    # an infinite place of degree 1
    h_order = h * ext.infinite_place_degree
    assert h_order >= 1
    # the class-number lower bound in terms of genus must hold
    lower = Fraction((qp - 1) * (qp ** (2 * g) - 2 * g * qp ** g + 1),
                     2 * g * (qp ** (g + 1) - 1))
    assert Fraction(h_order) >= lower
    return ZetaData(qp, g, b, n_counts, coeffs, h_order)


def class_number(ext: Extension, budget: int = PLACE_BUDGET) -> int:
    return zeta_numerator(ext, budget).h


def predegree(ext: Extension, index: int, budget: int = PLACE_BUDGET) -> int:
    """D = |Cl(F')| * i for a datum of index i >= 1."""
    if index < 1:
        raise MalformedInput("index must be >= 1")
    return class_number(ext, budget) * index


# ---------------------------------------------------------------------------
# Orders at primes and the datum index

def order_at(ext: Extension, prime: Prime, r_prime: int) -> OrderStructure:
    """The A_p-order A'_p = A_p[y] presented by the defining polynomial,
    valid where A[y] is p-maximal."""
    if not ext.separable:
        raise UnsupportedRamifiedPrime(
            "no order machinery for inseparable extensions")
    if prime in ext.maximality_bad:
        raise UnsupportedRamifiedPrime(
            f"A[y] is not certified maximal at {prime}")
    sp = splitting(ext, prime)
    factors = tuple((pl.e, pl.f) for pl in sp.places)
    for e, f in factors:
        if e > 1 and f > 1:
            raise UnsupportedRamifiedPrime(
                "mixed ramified factors are outside the supported shapes")
    return OrderStructure.from_min_poly(prime, r_prime, list(ext.x_coeffs),
                                        factors, kind=f"ext-{ext.kind}")


def index_iX(datum, budget: int = DEFAULT_BUDGET) -> int:
    """i(X) = product over the twist support of the local stabilizer
    indices [GL_{r'}(A'_p) : Stab(Lambda_p)], after normalizing each local
    lattice so its A'-span is standard."""
    ext = datum.extension
    total = 1
    for prime, matrix in sorted(datum.twists.items(), key=lambda kv: kv[0].sort_key()):
        order = order_at(ext, prime, datum.r_prime)
        lat = saturate_lattice(order, Lattice(matrix), budget)
        total *= stabilizer_index(lat, order, None, budget)
    return total
