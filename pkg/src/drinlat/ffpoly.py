"""Exact arithmetic in F_q and F_q[t].

Finite fields are built either over the prime field (with a
deterministically chosen irreducible modulus) or as a quotient of F_q[t]
by a prime, so residue fields are ordinary field objects.  Elements are
plain ints in [0, size) encoding coordinates in a fixed polynomial basis
over the base field; no compatibility between different constructions of
the same order is promised.

Polynomial text grammar (bit-exact, used by the CLI and JSON payloads):
terms ``c*t^k`` joined by ``+``, coefficients as decimal integers,
e.g. ``t^3+2*t+1``; a field is written ``p^e``, e.g. ``3^2``.
"""

from __future__ import annotations

import itertools
import re
from functools import lru_cache
from typing import Iterator, Optional

from .errors import MalformedInput, ZeroPolynomial

_TABLE_LIMIT = 256  # cache full mul/inv tables for fields up to this size


def _is_prime_int(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class FiniteField:
    """GF(p^e), elements encoded as ints in [0, size).

    For an extension field the int is the base-`base.size` digit vector of
    the coordinates in the power basis of ``modulus``'s root.
    """

    def __init__(self, p: int, base: Optional["FiniteField"] = None,
                 modulus: Optional["Poly"] = None):
        if base is None:
            if not _is_prime_int(p):
                raise MalformedInput(f"characteristic {p} is not prime")
            self.p = p
            self.base = None
            self.modulus = None
            self.size = p
            self.e = 1
        else:
            assert modulus is not None and modulus.field is base
            assert modulus.is_monic() and modulus.degree >= 1
            self.p = base.p
            self.base = base
            self.modulus = modulus
            self.size = base.size ** modulus.degree
            self.e = base.e * modulus.degree
        self._mul_table: Optional[list] = None
        self._inv_table: Optional[list] = None

    # -- construction ---------------------------------------------------

    @staticmethod
    def of_order(p: int, e: int = 1) -> "FiniteField":
        """The (interned) field of order p^e over a deterministic modulus."""
        return _field_of_order(p, e)

    def extension(self, modulus: "Poly") -> "FiniteField":
        return FiniteField(self.p, base=self, modulus=modulus)

    # -- element codecs ---------------------------------------------------

    def _split(self, a: int) -> tuple:
        """Digits of a in base base.size, length = modulus degree."""
        b = self.base.size
        k = self.modulus.degree
        out = []
        for _ in range(k):
            a, d = divmod(a, b)
            out.append(d)
        return tuple(out)

    def _join(self, digits) -> int:
        b = self.base.size
        a = 0
        for d in reversed(digits):
            a = a * b + d
        return a

    def to_poly(self, a: int) -> "Poly":
        """Element as a polynomial over the base field (extension only)."""
        return Poly(self.base, self._split(a))

    def from_base_poly(self, f: "Poly") -> int:
        """Reduce a base-field polynomial mod the modulus and encode."""
        r = f % self.modulus
        digits = list(r.coeffs) + [0] * (self.modulus.degree - len(r.coeffs))
        return self._join(digits)

    # -- arithmetic ------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.base is None:
            return (a + b) % self.p
        bb = self.base.size
        x, y, out, mult = a, b, 0, 1
        while x or y:
            x, dx = divmod(x, bb)
            y, dy = divmod(y, bb)
            out += self.base.add(dx, dy) * mult
            mult *= bb
        return out

    def neg(self, a: int) -> int:
        if self.base is None:
            return (-a) % self.p
        bb = self.base.size
        x, out, mult = a, 0, 1
        while x:
            x, dx = divmod(x, bb)
            out += self.base.neg(dx) * mult
            mult *= bb
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.base is None:
            return (a * b) % self.p
        if self.size <= _TABLE_LIMIT:
            if self._mul_table is None:
                self._build_tables()
            return self._mul_table[a * self.size + b]
        return self._mul_raw(a, b)

    def _mul_raw(self, a: int, b: int) -> int:
        fa = Poly(self.base, self._split(a))
        fb = Poly(self.base, self._split(b))
        return self.from_base_poly(fa * fb)

    def _build_tables(self) -> None:
        n = self.size
        table = [0] * (n * n)
        for a in range(n):
            for b in range(a, n):
                v = self._mul_raw(a, b)
                table[a * n + b] = v
                table[b * n + a] = v
        self._mul_table = table
        inv = [0] * n
        for a in range(1, n):
            if inv[a]:
                continue
            ai = self._inv_raw(a)
            inv[a] = ai
            inv[ai] = a
        self._inv_table = inv

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero field element")
        if self.base is None:
            return pow(a, self.p - 2, self.p)
        if self.size <= _TABLE_LIMIT:
            if self._inv_table is None:
                self._build_tables()
            return self._inv_table[a]
        return self._inv_raw(a)

    def _inv_raw(self, a: int) -> int:
        return self.pow(a, self.size - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(a), -n)
        if a == 0:
            return 1 if n == 0 else 0
        if n >= self.size:
            n %= self.size - 1
        result = 1
        while n > 0:
            if n & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            n >>= 1
        return result

    def from_int(self, c: int) -> int:
        """Grammar coefficient: reduced mod p for prime fields, mod size
        (digit encoding) for extensions."""
        if self.base is None:
            return c % self.p
        return c % self.size

    def elements(self) -> range:
        return range(self.size)

    def multiplicative_generator(self) -> int:
        n = self.size - 1
        factors = {f for f, _ in _int_factor(n)}
        for g in range(2, self.size):
            if all(self.pow(g, n // f) != 1 for f in factors):
                return g
        raise AssertionError("no generator found")

    def __repr__(self):
        return f"GF({self.p}^{self.e})" if self.e > 1 else f"GF({self.p})"

    def __str__(self):
        return f"{self.p}^{self.e}" if self.e > 1 else str(self.p)


@lru_cache(maxsize=None)
def _field_of_order(p: int, e: int) -> FiniteField:
    if e == 1:
        return FiniteField(p)
    prime_field = _field_of_order(p, 1)
    for mod in _monic_polys(prime_field, e):
        if mod.is_irreducible():
            return FiniteField(p, base=prime_field, modulus=mod)
    raise AssertionError("no irreducible modulus found")


def _int_factor(n: int):
    out = []
    d = 2
    while d * d <= n:
        m = 0
        while n % d == 0:
            n //= d
            m += 1
        if m:
            out.append((d, m))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


class Poly:
    """Univariate polynomial over a FiniteField, coefficients little-endian,
    canonical (no trailing zeros).  Immutable."""

    __slots__ = ("field", "coeffs", "_hash")

    def __init__(self, field: FiniteField, coeffs):
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        self.field = field
        self.coeffs = tuple(coeffs)
        self._hash = None

    # -- constructors ----------------------------------------------------

    @staticmethod
    def zero(field: FiniteField) -> "Poly":
        return Poly(field, ())

    @staticmethod
    def one(field: FiniteField) -> "Poly":
        return Poly(field, (1,))

    @staticmethod
    def const(field: FiniteField, c: int) -> "Poly":
        return Poly(field, (c % field.size,))

    @staticmethod
    def t(field: FiniteField) -> "Poly":
        return Poly(field, (0, 1))

    @staticmethod
    def monomial(field: FiniteField, c: int, k: int) -> "Poly":
        return Poly(field, (0,) * k + (c % field.size,))

    # -- basic queries ---------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_one(self) -> bool:
        return self.coeffs == (1,)

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def lead(self) -> int:
        if not self.coeffs:
            raise ZeroPolynomial("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __eq__(self, other):
        if isinstance(other, int):
            return self.coeffs == ((other,) if other else ())
        return (isinstance(other, Poly) and self.field is other.field
                and self.coeffs == other.coeffs)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.field), self.coeffs))
        return self._hash

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        F = self.field
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = F.add(out[i], c)
        return Poly(F, out)

    def __neg__(self) -> "Poly":
        F = self.field
        return Poly(F, [F.neg(c) for c in self.coeffs])

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        F = self.field
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return Poly.zero(F)
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x == 0:
                continue
            for j, y in enumerate(b):
                if y:
                    out[i + j] = F.add(out[i + j], F.mul(x, y))
        return Poly(F, out)

    def scale(self, c: int) -> "Poly":
        F = self.field
        return Poly(F, [F.mul(c, x) for x in self.coeffs])

    def shift(self, k: int) -> "Poly":
        """Multiply by t^k."""
        if self.is_zero():
            return self
        return Poly(self.field, (0,) * k + self.coeffs)

    def __divmod__(self, other: "Poly"):
        F = self.field
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = other.degree
        lead_inv = F.inv(other.coeffs[-1])
        if len(rem) <= d:
            return Poly.zero(F), self
        quot = [0] * (len(rem) - d)
        for i in reversed(range(len(quot))):
            c = F.mul(rem[i + d], lead_inv)
            if c == 0:
                continue
            quot[i] = c
            for j, y in enumerate(other.coeffs):
                rem[i + j] = F.sub(rem[i + j], F.mul(c, y))
        return Poly(F, quot), Poly(F, rem)

    def __floordiv__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Poly") -> "Poly":
        return divmod(self, other)[1]

    def __pow__(self, n: int) -> "Poly":
        result = Poly.one(self.field)
        base = self
        while n > 0:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def pow_mod(self, n: int, mod: "Poly") -> "Poly":
        result = Poly.one(self.field)
        base = self % mod
        while n > 0:
            if n & 1:
                result = (result * base) % mod
            base = (base * base) % mod
            n >>= 1
        return result

    def monic(self) -> "Poly":
        if self.is_zero() or self.is_monic():
            return self
        return self.scale(self.field.inv(self.coeffs[-1]))

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero():
            a, b = b, a % b
        return a.monic() if not a.is_zero() else a

    def derivative(self) -> "Poly":
        F = self.field
        out = []
        for k in range(1, len(self.coeffs)):
            c = self.coeffs[k]
            kc = 0
            for _ in range(k % F.p):
                kc = F.add(kc, c)
            out.append(kc)
        return Poly(F, out)

    def eval(self, x: int) -> int:
        F = self.field
        acc = 0
        for c in reversed(self.coeffs):
            acc = F.add(F.mul(acc, x), c)
        return acc

    # -- factorization helpers ---------------------------------------------

    def is_irreducible(self) -> bool:
        """Rabin's test: deterministic, exact."""
        d = self.degree
        if d < 1 or not self.is_monic():
            f = self.monic() if d >= 1 else self
            if d < 1:
                return False
            return f.is_irreducible()
        q = self.field.size
        t_poly = Poly.t(self.field)
        # x^(q^d) == x mod f
        xq = t_poly
        powers = {}
        for i in range(1, d + 1):
            xq = xq.pow_mod(q, self)
            powers[i] = xq
        if powers[d] != t_poly % self:
            return False
        for ell in {f for f, _ in _int_factor(d)}:
            g = (powers[d // ell] - t_poly).gcd(self)
            if not g.is_one():
                return False
        return True

    def __repr__(self):
        return f"Poly({poly_to_str(self)!r} over {self.field})"


def _monic_polys(field: FiniteField, degree: int) -> Iterator[Poly]:
    """All monic polynomials of exact degree, ordered by coefficient
    vector read from the highest non-leading coefficient down."""
    for tail in itertools.product(field.elements(), repeat=degree):
        # tail is (c_{d-1}, ..., c_0)
        yield Poly(field, tuple(reversed(tail)) + (1,))


# ---------------------------------------------------------------------------
# Primes of F = F_q(t)

class Prime:
    """A finite place of F_q(t): a monic irreducible polynomial."""

    __slots__ = ("field", "poly", "degree", "residue_size", "_hash")

    def __init__(self, poly: Poly, check: bool = True):
        if check and not (poly.is_monic() and poly.is_irreducible()):
            raise MalformedInput(f"{poly_to_str(poly)} is not monic irreducible")
        self.field = poly.field
        self.poly = poly
        self.degree = poly.degree
        self.residue_size = poly.field.size ** poly.degree
        self._hash = None

    def __eq__(self, other):
        return (isinstance(other, Prime) and self.field is other.field
                and self.poly == other.poly)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("prime", id(self.field), self.poly.coeffs))
        return self._hash

    def __repr__(self):
        return f"Prime({poly_to_str(self.poly)} over {self.field})"

    def __str__(self):
        return poly_to_str(self.poly)

    def sort_key(self):
        return (self.degree, tuple(reversed(self.poly.coeffs)))


class ResidueField(FiniteField):
    """k(p) = F_q[t]/(p) with the reduction and lift maps."""

    def __init__(self, prime: Prime):
        super().__init__(prime.field.p, base=prime.field, modulus=prime.poly)
        self.prime = prime

    def reduce(self, f: Poly) -> int:
        """Ring map A -> k(p)."""
        assert f.field is self.base
        return self.from_base_poly(f)

    def lift(self, a: int) -> Poly:
        """Canonical representative of degree < deg p."""
        return self.to_poly(a)


@lru_cache(maxsize=None)
def residue_field(prime: Prime) -> ResidueField:
    return ResidueField(prime)


def primes_of_degree(field: FiniteField, d: int) -> list:
    return list(_primes_of_degree_cached(field, d))


@lru_cache(maxsize=None)
def _primes_of_degree_cached(field: FiniteField, d: int) -> tuple:
    # sieve by trial division: any reducible monic of degree d has an
    # irreducible factor of degree <= d/2
    smaller = []
    for dd in range(1, d // 2 + 1):
        smaller.extend(_primes_of_degree_cached(field, dd))
    out = []
    for f in _monic_polys(field, d):
        if any((f % p.poly).is_zero() for p in smaller):
            continue
        out.append(Prime(f, check=False))
    return tuple(out)


def enumerate_primes(field: FiniteField, d_max: int) -> list:
    """All monic irreducibles of degree <= d_max, sorted by
    (degree, lexicographic coefficient order)."""
    if d_max < 1:
        raise MalformedInput("d_max must be >= 1")
    out = []
    for d in range(1, d_max + 1):
        out.extend(primes_of_degree(field, d))
    return out


def moebius(n: int) -> int:
    fac = _int_factor(n)
    if any(m > 1 for _, m in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def count_irreducibles(q: int, d: int) -> int:
    """Gauss' necklace count (1/d) sum_{e|d} mu(e) q^(d/e)."""
    total = sum(moebius(e) * q ** (d // e) for e in range(1, d + 1) if d % e == 0)
    assert total % d == 0
    return total // d


# ---------------------------------------------------------------------------
# Factorization

def poly_factor(f: Poly) -> list:
    """Factor f into monic irreducibles.

    Returns a list of (Prime-like monic irreducible Poly, multiplicity)
    sorted by (degree, coefficient order); the leading coefficient is
    dropped (recover it as f.lead()).  Uses exhaustive trial division
    when q^deg(f) <= 4096, distinct-degree then equal-degree splitting
    above that.
    """
    if f.is_zero():
        raise ZeroPolynomial("cannot factor the zero polynomial")
    F = f.field
    m = f.monic()
    if m.degree == 0:
        return []
    if F.size ** m.degree <= 4096:
        pairs = _trial_division(m)
    else:
        acc: dict = {}
        _factor_monic(m, 1, acc)
        pairs = sorted(acc.items(), key=lambda kv: _poly_sort_key(kv[0]))
    return pairs


def _poly_sort_key(f: Poly):
    return (f.degree, tuple(reversed(f.coeffs)))


def _trial_division(m: Poly) -> list:
    out = []
    d = 1
    while m.degree >= 2 * d:
        for p in primes_of_degree(m.field, d):
            mult = 0
            while True:
                q, r = divmod(m, p.poly)
                if not r.is_zero():
                    break
                m, mult = q, mult + 1
            if mult:
                out.append((p.poly, mult))
        d += 1
    if m.degree >= 1:
        out.append((m, 1))
    out.sort(key=lambda kv: _poly_sort_key(kv[0]))
    return out


def _factor_monic(m: Poly, mult: int, acc: dict) -> None:
    if m.degree == 0:
        return
    d = m.derivative()
    if d.is_zero():
        # m = g(t^p); take p-th roots of coefficients
        F = m.field
        p = F.p
        root_exp = F.size // p  # a^(q/p) is the p-th root since a^q = a
        coeffs = [F.pow(m.coeffs[i], root_exp) for i in range(0, len(m.coeffs), p)]
        _factor_monic(Poly(F, coeffs), mult * p, acc)
        return
    g = m.gcd(d)
    if not g.is_one():
        _factor_monic(g, mult, acc)
        _factor_monic(m // g, mult, acc)
        return
    _factor_squarefree(m, mult, acc)


def _factor_squarefree(m: Poly, mult: int, acc: dict) -> None:
    F = m.field
    q = F.size
    t_poly = Poly.t(F)
    xq = t_poly % m
    d = 0
    while m.degree > 0:
        d += 1
        if m.degree < 2 * d:
            acc[m] = acc.get(m, 0) + mult
            return
        xq = xq.pow_mod(q, m)
        g = (xq - t_poly).gcd(m)
        if not g.is_one():
            for piece in _equal_degree_split(g, d):
                acc[piece] = acc.get(piece, 0) + mult
            m = m // g
            xq = xq % m


def _equal_degree_split(g: Poly, d: int) -> list:
    """Split a squarefree product of degree-d irreducibles.

    Deterministic sweep over small candidate polynomials; fine at the
    field sizes this library targets.
    """
    F = g.field
    if g.degree == d:
        return [g]
    q = F.size
    for cand_deg in range(1, g.degree + 4):
        for a in _monic_polys(F, cand_deg):
            if F.p == 2:
                # trace map over F_2
                acc = a % g
                term = a % g
                for _ in range(d * F.e - 1):
                    term = term.pow_mod(2, g)
                    acc = acc + term
                h = acc.gcd(g)
            else:
                b = a.pow_mod((q ** d - 1) // 2, g)
                h = (b - Poly.one(F)).gcd(g)
            if not h.is_one() and h.degree < g.degree:
                return sorted(
                    _equal_degree_split(h, d) + _equal_degree_split(g // h, d),
                    key=_poly_sort_key)
    raise AssertionError("equal-degree split failed to find a splitter")


# ---------------------------------------------------------------------------
# Text grammar

_TERM_RE = re.compile(r"^(?:(\d+)\*?)?(t(?:\^(\d+))?)?$")


def poly_to_str(f: Poly) -> str:
    if f.is_zero():
        return "0"
    parts = []
    for k in reversed(range(len(f.coeffs))):
        c = f.coeffs[k]
        if c == 0:
            continue
        if k == 0:
            parts.append(str(c))
        elif k == 1:
            parts.append("t" if c == 1 else f"{c}*t")
        else:
            parts.append(f"t^{k}" if c == 1 else f"{c}*t^{k}")
    return "+".join(parts)


def poly_from_str(s: str, field: FiniteField) -> Poly:
    text = s.replace(" ", "")
    if not text:
        raise MalformedInput("empty polynomial string")
    if text == "0":
        return Poly.zero(field)
    # normalize minus signs into +NEG markers
    text = text.replace("-", "+-")
    if text.startswith("+"):
        text = text[1:]
    coeffs: dict = {}
    for term in text.split("+"):
        if not term:
            raise MalformedInput(f"bad polynomial syntax: {s!r}")
        negate = term.startswith("-")
        if negate:
            term = term[1:]
        mm = _TERM_RE.match(term)
        if not mm or (mm.group(1) is None and mm.group(2) is None):
            raise MalformedInput(f"bad polynomial term {term!r} in {s!r}")
        c = field.from_int(int(mm.group(1))) if mm.group(1) is not None else 1
        if mm.group(2) is None:
            k = 0
        elif mm.group(3) is not None:
            k = int(mm.group(3))
        else:
            k = 1
        if negate:
            c = field.neg(c)
        coeffs[k] = field.add(coeffs.get(k, 0), c)
    out = [0] * (max(coeffs) + 1)
    for k, c in coeffs.items():
        out[k] = c
    return Poly(field, out)


def field_from_str(s: str) -> FiniteField:
    mm = re.match(r"^(\d+)(?:\^(\d+))?$", s.strip())
    if not mm:
        raise MalformedInput(f"bad field spec {s!r}")
    p = int(mm.group(1))
    e = int(mm.group(2)) if mm.group(2) else 1
    if not _is_prime_int(p) or e < 1:
        raise MalformedInput(f"bad field spec {s!r}")
    return FiniteField.of_order(p, e)


def prime_from_str(s: str, field: FiniteField) -> Prime:
    return Prime(poly_from_str(s, field))


def random_poly(field: FiniteField, degree: int, rng) -> Poly:
    """Uniform polynomial of degree <= degree (may be zero)."""
    return Poly(field, [rng.randrange(field.size) for _ in range(degree + 1)])


def poly_ext_gcd(a: Poly, b: Poly):
    """Extended Euclid: returns (g, s, t) with s*a + t*b = g, g monic."""
    F = a.field
    r0, r1 = a, b
    s0, s1 = Poly.one(F), Poly.zero(F)
    t0, t1 = Poly.zero(F), Poly.one(F)
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    c = F.inv(r0.lead())
    return r0.scale(c), s0.scale(c), t0.scale(c)


def ord_at(prime: Prime, f: Poly) -> int:
    """p-adic valuation of a nonzero polynomial."""
    if f.is_zero():
        raise ZeroPolynomial("valuation of zero polynomial")
    v = 0
    while True:
        q, r = divmod(f, prime.poly)
        if not r.is_zero():
            return v
        f, v = q, v + 1
