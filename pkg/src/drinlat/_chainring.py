"""Finite chain-ring arithmetic for A/p^k and Howell normal forms.

A/p^k = F_q[t]/(p(t)^k) is a local principal ring with uniformizer the
class of p.  Elements are kept as canonical Poly representatives of
degree < deg(p)*k.  Submodules of (A/p^k)^n are handled through Howell
normal forms, which are unique per submodule, so canonical row tuples
double as dictionary keys.
"""

from __future__ import annotations

from typing import Iterator, List, Sequence, Tuple

from .errors import BudgetExceeded
from .ffpoly import Poly, Prime, poly_ext_gcd


class ChainRing:
    """A/p^k with exact polynomial arithmetic."""

    def __init__(self, prime: Prime, k: int):
        assert k >= 1
        self.prime = prime
        self.k = k
        self.field = prime.field
        self.pi = prime.poly
        self.modulus = prime.poly ** k
        self.size = prime.residue_size ** k
        self.zero = Poly.zero(self.field)
        self.one = Poly.one(self.field)

    def reduce(self, f: Poly) -> Poly:
        return f % self.modulus

    def add(self, a: Poly, b: Poly) -> Poly:
        return self.reduce(a + b)

    def sub(self, a: Poly, b: Poly) -> Poly:
        return self.reduce(a - b)

    def mul(self, a: Poly, b: Poly) -> Poly:
        return self.reduce(a * b)

    def neg(self, a: Poly) -> Poly:
        return self.reduce(-a)

    def val(self, a: Poly) -> int:
        """p-adic valuation of the class, capped at k (val(0) = k)."""
        if a.is_zero():
            return self.k
        v = 0
        while v < self.k:
            q, r = divmod(a, self.pi)
            if not r.is_zero():
                return v
            a, v = q, v + 1
        return self.k

    def is_unit(self, a: Poly) -> bool:
        return not (a % self.pi).is_zero()

    def inv(self, a: Poly) -> Poly:
        g, s, _ = poly_ext_gcd(a, self.modulus)
        if not g.is_one():
            raise ZeroDivisionError("non-unit in chain ring")
        return self.reduce(s)

    def unit_part(self, a: Poly, v: int) -> Poly:
        """u with a = u * pi^v, given val(a) == v < k."""
        for _ in range(v):
            a, r = divmod(a, self.pi)
            assert r.is_zero()
        return a

    def div_exact(self, a: Poly, b: Poly) -> Poly:
        """a/b where val(a) >= val(b); exact in the chain ring."""
        vb = self.val(b)
        ub = self.unit_part(b, vb)
        for _ in range(vb):
            a, r = divmod(a, self.pi)
            assert r.is_zero(), "inexact chain-ring division"
        return self.mul(a, self.inv(ub))

    def pi_pow(self, v: int) -> Poly:
        return self.reduce(self.pi ** v) if v < self.k else self.zero

    def elements(self) -> Iterator[Poly]:
        """All canonical representatives (size = q_p^k of them)."""
        d = self.prime.degree * self.k
        F = self.field
        counters = [0] * d
        while True:
            yield Poly(F, tuple(counters))
            i = 0
            while i < d:
                counters[i] += 1
                if counters[i] < F.size:
                    break
                counters[i] = 0
                i += 1
            else:
                return

    def residues_mod_pi_pow(self, a: int) -> Iterator[Poly]:
        """Canonical representatives of A/p^a inside the ring (a <= k)."""
        sub = ChainRing(self.prime, a) if a >= 1 else None
        if sub is None:
            yield self.zero
            return
        yield from sub.elements()


Vec = Tuple[Poly, ...]


def vec_add(ring: ChainRing, u: Vec, v: Vec) -> Vec:
    return tuple(ring.add(a, b) for a, b in zip(u, v))

def vec_sub(ring: ChainRing, u: Vec, v: Vec) -> Vec:
    return tuple(ring.sub(a, b) for a, b in zip(u, v))

def vec_scale(ring: ChainRing, c: Poly, v: Vec) -> Vec:
    return tuple(ring.mul(c, a) for a in v)

def vec_is_zero(v: Vec) -> bool:
    return all(a.is_zero() for a in v)


def _leading_index(v: Vec) -> int:
    for i, a in enumerate(v):
        if not a.is_zero():
            return i
    return len(v)


def howell_form(ring: ChainRing, rows: Sequence[Vec]) -> Tuple[Vec, ...]:
    """Unique Howell normal form of the row span.

    Pivots are normalized to exact powers of pi, every other entry in a
    pivot column is reduced to its canonical residue mod that power, and
    annihilator rows are folded in, so equal submodules give equal output.
    """
    k = ring.k
    work: List[Vec] = [r for r in rows if not vec_is_zero(r)]
    n = len(rows[0]) if rows else 0
    pivots: List[Tuple[int, int, Vec]] = []  # (col, val, row)

    for col in range(n):
        eligible = [r for r in work if _leading_index(r) == col]
        work = [r for r in work if _leading_index(r) > col]
        if not eligible:
            continue
        vals = [ring.val(r[col]) for r in eligible]
        best = min(range(len(eligible)), key=lambda i: vals[i])
        a = vals[best]
        pivot = eligible.pop(best)
        # normalize pivot entry to exactly pi^a
        u_inv = ring.inv(ring.unit_part(pivot[col], a))
        pivot = vec_scale(ring, u_inv, pivot)
        for r in eligible:
            if r[col].is_zero():
                work.append(r)
                continue
            c = ring.div_exact(r[col], pivot[col])
            r2 = vec_sub(ring, r, vec_scale(ring, c, pivot))
            if not vec_is_zero(r2):
                work.append(r2)
        if a > 0:
            ann = vec_scale(ring, ring.pi_pow(k - a), pivot)
            if not vec_is_zero(ann):
                work.append(ann)
        pivots.append((col, a, pivot))

    # full reduction: left-to-right, reduce every other row at each pivot col
    for idx, (col, a, prow) in enumerate(pivots):
        mod = ring.pi ** a
        for jdx, (jcol, ja, jrow) in enumerate(pivots):
            if jdx == idx:
                continue
            c = jrow[col]
            if c.is_zero():
                continue
            rem = c % mod
            q = (c - rem) // mod
            if q.is_zero():
                continue
            jrow = vec_sub(ring, jrow, vec_scale(ring, ring.reduce(q), prow))
            pivots[jdx] = (jcol, ja, jrow)

    return tuple(row for _, _, row in sorted(pivots, key=lambda t: t[0]))


def module_size(ring: ChainRing, howell_rows: Sequence[Vec]) -> int:
    """Cardinality of the module from its Howell form."""
    total = 1
    for row in howell_rows:
        col = _leading_index(row)
        a = ring.val(row[col])
        total *= ring.prime.residue_size ** (ring.k - a)
    return total


def module_contains(ring: ChainRing, howell_rows: Sequence[Vec], v: Vec) -> bool:
    """Membership test by reduction against the Howell form."""
    for row in howell_rows:
        col = _leading_index(row)
        if v[col].is_zero():
            continue
        a = ring.val(row[col])
        if ring.val(v[col]) < a:
            return False
        c = ring.div_exact(v[col], row[col])
        v = vec_sub(ring, v, vec_scale(ring, c, row))
    return vec_is_zero(v)


def enumerate_module(ring: ChainRing, howell_rows: Sequence[Vec],
                     budget: int) -> Iterator[Vec]:
    """All elements of the module; raises BudgetExceeded upfront if the
    cardinality is over budget."""
    size = module_size(ring, howell_rows)
    if size > budget:
        raise BudgetExceeded(
            f"module of size {size} exceeds enumeration budget {budget}")
    n = len(howell_rows[0]) if howell_rows else 0
    zero = tuple(ring.zero for _ in range(n))
    if not howell_rows:
        yield zero
        return
    pivot_vals = []
    for row in howell_rows:
        col = _leading_index(row)
        pivot_vals.append(ring.val(row[col]))

    def rec(i: int, acc: Vec) -> Iterator[Vec]:
        if i == len(howell_rows):
            yield acc
            return
        for c in ring.residues_mod_pi_pow(ring.k - pivot_vals[i]):
            if c.is_zero():
                yield from rec(i + 1, acc)
            else:
                yield from rec(i + 1, vec_add(ring, acc,
                                              vec_scale(ring, c, howell_rows[i])))

    yield from rec(0, zero)


def solve_into_module(ring: ChainRing, image_rows: Sequence[Vec],
                      target_rows: Sequence[Vec], dim: int) -> Tuple[Vec, ...]:
    """Howell form of {x in R^dim : sum x_s * image_rows[s] in <target>}.

    image_rows[s] is the image of the s-th domain basis vector; the row
    span of target_rows is the allowed submodule of the codomain.
    """
    n = len(image_rows[0]) if image_rows else len(target_rows[0])
    zero = ring.zero
    stacked: List[Vec] = []
    for s, img in enumerate(image_rows):
        tag = [zero] * dim
        tag[s] = ring.one
        stacked.append(tuple(img) + tuple(tag))
    for w in target_rows:
        stacked.append(tuple(w) + tuple(zero for _ in range(dim)))
    reduced = howell_form(ring, stacked)
    solutions = [row[n:] for row in reduced if vec_is_zero(row[:n])]
    if not solutions:
        return ()
    return howell_form(ring, solutions)
