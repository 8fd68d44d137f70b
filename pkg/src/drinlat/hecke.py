"""Hecke-correspondence degrees, Newton polygons, and the projective
boundedness predicate.

The degree of the correspondence attached to g at level depth k is the
index [K : K cap g^-1 K g] for K the principal congruence subgroup mod
p^k, computed by brute-force coset counting in the finite quotient
K(p^k)/K(p^2k) ~ Mat_r(A/p^k).  The boundedness predicate reads the
Newton polygon of the characteristic polynomial: at least two segments
certifies an unbounded cyclic image in PGL_r(F_p); the adopted converse
is that a single slope means bounded (a power scales to an integral
matrix with unit determinant, and unipotent parts have finite order in
characteristic p).  The power/SNF-spread cross-check in the test suite
exercises that converse independently.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from .errors import (BudgetExceeded, PrecisionExhausted, QuotientInsufficient)
from .ffpoly import Poly, Prime, residue_field
from ._chainring import ChainRing
from .localfield import (DEFAULT_BUDGET, DEFAULT_PRECISION, LocalElement,
                         LocalMatrix)


# ---------------------------------------------------------------------------
# Characteristic polynomial

def char_poly(g: LocalMatrix) -> List[LocalElement]:
    """Coefficients [a_0, ..., a_{r-1}, 1] of det(lambda*I - g)."""
    prime = g.prime
    r = g.r
    coeffs = [LocalElement.zero(prime) for _ in range(r)]
    sign = -1
    for i in range(1, r + 1):
        e_i = LocalElement.zero(prime)
        for subset in itertools.combinations(range(r), i):
            e_i = e_i.add(_minor_det(g, subset))
        # a_{r-i} = (-1)^i e_i
        coeffs[r - i] = e_i if sign > 0 else e_i.neg()
        sign = -sign
    one = LocalElement.one(prime, _working_precision(g))
    return coeffs + [one]


def _working_precision(g: LocalMatrix) -> int:
    precs = [len(e.digits) for row in g.rows for e in row if e.kind == "n"]
    return min(precs) if precs else DEFAULT_PRECISION


def _minor_det(g: LocalMatrix, subset: Sequence[int]) -> LocalElement:
    prime = g.prime
    acc = LocalElement.zero(prime)
    idx = list(subset)
    for perm in itertools.permutations(range(len(idx))):
        term = None
        for row_pos, col_pos in enumerate(perm):
            e = g.rows[idx[row_pos]][idx[col_pos]]
            term = e if term is None else term.mul(e)
        if _parity(perm) < 0:
            term = term.neg()
        acc = acc.add(term)
    return acc


def _parity(perm) -> int:
    inv = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                inv += 1
    return -1 if inv % 2 else 1


# ---------------------------------------------------------------------------
# Newton polygons

@dataclass(frozen=True)
class NewtonPolygon:
    """Lower convex hull of (i, v(a_i)); slopes strictly increase and the
    negatives of the slopes are the root valuations with multiplicity."""
    points: Tuple[Tuple[int, Optional[int]], ...]
    vertices: Tuple[Tuple[int, int], ...]
    segments: Tuple[Tuple[Fraction, int], ...]

    @property
    def segment_count(self) -> int:
        return len(self.segments)

    def root_valuations(self) -> List[Fraction]:
        out: List[Fraction] = []
        for slope, length in self.segments:
            out.extend([-slope] * length)
        return out

    def hull_height(self, x: Fraction) -> Fraction:
        for (x1, y1), (x2, y2) in zip(self.vertices, self.vertices[1:]):
            if x1 <= x <= x2:
                return Fraction(y1) + Fraction(y2 - y1, x2 - x1) * (x - x1)
        raise ValueError(f"abscissa {x} outside the polygon")


def newton_polygon(coeffs: Sequence[LocalElement]) -> NewtonPolygon:
    """Newton polygon of a monic polynomial given by its coefficient list
    [a_0, ..., a_r] (a_r the leading one).

    Exact-zero coefficients are skipped.  An uncertified coefficient is
    tolerated only when its valuation bound already places it on or
    above the certified hull; otherwise PrecisionExhausted.
    """
    certified: List[Tuple[int, int]] = []
    unknown: List[Tuple[int, int]] = []
    points: List[Tuple[int, Optional[int]]] = []
    for i, c in enumerate(coeffs):
        if c.kind == "n":
            certified.append((i, c.val))
            points.append((i, c.val))
        elif c.kind == "u":
            unknown.append((i, c.val))
            points.append((i, None))
        else:
            points.append((i, None))
    if len(certified) < 2:
        raise PrecisionExhausted("not enough certified coefficients for a hull")

    hull: List[Tuple[int, int]] = []
    for p in certified:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) <= 0:
            hull.pop()
        hull.append(p)

    segments = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segments.append((Fraction(y2 - y1, x2 - x1), x2 - x1))

    np = NewtonPolygon(tuple(points), tuple(hull), tuple(segments))
    for i, bound in unknown:
        if hull[0][0] <= i <= hull[-1][0] and bound < np.hull_height(Fraction(i)):
            raise PrecisionExhausted(
                f"coefficient {i} known only to O(pi^{bound}), below the hull")
    return np


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def projectively_bounded(g: LocalMatrix) -> bool:
    """True iff the Newton polygon of char_poly(g) has a single slope,
    i.e. the cyclic image of g in PGL_r(F_p) is bounded."""
    return newton_polygon(char_poly(g)).segment_count == 1


# ---------------------------------------------------------------------------
# Hecke degrees

def standard_hecke_matrix(prime: Prime, r: int,
                          precision: int = DEFAULT_PRECISION) -> LocalMatrix:
    """diag(pi^-1, 1, ..., 1)."""
    entries = [LocalElement.pi_power(prime, -1, precision)]
    entries += [LocalElement.one(prime, precision) for _ in range(r - 1)]
    return LocalMatrix.diagonal(prime, entries)


@dataclass(frozen=True)
class HeckeElement:
    """Correspondence element g = s diag(pi^-1, 1, ..., 1) s^-1 with its
    declared degree |k(p)|^(r-1)."""
    prime: Prime
    r: int
    matrix: LocalMatrix
    conjugator: LocalMatrix
    degree: int


def exhecke_element(cert, precision: int = DEFAULT_PRECISION) -> HeckeElement:
    """Build the Hecke element attached to a good-prime certificate.

    The element is s diag(pi^-1, 1, ..., 1) s^-1 for the lattice-aligning
    s of the certificate; the congruence group K(p) is normal in
    GL_r(A_p), so any A_p-basis of the lattice yields the same degree and
    unboundedness properties.
    """
    prime = cert.prime
    r = cert.r
    s = cert.s_matrix
    d = standard_hecke_matrix(prime, r, precision)
    g = s @ d @ s.inverse()
    elem = HeckeElement(prime, r, g, s, prime.residue_size ** (r - 1))
    assert not projectively_bounded(g), "constructed element must be unbounded"
    return elem


def hecke_degree(g: Union[LocalMatrix, HeckeElement], depth: int = 1,
                 budget: int = DEFAULT_BUDGET) -> int:
    """[K : K cap g^-1 K g] at level K = K(p^depth), by coset counting.

    Works in the finite quotient K(p^depth)/K(p^2*depth) ~ Mat_r(A/p^depth)
    after verifying K(p^2*depth) is contained in both groups, which holds
    exactly when the elementary-divisor spread of g is <= depth.
    """
    if isinstance(g, HeckeElement):
        g = g.matrix
    prime = g.prime
    r = g.r
    exps = g.elementary_divisors()
    spread = exps[-1] - exps[0]
    if spread > depth:
        raise QuotientInsufficient(
            f"divisor spread {spread} > depth {depth}: the quotient mod "
            f"p^{2 * depth} does not capture the index")
    qres = prime.residue_size
    total = qres ** (depth * r * r)
    if total > budget:
        raise BudgetExceeded(f"{total} cosets exceed budget {budget}")
    g_inv = g.inverse()
    if depth == 1:
        members = _count_members_depth1(g, g_inv)
    else:
        members = _count_members_generic(g, g_inv, depth)
    assert total % members == 0
    return total // members


def _count_members_depth1(g: LocalMatrix, g_inv: LocalMatrix) -> int:
    """Count M in Mat_r(k(p)) with g(1 + pM)g^-1 in K(p): the linear
    condition sum M_ab g_ia (g^-1)_bj integral, tested on the pi^-1 digit."""
    prime = g.prime
    r = g.r
    kp = residue_field(prime)
    # per (i, j): list of (flat index a*r+b, residue of the pi^-1 digit)
    constraints = []
    for i in range(r):
        for j in range(r):
            terms = []
            for a in range(r):
                ga = g.rows[i][a]
                if ga.kind == "z":
                    continue
                for b in range(r):
                    gb = g_inv.rows[b][j]
                    if gb.kind == "z":
                        continue
                    if ga.kind == "u" or gb.kind == "u":
                        if ga.val + gb.val >= 0:
                            continue  # certified integral, no constraint
                        raise PrecisionExhausted("tensor digit uncertified")
                    t = ga.mul(gb)
                    if t.kind != "n" or t.val >= 0:
                        continue
                    assert t.val == -1, "spread <= 1 bounds the tensor at pi^-1"
                    c = kp.reduce(t.digits[0])
                    if c:
                        terms.append((a * r + b, c))
            if terms:
                constraints.append(terms)
    count = 0
    for m in itertools.product(range(kp.size), repeat=r * r):
        ok = True
        for terms in constraints:
            acc = 0
            for idx, c in terms:
                if m[idx]:
                    acc = kp.add(acc, kp.mul(m[idx], c))
            if acc:
                ok = False
                break
        if ok:
            count += 1
    return count


def _count_members_generic(g: LocalMatrix, g_inv: LocalMatrix,
                           depth: int) -> int:
    """Slow general-depth path: lift each class, conjugate, test mod p^depth."""
    prime = g.prime
    r = g.r
    ring = ChainRing(prime, depth)
    elems = list(ring.elements())
    prec = max(DEFAULT_PRECISION, 3 * depth + 4)
    ident = LocalMatrix.identity(prime, r, prec)
    count = 0
    for entries in itertools.product(elems, repeat=r * r):
        mat = [[LocalElement.from_poly(prime, entries[i * r + j], prec).shift(depth)
                if not entries[i * r + j].is_zero() else LocalElement.zero(prime)
                for j in range(r)] for i in range(r)]
        h = LocalMatrix(prime, [[ident.rows[i][j].add(mat[i][j])
                                 for j in range(r)] for i in range(r)])
        w = g @ h @ g_inv
        ok = True
        for i in range(r):
            for j in range(r):
                e = w.entry(i, j).sub(ident.rows[i][j])
                if not e.has_val_at_least(depth):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            count += 1
    return count


# ---------------------------------------------------------------------------
# Sampled unboundedness certification

@dataclass
class SampleOutcome:
    index: int
    v_a0: Optional[int]
    v_atop: Optional[int]
    segments: int
    passed: bool


@dataclass
class SampleReport:
    prime_text: str
    r: int
    samples: int
    seed: int
    outcomes: List[SampleOutcome]

    @property
    def passes(self) -> int:
        return sum(1 for o in self.outcomes if o.passed)

    @property
    def all_pass(self) -> bool:
        return self.passes == self.samples


def unboundedness_sample_check(g: Union[LocalMatrix, HeckeElement],
                               samples: int = 100, seed: int = 0,
                               precision: int = DEFAULT_PRECISION) -> SampleReport:
    """Sample k_1, k_2 in the depth-1 congruence group and certify that
    the characteristic polynomial of k_2^-1 D k_1^-1 has v(a_0) = -1,
    v(a_{r-1}) = -1 and at least two Newton segments.

    For a HeckeElement the diagonal model D = diag(pi^-1, 1, ..., 1) is
    used (equivalent by normality of K(p) under GL_r(A_p)); a raw matrix
    is checked as given, which exercises the failure path for bounded
    inputs.
    """
    if isinstance(g, HeckeElement):
        prime, r = g.prime, g.r
        core = standard_hecke_matrix(prime, r, precision)
    else:
        prime, r = g.prime, g.r
        core = g
    outcomes = []
    for idx in range(samples):
        rng = random.Random((seed << 20) ^ (idx * 1000003 + 1))
        k1 = _random_congruence_matrix(prime, r, rng, precision)
        k2 = _random_congruence_matrix(prime, r, rng, precision)
        b = k2.inverse() @ core @ k1.inverse()
        cp = char_poly(b)
        np_ = newton_polygon(cp)
        v0 = cp[0].val if cp[0].kind == "n" else None
        vtop = cp[r - 1].val if cp[r - 1].kind == "n" else None
        passed = (v0 == -1 and vtop == -1 and np_.segment_count >= 2)
        outcomes.append(SampleOutcome(idx, v0, vtop, np_.segment_count, passed))
    return SampleReport(str(prime), r, samples, seed, outcomes)


def _random_congruence_matrix(prime: Prime, r: int, rng,
                              precision: int) -> LocalMatrix:
    """Uniform element of K(p) mod p^precision: 1 + p*M with M integral."""
    depth = precision - 1
    d = prime.degree
    rows = []
    for i in range(r):
        row = []
        for j in range(r):
            coeffs = [rng.randrange(prime.field.size) for _ in range(d * depth)]
            f = Poly(prime.field, coeffs)
            entry = (LocalElement.zero(prime) if f.is_zero()
                     else LocalElement.from_poly(prime, f, precision).shift(1))
            if i == j:
                entry = entry.add(LocalElement.one(prime, precision))
            row.append(entry)
        rows.append(row)
    return LocalMatrix(prime, rows)


def companion_matrix(prime: Prime, coeffs: Sequence[LocalElement]) -> LocalMatrix:
    """Companion matrix of the monic polynomial with coefficient list
    [a_0, ..., a_{r-1}] (the lambda^r coefficient is implicit)."""
    r = len(coeffs)
    zero = LocalElement.zero(prime)
    one = LocalElement.one(prime)
    rows = [[zero for _ in range(r)] for _ in range(r)]
    for i in range(1, r):
        rows[i][i - 1] = one
    for i in range(r):
        rows[i][r - 1] = coeffs[i].neg()
    return LocalMatrix(prime, rows)
