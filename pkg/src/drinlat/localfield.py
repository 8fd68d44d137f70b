"""Truncated arithmetic in the completion F_p, matrices, Smith normal
form over the valuation ring, lattices, and stabilizer-index machinery.

Elements carry pi-adic digits (residue-field representatives) to a fixed
number of significant places; any operation that cannot certify a
valuation at working precision raises PrecisionExhausted instead of
guessing.  The default precision is 12 significant digits, overridable
per constructor call.

All quantities the callers consume (indices, group orders, exponents)
are exact integers; truncation only ever produces a refusal, never a
wrong number.
"""

from __future__ import annotations

import itertools
from typing import List, Optional, Sequence, Tuple

from ._chainring import (ChainRing, enumerate_module, howell_form,
                         module_size, solve_into_module)
from .errors import (BudgetExceeded, NotContained, NotSaturated,
                     PrecisionExhausted, Singular)
from .ffpoly import (FiniteField, Poly, Prime, poly_to_str, residue_field)

DEFAULT_PRECISION = 12
DEFAULT_BUDGET = 2 ** 16


def _digit_divmod(prime: Prime, f: Poly):
    """Split an A-polynomial into (digit, carry) with f = digit + p*carry."""
    q, r = divmod(f, prime.poly)
    return r, q


class LocalElement:
    """Element of F_p known to finite pi-adic precision.

    kind 'n': nonzero, value = sum digits[i] * pi^(val+i), digits[0] != 0,
              known modulo pi^(val + len(digits)).
    kind 'z': exactly zero.
    kind 'u': O(pi^val): congruent to 0 mod pi^val, true valuation
              uncertified (apparent zero after cancellation).

    ``exact`` marks elements whose stored digits are the complete
    expansion (all later digits zero); sums and products of exact
    elements stay exact, so cancellation to a true zero is recognized
    instead of degrading to an uncertified O(pi^m).
    """

    __slots__ = ("prime", "kind", "val", "digits", "exact")

    def __init__(self, prime: Prime, kind: str, val: int,
                 digits: Tuple[Poly, ...], exact: bool = False):
        self.prime = prime
        self.kind = kind
        self.val = val
        self.digits = digits
        self.exact = exact if kind == "n" else (kind == "z")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(prime: Prime) -> "LocalElement":
        return LocalElement(prime, "z", 0, ())

    @staticmethod
    def unknown(prime: Prime, bound: int) -> "LocalElement":
        return LocalElement(prime, "u", bound, ())

    @staticmethod
    def from_poly(prime: Prime, f: Poly, precision: int = DEFAULT_PRECISION) -> "LocalElement":
        if f.is_zero():
            return LocalElement.zero(prime)
        val = 0
        while True:
            digit, carry = _digit_divmod(prime, f)
            if not digit.is_zero():
                break
            f = carry
            val += 1
        digits = []
        while not f.is_zero() and len(digits) < precision:
            digit, f = _digit_divmod(prime, f)
            digits.append(digit)
        exact = f.is_zero()
        while len(digits) < precision:
            digits.append(Poly.zero(prime.field))
        return LocalElement(prime, "n", val, tuple(digits), exact)

    @staticmethod
    def from_ratio(prime: Prime, num: Poly, den: Poly,
                   precision: int = DEFAULT_PRECISION) -> "LocalElement":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            return LocalElement.zero(prime)
        a = LocalElement.from_poly(prime, num, precision)
        b = LocalElement.from_poly(prime, den, precision)
        return a.mul(b.inv())

    @staticmethod
    def from_integer(prime: Prime, c: int, precision: int = DEFAULT_PRECISION) -> "LocalElement":
        return LocalElement.from_poly(prime, Poly.const(prime.field, c), precision)

    @staticmethod
    def one(prime: Prime, precision: int = DEFAULT_PRECISION) -> "LocalElement":
        return LocalElement.from_integer(prime, 1, precision)

    @staticmethod
    def pi_power(prime: Prime, k: int, precision: int = DEFAULT_PRECISION) -> "LocalElement":
        return LocalElement.one(prime, precision).shift(k)

    # -- queries -----------------------------------------------------------

    def is_zero_at_precision(self) -> bool:
        return self.kind != "n"

    @property
    def abs_prec(self) -> Optional[int]:
        """Element is known modulo pi^abs_prec (None = exact zero)."""
        if self.kind == "n":
            return self.val + len(self.digits)
        if self.kind == "u":
            return self.val
        return None

    def certified_val(self) -> int:
        if self.kind == "n":
            return self.val
        if self.kind == "z":
            raise Singular("exact zero has valuation +infinity")
        raise PrecisionExhausted(
            f"valuation uncertified beyond O(pi^{self.val})")

    def val_lower_bound(self) -> Optional[int]:
        """Certified lower bound; None means +infinity (exact zero)."""
        if self.kind == "z":
            return None
        return self.val

    def is_integral(self) -> bool:
        """Certified val >= 0 (refuses rather than guessing)."""
        if self.kind == "z":
            return True
        if self.val >= 0:
            return True
        if self.kind == "n":
            return False
        raise PrecisionExhausted("cannot certify integrality")

    def has_val_at_least(self, c: int) -> bool:
        if self.kind == "z":
            return True
        if self.val >= c:
            return True
        if self.kind == "n":
            return False
        raise PrecisionExhausted(f"cannot certify valuation >= {c}")

    # -- arithmetic ----------------------------------------------------------

    def _window(self, lo: int, hi: int) -> List[Poly]:
        """Digits covering positions [lo, hi); caller guarantees lo >= val
        is not required (leading positions fill with zero)."""
        zero = Poly.zero(self.prime.field)
        out = []
        for pos in range(lo, hi):
            i = pos - self.val
            out.append(self.digits[i] if 0 <= i < len(self.digits) else zero)
        return out

    def neg(self) -> "LocalElement":
        if self.kind != "n":
            return self
        return LocalElement(self.prime, "n", self.val,
                            tuple(-d for d in self.digits), self.exact)

    def add(self, other: "LocalElement") -> "LocalElement":
        p = self.prime
        a, b = self, other
        if a.kind == "z":
            return b
        if b.kind == "z":
            return a
        if a.kind == "n" and b.kind == "n" and a.exact and b.exact:
            lo = min(a.val, b.val)
            hi = max(a.abs_prec, b.abs_prec)
            raw = [x + y for x, y in zip(a._window(lo, hi), b._window(lo, hi))]
            return _normalize(p, lo, raw, hi, exact=True)
        hi = min(a.abs_prec, b.abs_prec)
        if a.kind == "u" and b.kind == "u":
            return LocalElement.unknown(p, hi)
        if a.kind == "u" or b.kind == "u":
            n = a if a.kind == "n" else b
            if n.val >= hi:
                return LocalElement.unknown(p, hi)
            return _normalize(p, n.val, n._window(n.val, hi), hi)
        lo = min(a.val, b.val)
        if hi <= lo:
            return LocalElement.unknown(p, hi)
        raw = [x + y for x, y in zip(a._window(lo, hi), b._window(lo, hi))]
        return _normalize(p, lo, raw, hi)

    def sub(self, other: "LocalElement") -> "LocalElement":
        return self.add(other.neg())

    def mul(self, other: "LocalElement") -> "LocalElement":
        p = self.prime
        a, b = self, other
        if a.kind == "z" or b.kind == "z":
            return LocalElement.zero(p)
        if a.kind == "u" or b.kind == "u":
            return LocalElement.unknown(p, a.val + b.val)
        val = a.val + b.val
        if a.exact and b.exact:
            da = _trim_digits(a.digits)
            db = _trim_digits(b.digits)
            raw = [Poly.zero(p.field) for _ in range(len(da) + len(db) - 1)]
            for i, x in enumerate(da):
                if x.is_zero():
                    continue
                for j, y in enumerate(db):
                    if not y.is_zero():
                        raw[i + j] = raw[i + j] + x * y
            width = max(len(a.digits), len(b.digits), len(raw))
            out = _normalize(p, val, raw, val + width, exact=True)
            assert out.kind == "n" and out.val == val
            return out
        prec = min(len(a.digits), len(b.digits))
        raw = [Poly.zero(p.field) for _ in range(prec)]
        for i, x in enumerate(a.digits[:prec]):
            if x.is_zero():
                continue
            for j, y in enumerate(b.digits[:prec - i]):
                if not y.is_zero():
                    raw[i + j] = raw[i + j] + x * y
        out = _normalize(p, val, raw, val + prec)
        assert out.kind == "n" and out.val == val, "leading digits cannot cancel"
        return out


    def inv(self) -> "LocalElement":
        p = self.prime
        if self.kind == "z":
            raise ZeroDivisionError("inverse of exact zero")
        if self.kind == "u":
            raise PrecisionExhausted("inverse of uncertified element")
        prec = len(self.digits)
        pi = p.poly
        mod = residue_field(p)
        d0_inv = mod.lift(mod.inv(mod.reduce(self.digits[0])))
        # schoolbook division 1 / unit-part
        rem = [Poly.one(p.field)] + [Poly.zero(p.field)] * (prec - 1)
        out = []
        for i in range(prec):
            digit = (rem[i] * d0_inv) % pi
            out.append(digit)
            if digit.is_zero():
                continue
            carry = Poly.zero(p.field)
            for j in range(i, prec):
                cur = rem[j] - digit * self.digits[j - i] - carry
                rem[j], c2 = _digit_divmod(p, cur)
                carry = -c2
        return LocalElement(p, "n", -self.val, tuple(out))

    def div(self, other: "LocalElement") -> "LocalElement":
        return self.mul(other.inv())

    def shift(self, k: int) -> "LocalElement":
        if self.kind == "z":
            return self
        return LocalElement(self.prime, self.kind, self.val + k, self.digits,
                            self.exact)

    def residue_poly(self, k: int) -> Poly:
        """Canonical representative of the class mod p^k (requires the
        element to be certified integral and known to depth k)."""
        if self.kind == "z":
            return Poly.zero(self.prime.field)
        if self.val >= k:
            return Poly.zero(self.prime.field)
        if self.kind == "u":
            raise PrecisionExhausted(f"class mod p^{k} uncertified")
        if self.val < 0:
            raise ValueError("element is not integral")
        if self.abs_prec < k and not self.exact:
            raise PrecisionExhausted(f"known only mod p^{self.abs_prec} < p^{k}")
        acc = Poly.zero(self.prime.field)
        for i in range(k - self.val):
            acc = acc + self.digits[i] * self.prime.poly ** (self.val + i)
        return acc % self.prime.poly ** k

    def __eq__(self, other):
        return (isinstance(other, LocalElement) and self.prime == other.prime
                and self.kind == other.kind and self.val == other.val
                and self.digits == other.digits)

    def __hash__(self):
        return hash((self.prime, self.kind, self.val, self.digits))

    def __repr__(self):
        if self.kind == "z":
            return "0"
        if self.kind == "u":
            return f"O(pi^{self.val})"
        parts = [f"({poly_to_str(d)})*pi^{self.val + i}"
                 for i, d in enumerate(self.digits) if not d.is_zero()]
        return " + ".join(parts) + f" + O(pi^{self.abs_prec})"

    def to_json(self) -> dict:
        prime = poly_to_str(self.prime.poly)
        if self.kind == "z":
            return {"prime": prime, "valuation": "inf", "digits": [],
                    "precision": 0}
        if self.kind == "u":
            return {"prime": prime, "valuation": None, "bound": self.val,
                    "digits": [], "precision": 0}
        return {"prime": prime, "valuation": self.val,
                "digits": [poly_to_str(d) for d in self.digits],
                "precision": len(self.digits)}


def _trim_digits(digits: Tuple[Poly, ...]) -> Tuple[Poly, ...]:
    n = len(digits)
    while n > 0 and digits[n - 1].is_zero():
        n -= 1
    return digits[:n]


def _normalize(prime: Prime, val: int, raw: List[Poly], abs_prec: int,
               exact: bool = False) -> LocalElement:
    """Carry-normalize raw digit accumulators for positions val..; the
    result is known modulo pi^abs_prec (everywhere, when exact)."""
    digits: List[Poly] = []
    carry = Poly.zero(prime.field)
    for f in raw:
        digit, carry2 = _digit_divmod(prime, f + carry)
        digits.append(digit)
        carry = carry2
    while exact and not carry.is_zero():
        digit, carry = _digit_divmod(prime, carry)
        digits.append(digit)
    if not exact:
        digits = digits[:max(0, abs_prec - val)]
    lead = 0
    while lead < len(digits) and digits[lead].is_zero():
        lead += 1
    if lead == len(digits):
        if exact:
            return LocalElement.zero(prime)
        return LocalElement.unknown(prime, abs_prec)
    out = digits[lead:]
    if exact:
        # keep the construction-time window as stored precision
        want = abs_prec - (val + lead)
        while len(out) < want:
            out.append(Poly.zero(prime.field))
    return LocalElement(prime, "n", val + lead, tuple(out), exact)


# ---------------------------------------------------------------------------
# Matrices over F_p


class LocalMatrix:
    """Square matrix over F_p with LocalElement entries."""

    __slots__ = ("prime", "r", "rows")

    def __init__(self, prime: Prime, rows: Sequence[Sequence[LocalElement]]):
        self.prime = prime
        self.rows = tuple(tuple(row) for row in rows)
        self.r = len(self.rows)
        assert all(len(row) == self.r for row in self.rows)

    @staticmethod
    def identity(prime: Prime, r: int, precision: int = DEFAULT_PRECISION) -> "LocalMatrix":
        one = LocalElement.one(prime, precision)
        zero = LocalElement.zero(prime)
        return LocalMatrix(prime, [[one if i == j else zero for j in range(r)]
                                   for i in range(r)])

    @staticmethod
    def diagonal(prime: Prime, entries: Sequence[LocalElement]) -> "LocalMatrix":
        zero = LocalElement.zero(prime)
        r = len(entries)
        return LocalMatrix(prime, [[entries[i] if i == j else zero
                                    for j in range(r)] for i in range(r)])

    @staticmethod
    def from_polys(prime: Prime, entries: Sequence[Sequence[Poly]],
                   precision: int = DEFAULT_PRECISION) -> "LocalMatrix":
        return LocalMatrix(prime, [
            [LocalElement.from_poly(prime, e, precision) for e in row]
            for row in entries])

    def __matmul__(self, other: "LocalMatrix") -> "LocalMatrix":
        r = self.r
        zero = LocalElement.zero(self.prime)
        out = []
        for i in range(r):
            row = []
            for j in range(r):
                acc = zero
                for l in range(r):
                    acc = acc.add(self.rows[i][l].mul(other.rows[l][j]))
                row.append(acc)
            out.append(row)
        return LocalMatrix(self.prime, out)

    def entry(self, i: int, j: int) -> LocalElement:
        return self.rows[i][j]

    def transpose(self) -> "LocalMatrix":
        return LocalMatrix(self.prime, list(zip(*self.rows)))

    def scale(self, c: LocalElement) -> "LocalMatrix":
        return LocalMatrix(self.prime,
                           [[e.mul(c) for e in row] for row in self.rows])

    def is_integral(self) -> bool:
        return all(e.is_integral() for row in self.rows for e in row)

    def min_val_lower_bound(self) -> Optional[int]:
        bounds = [e.val_lower_bound() for row in self.rows for e in row]
        finite = [b for b in bounds if b is not None]
        return min(finite) if finite else None

    def elementary_divisors(self) -> Tuple[int, ...]:
        return smith_normal_form(self)[1]

    def det_valuation(self) -> int:
        return sum(self.elementary_divisors())

    def inverse(self) -> "LocalMatrix":
        u, exps, v, u_inv, v_inv = _snf_full(self)
        precs = [len(e.digits) for row in self.rows for e in row if e.kind == "n"]
        prec = min(precs) if precs else DEFAULT_PRECISION
        d_inv = LocalMatrix.diagonal(
            self.prime, [LocalElement.pi_power(self.prime, -e, prec) for e in exps])
        return v_inv @ d_inv @ u_inv

    def __repr__(self):
        return f"LocalMatrix({self.rows!r})"


def _elem_add_rowmult(mat: List[List[LocalElement]], dst: int, src: int,
                      c: LocalElement) -> None:
    mat[dst] = [a.add(c.mul(b)) for a, b in zip(mat[dst], mat[src])]


def _elem_add_colmult(mat: List[List[LocalElement]], dst: int, src: int,
                      c: LocalElement) -> None:
    for row in mat:
        row[dst] = row[dst].add(c.mul(row[src]))


def _snf_full(M: LocalMatrix):
    """Smith normal form with all four transforms.

    Returns (U, exps, V, U_inv, V_inv) with M = U diag(pi^exps) V up to
    working precision, U and V integral with valuation-0 determinant.
    Pivot rule: minimum certified valuation, ties by row-major position.
    """
    prime = M.prime
    r = M.r
    prec = DEFAULT_PRECISION
    A = [list(row) for row in M.rows]
    L = [list(row) for row in LocalMatrix.identity(prime, r, prec).rows]
    Li = [list(row) for row in LocalMatrix.identity(prime, r, prec).rows]
    R = [list(row) for row in LocalMatrix.identity(prime, r, prec).rows]
    Ri = [list(row) for row in LocalMatrix.identity(prime, r, prec).rows]
    zero = LocalElement.zero(prime)
    exps: List[int] = []

    def swap_rows(mat, i, j):
        mat[i], mat[j] = mat[j], mat[i]

    def swap_cols(mat, i, j):
        for row in mat:
            row[i], row[j] = row[j], row[i]

    for k in range(r):
        # certified minimum-valuation pivot in the trailing submatrix
        best = None
        best_val = None
        uncert_bound = None
        for i in range(k, r):
            for j in range(k, r):
                e = A[i][j]
                if e.kind == "n":
                    if best_val is None or e.val < best_val:
                        best, best_val = (i, j), e.val
                elif e.kind == "u":
                    if uncert_bound is None or e.val < uncert_bound:
                        uncert_bound = e.val
        if best is None:
            if uncert_bound is not None:
                raise PrecisionExhausted("no certifiable pivot in submatrix")
            raise Singular("matrix is singular: zero trailing submatrix")
        if uncert_bound is not None and uncert_bound < best_val:
            raise PrecisionExhausted(
                f"entry O(pi^{uncert_bound}) may undercut pivot pi^{best_val}")
        i0, j0 = best
        if i0 != k:
            swap_rows(A, i0, k)
            swap_rows(Li, i0, k)
            swap_cols(L, i0, k)
        if j0 != k:
            swap_cols(A, j0, k)
            swap_cols(Ri, j0, k)
            swap_rows(R, j0, k)
        e = best_val
        pivot = A[k][k]
        unit = pivot.shift(-e)  # valuation-0 unit part
        unit_inv = unit.inv()
        # scale row k so the pivot is exactly pi^e
        A[k] = [x.mul(unit_inv) for x in A[k]]
        A[k][k] = LocalElement.pi_power(prime, e, prec)
        Li[k] = [x.mul(unit_inv) for x in Li[k]]
        for idx in range(r):
            L[idx][k] = L[idx][k].mul(unit)
        for i in range(k + 1, r):
            x = A[i][k]
            if x.kind == "z":
                continue
            c = x.shift(-e).neg()  # -x/pi^e, integral since val(x) >= e
            _elem_add_rowmult(A, i, k, c)
            A[i][k] = zero
            _elem_add_rowmult(Li, i, k, c)
            _elem_add_colmult(L, k, i, c.neg())
        for j in range(k + 1, r):
            x = A[k][j]
            if x.kind == "z":
                continue
            c = x.shift(-e).neg()
            _elem_add_colmult(A, j, k, c)
            A[k][j] = zero
            _elem_add_colmult(Ri, j, k, c)
            _elem_add_rowmult(R, k, j, c.neg())
        exps.append(e)

    # global min-valuation pivoting makes the exponents ascending already
    assert all(exps[i] <= exps[i + 1] for i in range(r - 1))
    return (LocalMatrix(prime, L), tuple(exps), LocalMatrix(prime, R),
            LocalMatrix(prime, Li), LocalMatrix(prime, Ri))


def smith_normal_form(M: LocalMatrix):
    """(U, exponents, V) with M = U diag(pi^e) V, exponents ascending."""
    u, exps, v, _, _ = _snf_full(M)
    return u, exps, v


# ---------------------------------------------------------------------------
# Lattices


class Lattice:
    """Full-rank A_p-lattice in F_p^r given by a basis (columns)."""

    __slots__ = ("prime", "r", "basis", "_divisors")

    def __init__(self, basis: LocalMatrix):
        self.prime = basis.prime
        self.r = basis.r
        self.basis = basis
        self._divisors: Optional[Tuple[int, ...]] = None

    @staticmethod
    def standard(prime: Prime, r: int, precision: int = DEFAULT_PRECISION) -> "Lattice":
        return Lattice(LocalMatrix.identity(prime, r, precision))

    @staticmethod
    def from_poly_basis(prime: Prime, cols: Sequence[Sequence[Poly]],
                        precision: int = DEFAULT_PRECISION) -> "Lattice":
        """Columns given as A-polynomial vectors."""
        r = len(cols)
        rows = [[LocalElement.from_poly(prime, cols[j][i], precision)
                 for j in range(r)] for i in range(r)]
        return Lattice(LocalMatrix(prime, rows))

    @property
    def elementary_divisors(self) -> Tuple[int, ...]:
        """Exponents relative to the standard lattice A_p^r."""
        if self._divisors is None:
            self._divisors = self.basis.elementary_divisors()
        return self._divisors

    def __eq__(self, other):
        if not isinstance(other, Lattice) or self.prime != other.prime:
            return False
        change = self.basis.inverse() @ other.basis
        if not change.is_integral():
            return False
        return change.det_valuation() == 0

    def __hash__(self):  # pragma: no cover - lattices are not dict keys
        raise TypeError("Lattice is unhashable; equality is semantic")

    def __repr__(self):
        return f"Lattice(divisors={self.elementary_divisors})"


def lattice_index(sub: Lattice, sup: Lattice) -> int:
    """|sup / sub| for sub contained in sup, as an exact integer."""
    change = sup.basis.inverse() @ sub.basis
    if not change.is_integral():
        raise NotContained("first lattice is not contained in the second")
    exps = change.elementary_divisors()
    return sub.prime.residue_size ** sum(exps)


def count_matrix_group(r: int, q_res: int, k: int) -> Tuple[int, int]:
    """(|GL_r(R/m^k)|, |Mat_r(R/m^k)|) over a chain ring with residue
    field of size q_res, by the closed form."""
    assert r >= 1 and k >= 1
    gl = q_res ** ((k - 1) * r * r)
    for i in range(r):
        gl *= q_res ** r - q_res ** i
    mat = q_res ** (k * r * r)
    return gl, mat


def count_matrix_group_exhaustive(prime: Prime, r: int, k: int) -> Tuple[int, int]:
    """Brute-force counterpart of count_matrix_group over A/p^k."""
    ring = ChainRing(prime, k)
    kp = residue_field(prime)
    elems = list(ring.elements())
    total = 0
    invertible = 0
    for entries in itertools.product(elems, repeat=r * r):
        total += 1
        red = [[kp.reduce(entries[i * r + j]) for j in range(r)]
               for i in range(r)]
        if _det_residue(kp, red) != 0:
            invertible += 1
    return invertible, total


def _det_residue(field: FiniteField, mat: List[List[int]]) -> int:
    """Determinant over a finite field by Gaussian elimination."""
    m = [row[:] for row in mat]
    n = len(m)
    det = 1
    for c in range(n):
        piv = next((i for i in range(c, n) if m[i][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            m[c], m[piv] = m[piv], m[c]
            det = field.neg(det)
        det = field.mul(det, m[c][c])
        inv = field.inv(m[c][c])
        for i in range(c + 1, n):
            if m[i][c] == 0:
                continue
            f = field.mul(m[i][c], inv)
            m[i] = [field.sub(a, field.mul(f, b)) for a, b in zip(m[i], m[c])]
    return det


# ---------------------------------------------------------------------------
# Orders A'_p and stabilizer indices


class OrderStructure:
    """A_p-algebra R' = A'_p presented by the minimal polynomial of a
    generator y, acting on A_p^r via the block companion matrix.

    factors lists the (ramification e, residue degree f) of each local
    factor; the factor polynomials are pairwise coprime mod p and their
    product is the minimal polynomial.
    """

    def __init__(self, prime: Prime, r_prime: int,
                 factor_polys: Optional[Sequence[Sequence[Poly]]],
                 factors: Sequence[Tuple[int, int]], kind: str,
                 min_poly: Optional[Sequence[Poly]] = None):
        self.prime = prime
        self.r_prime = r_prime
        self.factors = tuple(factors)
        self.m = sum(e * f for e, f in self.factors)
        self.r = r_prime * self.m
        self.kind = kind
        if min_poly is not None:
            self.min_poly = list(min_poly)
        else:
            self.factor_polys = tuple(tuple(fp) for fp in factor_polys)
            self.min_poly = _ypoly_product(prime.field, self.factor_polys)
        assert len(self.min_poly) == self.m + 1
        assert self.min_poly[-1].is_one()

    @staticmethod
    def from_min_poly(prime: Prime, r_prime: int, coeffs: Sequence[Poly],
                      factors: Sequence[Tuple[int, int]],
                      kind: str = "extension") -> "OrderStructure":
        """Order presented by a caller-supplied generator minimal polynomial
        (e.g. the defining polynomial of a global extension localized at p);
        the factor shape list feeds the group-order formula only."""
        return OrderStructure(prime, r_prime, None, factors, kind,
                              min_poly=coeffs)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def trivial(prime: Prime, r_prime: int) -> "OrderStructure":
        one = Poly.one(prime.field)
        return OrderStructure(prime, r_prime, [[-one, one]], [(1, 1)], "trivial")

    @staticmethod
    def unramified(prime: Prime, r_prime: int, m: int) -> "OrderStructure":
        if m == 1:
            return OrderStructure.trivial(prime, r_prime)
        fp = _unramified_factor(prime, m, avoid=())
        return OrderStructure(prime, r_prime, [fp], [(1, m)], "unramified")

    @staticmethod
    def totally_ramified(prime: Prime, r_prime: int, m: int) -> "OrderStructure":
        if m == 1:
            return OrderStructure.trivial(prime, r_prime)
        F = prime.field
        coeffs = [-prime.poly] + [Poly.zero(F)] * (m - 1) + [Poly.one(F)]
        return OrderStructure(prime, r_prime, [coeffs], [(m, 1)], "ramified")

    @staticmethod
    def product(prime: Prime, r_prime: int,
                parts: Sequence[Tuple[str, int]]) -> "OrderStructure":
        """parts: list of ('unramified'|'ramified', m_i); factor polynomials
        are chosen pairwise coprime mod p."""
        F = prime.field
        kp = residue_field(prime)
        used_linear: List[int] = []  # residues already used as y = c shapes
        used_unram: List[Tuple] = []
        polys = []
        facts = []
        for kind, mi in parts:
            if kind == "ramified" and mi > 1:
                c = next(x for x in kp.elements() if x not in used_linear)
                used_linear.append(c)
                shift = kp.lift(c)
                # (y - c)^m - p, Eisenstein at p after the shift
                coeffs = _ypoly_shifted_power(F, shift, mi)
                coeffs[0] = coeffs[0] - prime.poly
                polys.append(coeffs)
                facts.append((mi, 1))
            else:
                if mi == 1:
                    c = next(x for x in kp.elements() if x not in used_linear)
                    used_linear.append(c)
                    polys.append([-kp.lift(c), Poly.one(F)])
                    facts.append((1, 1))
                else:
                    fp = _unramified_factor(prime, mi, avoid=tuple(used_unram))
                    used_unram.append(tuple(fp))
                    polys.append(fp)
                    facts.append((1, mi))
        return OrderStructure(prime, r_prime, polys, facts, "product")

    # -- derived data -------------------------------------------------------

    def companion(self) -> List[List[Poly]]:
        """Multiplication-by-y matrix on A_p^m (columns convention)."""
        F = self.prime.field
        m = self.m
        zero = Poly.zero(F)
        one = Poly.one(F)
        mat = [[zero for _ in range(m)] for _ in range(m)]
        for j in range(m - 1):
            mat[j + 1][j] = one
        for i in range(m):
            mat[i][m - 1] = -self.min_poly[i]
        return mat

    def companion_block(self) -> List[List[Poly]]:
        """Block-diagonal y-action on A_p^r = (A_p^m)^(r')."""
        m, rp = self.m, self.r_prime
        comp = self.companion()
        zero = Poly.zero(self.prime.field)
        n = m * rp
        mat = [[zero for _ in range(n)] for _ in range(n)]
        for b in range(rp):
            for i in range(m):
                for j in range(m):
                    mat[b * m + i][b * m + j] = comp[i][j]
        return mat

    def companion_block_local(self, precision: int = DEFAULT_PRECISION) -> LocalMatrix:
        return LocalMatrix.from_polys(self.prime, self.companion_block(), precision)

    def gl_order(self, k: int) -> int:
        """|GL_{r'}(R'/p^k R')| by the closed form, factor by factor."""
        total = 1
        for e, f in self.factors:
            q_res = self.prime.residue_size ** f
            total *= count_matrix_group(self.r_prime, q_res, k * e)[0]
        return total

    def ring_size(self, k: int) -> int:
        return self.prime.residue_size ** (k * self.m)

    def y_power_blocks(self, ring: ChainRing) -> List[List[List[Poly]]]:
        """rho(y)^j mod p^k for j = 0..m-1, as m x m chain-ring matrices."""
        m = self.m
        comp = [[ring.reduce(c) for c in row] for row in self.companion()]
        powers = [_chain_identity(ring, m)]
        for _ in range(m - 1):
            powers.append(_chain_matmul(ring, comp, powers[-1]))
        return powers


def _unramified_factor(prime: Prime, m: int, avoid: Tuple) -> List[Poly]:
    """Lift of the first monic irreducible of degree m over k(p) not in
    ``avoid``; coefficients are canonical A-representatives."""
    kp = residue_field(prime)
    for tail in itertools.product(kp.elements(), repeat=m):
        f = [kp.lift(c) for c in tail] + [Poly.one(prime.field)]
        if tuple(f) in avoid:
            continue
        rf = Poly(kp, tuple(tail) + (1,))
        if rf.is_irreducible():
            return f
    raise AssertionError("no irreducible factor available")


def _ypoly_shifted_power(F: FiniteField, shift: Poly, m: int) -> List[Poly]:
    """Coefficients of (y - shift)^m as A-polynomials."""
    coeffs = [Poly.one(F)]
    for _ in range(m):
        new = [Poly.zero(F) for _ in range(len(coeffs) + 1)]
        for i, c in enumerate(coeffs):
            new[i + 1] = new[i + 1] + c
            new[i] = new[i] - c * shift
        coeffs = new
    return coeffs


def _ypoly_product(F: FiniteField, factor_polys) -> List[Poly]:
    out = [Poly.one(F)]
    for fp in factor_polys:
        new = [Poly.zero(F) for _ in range(len(out) + len(fp) - 1)]
        for i, a in enumerate(out):
            for j, b in enumerate(fp):
                new[i + j] = new[i + j] + a * b
        out = new
    return out


def _chain_identity(ring: ChainRing, n: int):
    return [[ring.one if i == j else ring.zero for j in range(n)]
            for i in range(n)]


def _chain_matmul(ring: ChainRing, a, b):
    n = len(a)
    m = len(b[0])
    inner = len(b)
    out = [[ring.zero for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for l in range(inner):
            x = a[i][l]
            if x.is_zero():
                continue
            for j in range(m):
                if not b[l][j].is_zero():
                    out[i][j] = ring.add(out[i][j], ring.mul(x, b[l][j]))
    return out


def _chain_matvec(ring: ChainRing, a, v):
    n = len(a)
    out = [ring.zero] * n
    for i in range(n):
        acc = ring.zero
        for j, x in enumerate(v):
            if not x.is_zero() and not a[i][j].is_zero():
                acc = ring.add(acc, ring.mul(a[i][j], x))
        out[i] = acc
    return out


def _lattice_columns_chain(lattice, ring: ChainRing) -> List[Tuple[Poly, ...]]:
    """Lattice basis columns as canonical vectors over A/p^k."""
    if isinstance(lattice, Lattice):
        r = lattice.r
        cols = []
        for j in range(r):
            col = tuple(lattice.basis.rows[i][j].residue_poly(ring.k)
                        for i in range(r))
            cols.append(col)
        return cols
    # already a sequence of A-polynomial columns
    return [tuple(ring.reduce(c) for c in col) for col in lattice]


def saturation_holds(order: OrderStructure, lattice) -> bool:
    """Nakayama test of R'.Lambda = R'^(r'): the y-power translates of the
    basis columns must span (A/p)^r over k(p)."""
    prime = order.prime
    ring = ChainRing(prime, 1)
    kp = residue_field(prime)
    cols = _lattice_columns_chain(lattice, ring)
    r = order.r
    blocks = [_chain_block_matrix(ring, order, j) for j in range(order.m)]
    vectors = []
    for col in cols:
        for blk in blocks:
            v = _chain_matvec(ring, blk, col)
            vectors.append([kp.reduce(x) for x in v])
    return _rank_residue(kp, vectors, r) == r


def _chain_block_matrix(ring: ChainRing, order: OrderStructure, j: int):
    """Block-diagonal rho(y)^j on (A/p^k)^r."""
    m, rp = order.m, order.r_prime
    pw = order.y_power_blocks(ring)[j]
    n = m * rp
    out = [[ring.zero for _ in range(n)] for _ in range(n)]
    for b in range(rp):
        for i in range(m):
            for l in range(m):
                out[b * m + i][b * m + l] = pw[i][l]
    return out


def _rank_residue(field: FiniteField, vectors, width: int) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    col = 0
    while col < width and rank < len(rows):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = field.inv(rows[rank][col])
        rows[rank] = [field.mul(inv, x) for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [field.sub(a, field.mul(f, b))
                           for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def _hom_module(order: OrderStructure, ring: ChainRing, src_cols, dst_rows):
    """Howell form of {x in Mat_{r'}(R'/p^k) : x . src subset of <dst>},
    x given by its m*r'^2 chain-ring coordinates."""
    m, rp, r = order.m, order.r_prime, order.r
    ypow = order.y_power_blocks(ring)
    dim = rp * rp * m
    images = []
    for a in range(rp):
        for b in range(rp):
            for j in range(m):
                # x = y^j in block (a, b): image on column v takes v's block b
                # through rho(y)^j into block a
                img_parts = []
                for col in src_cols:
                    vb = col[b * m:(b + 1) * m]
                    w = _chain_matvec(ring, ypow[j], vb)
                    full = [ring.zero] * r
                    full[a * m:(a + 1) * m] = w
                    img_parts.extend(full)
                images.append(tuple(img_parts))
    L = len(src_cols)
    targets = []
    for slot in range(L):
        for row in dst_rows:
            full = [ring.zero] * (r * L)
            full[slot * r:(slot + 1) * r] = list(row)
            targets.append(tuple(full))
    return solve_into_module(ring, images, targets, dim), dim


def _x_residue_matrix(order: OrderStructure, ring: ChainRing, kp, x_coords):
    """Reduction mod p of the block matrix of x, over k(p)."""
    m, rp, r = order.m, order.r_prime, order.r
    ypow_res = order.y_power_blocks(ChainRing(order.prime, 1))
    mat = [[0] * r for _ in range(r)]
    idx = 0
    for a in range(rp):
        for b in range(rp):
            for j in range(m):
                c = kp.reduce(x_coords[idx])
                idx += 1
                if c == 0:
                    continue
                blk = ypow_res[j]
                for i in range(m):
                    for l in range(m):
                        v = kp.reduce(blk[i][l])
                        if v:
                            mat[a * m + i][b * m + l] = kp.add(
                                mat[a * m + i][b * m + l], kp.mul(c, v))
    return mat


def stabilizer_index(lattice, order: OrderStructure, k: Optional[int] = None,
                     budget: int = DEFAULT_BUDGET) -> int:
    """[GL_{r'}(R') : Stab(Lambda)] for a saturated lattice, computed by
    orbit-stabilizer: the stabilizer is the unit group of the finite
    multiplier ring H = {x : x.Lambda subset Lambda} mod p^k.
    """
    prime = order.prime
    if isinstance(lattice, Lattice):
        divisors = lattice.elementary_divisors
    else:
        divisors = Lattice.from_poly_basis(prime, lattice).elementary_divisors
    if min(divisors) < 0:
        raise NotContained("lattice must be integral (scale it first)")
    e_max = max(divisors)
    if k is None:
        k = max(1, e_max)
    if k < e_max:
        raise ValueError(f"depth {k} too small: p^{e_max} needed to contain the lattice")
    if not saturation_holds(order, lattice):
        raise NotSaturated("R'-span of the lattice is not the full module")
    ring = ChainRing(prime, k)
    cols = _lattice_columns_chain(lattice, ring)
    lat_rows = howell_form(ring, [tuple(c) for c in cols])
    sol, dim = _hom_module(order, ring, cols, lat_rows)
    h_size = module_size(ring, sol)
    if h_size > budget:
        raise BudgetExceeded(
            f"stabilizer ring has {h_size} elements, budget {budget}")
    kp = residue_field(prime)
    units = 0
    for x in enumerate_module(ring, sol, budget):
        mat = _x_residue_matrix(order, ring, kp, x)
        if _det_residue(kp, mat) != 0:
            units += 1
    gl = order.gl_order(k)
    assert units > 0 and gl % units == 0, "orbit-stabilizer must divide"
    return gl // units


def gitter_bound_check(lattice, order: OrderStructure, k: Optional[int] = None,
                       budget: int = DEFAULT_BUDGET) -> bool:
    """stab_index >= (1 - 1/q)^r * index^(1/r), compared in exact integers
    (both sides raised to the r-th power)."""
    prime = order.prime
    q = prime.field.size
    r = order.r
    stab = stabilizer_index(lattice, order, k, budget)
    if isinstance(lattice, Lattice):
        lat = lattice
    else:
        lat = Lattice.from_poly_basis(prime, lattice)
    index = prime.residue_size ** sum(lat.elementary_divisors)
    return stab ** r * q ** (r * r) >= (q - 1) ** (r * r) * index


def module_orbit_equal(order: OrderStructure, k: int, cols_a, cols_b,
                       budget: int = DEFAULT_BUDGET) -> bool:
    """Whether two integral lattices lie in one GL_{r'}(R'/p^k)-orbit,
    decided by searching the hom-module for an invertible map."""
    ring = ChainRing(order.prime, k)
    ca = _lattice_columns_chain(cols_a, ring)
    cb = _lattice_columns_chain(cols_b, ring)
    rows_a = howell_form(ring, [tuple(c) for c in ca])
    rows_b = howell_form(ring, [tuple(c) for c in cb])
    if module_size(ring, rows_a) != module_size(ring, rows_b):
        return False
    if rows_a == rows_b:
        return True
    sol, _ = _hom_module(order, ring, ca, rows_b)
    kp = residue_field(order.prime)
    for x in enumerate_module(ring, sol, budget):
        mat = _x_residue_matrix(order, ring, kp, x)
        if _det_residue(kp, mat) != 0:
            return True
    return False


def hnf_column_basis(prime: Prime, columns: Sequence[Sequence[LocalElement]],
                     r: int) -> LocalMatrix:
    """Reduce a spanning set of integral columns to an r-column basis by
    min-valuation column elimination (Hermite style over A_p)."""
    cols = [list(c) for c in columns]
    basis: List[List[LocalElement]] = []
    for row in range(r):
        live = []
        for c in cols:
            e = c[row]
            if e.kind == "n":
                live.append((e.val, c))
            elif e.kind == "u":
                raise PrecisionExhausted("column entry uncertified in HNF")
        if not live:
            continue
        piv_val = min(v for v, _ in live)
        piv = next(c for v, c in live if v == piv_val)
        cols.remove(piv)
        piv_entry = piv[row]
        inv_unit = piv_entry.shift(-piv_val).inv()
        rest = []
        for c in cols:
            e = c[row]
            if e.kind == "z" or (e.kind == "u" and e.val >= piv_val):
                rest.append(c)
                continue
            q = e.shift(-piv_val).mul(inv_unit)
            newc = [a.sub(q.mul(b)) for a, b in zip(c, piv)]
            newc[row] = LocalElement.zero(prime)
            rest.append(newc)
        cols = rest
        basis.append(piv)
    if len(basis) != r:
        raise Singular("columns do not span a full-rank lattice")
    rows = [[basis[j][i] for j in range(r)] for i in range(r)]
    return LocalMatrix(prime, rows)


def saturate_lattice(order: OrderStructure, lattice: Lattice,
                     budget: int = DEFAULT_BUDGET) -> Lattice:
    """Transform a full-rank lattice by an element of GL_{r'}(F'_p) so that
    its R'-span becomes the standard module (the stabilizer index is
    invariant under this normalization, which matches the convention that
    indices are measured inside GL_{r'}(R')).
    """
    prime = order.prime
    r = order.r
    divisors = lattice.elementary_divisors
    if min(divisors) < 0:
        lattice = Lattice(lattice.basis.scale(
            LocalElement.pi_power(prime, -min(divisors))))
    if saturation_holds(order, lattice):
        return lattice
    # A'-span M of the lattice, as an A_p-lattice
    blockm = order.companion_block_local()
    cols = []
    spans = lattice.basis
    for _ in range(order.m):
        for j in range(r):
            cols.append([spans.rows[i][j] for i in range(r)])
        spans = blockm @ spans
    m_basis = hnf_column_basis(prime, cols, r)
    m_lat = Lattice(m_basis)
    k = max(m_lat.elementary_divisors) + 1
    ring = ChainRing(prime, k)
    m_cols = _lattice_columns_chain(m_lat, ring)
    m_rows = howell_form(ring, [tuple(c) for c in m_cols])
    std_cols = [tuple(ring.one if i == j else ring.zero for i in range(r))
                for j in range(r)]
    sol, _ = _hom_module(order, ring, std_cols, m_rows)
    ypow = order.y_power_blocks(ring)
    target_size = module_size(ring, m_rows)
    for x in enumerate_module(ring, sol, budget):
        # does the A'-column span of x equal M mod p^k?
        block = _x_block_matrix(order, ring, ypow, x)
        img = howell_form(ring, [tuple(block[i][j] for i in range(r))
                                 for j in range(r)])
        if img == m_rows:
            h_polys = [[block[i][j] for j in range(r)] for i in range(r)]
            h = LocalMatrix.from_polys(prime, h_polys)
            new_basis = h.inverse() @ lattice.basis
            out = Lattice(new_basis)
            assert saturation_holds(order, out)
            return out
    raise NotSaturated("no normalizing map found below budget")


def _x_block_matrix(order: OrderStructure, ring: ChainRing, ypow, x_coords):
    """Full r x r chain-ring block matrix of x in Mat_{r'}(R'/p^k)."""
    m, rp, r = order.m, order.r_prime, order.r
    mat = [[ring.zero] * r for _ in range(r)]
    idx = 0
    for a in range(rp):
        for b in range(rp):
            for j in range(m):
                c = x_coords[idx]
                idx += 1
                if c.is_zero():
                    continue
                blk = ypow[j]
                for i in range(m):
                    for l in range(m):
                        if not blk[i][l].is_zero():
                            mat[a * m + i][b * m + l] = ring.add(
                                mat[a * m + i][b * m + l],
                                ring.mul(c, blk[i][l]))
    return mat


# ---------------------------------------------------------------------------
# Sublattice enumeration (Hermite forms)


def hermite_sublattices(prime: Prime, r: int, max_exp: int):
    """All sublattices of A_p^r of index p-power exponent <= max_exp,
    each exactly once, as upper-triangular A-polynomial basis columns.

    Column j has pi^(a_j) on the diagonal; the entry in row i < j runs
    over canonical residues mod pi^(a_i).
    """
    for total in range(max_exp + 1):
        for exps in _compositions(total, r):
            ranges = []
            for i in range(r):
                for j in range(i + 1, r):
                    ranges.append((i, j, exps[i]))
            choice_lists = []
            for i, j, a in ranges:
                if a == 0:
                    choice_lists.append([Poly.zero(prime.field)])
                else:
                    choice_lists.append(list(ChainRing(prime, a).elements()))
            for picks in itertools.product(*choice_lists):
                cols = [[Poly.zero(prime.field) for _ in range(r)]
                        for _ in range(r)]
                for idx in range(r):
                    cols[idx][idx] = prime.poly ** exps[idx]
                for (i, j, _), val in zip(ranges, picks):
                    cols[j][i] = val
                yield exps, cols


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest
