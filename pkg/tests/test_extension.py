import math
import random

import pytest

from drinlat.errors import (MalformedInput, MultipleInfinitePlaces,
                            ReducibleDefiningPolynomial,
                            UnsupportedRamifiedPrime, UnsupportedShape)
from drinlat.ffpoly import (FiniteField, Poly, enumerate_primes, poly_from_str,
                            prime_from_str, primes_of_degree)
from drinlat.extension import (Extension, constant_splitting_law, class_number,
                               count_places, make_extension, order_at,
                               predegree, splitting, zeta_numerator)

F2 = FiniteField.of_order(2)
F3 = FiniteField.of_order(3)
F5 = FiniteField.of_order(5)


def kummer_elliptic():
    # x^2 = t^3 - t over F_3
    return Extension.kummer(F3, 2, poly_from_str("t^3+2*t", F3))


class TestConstructors:
    def test_constant_over_f3(self):
        e = Extension.constant(F3, 2)
        assert e.genus == 0 and e.q_prime == 9 and e.m == 2

    def test_kummer_elliptic_genus(self):
        e = kummer_elliptic()
        assert e.genus == 1
        assert e.q_prime == 3 and e.m == 2

    def test_artin_schreier_genus(self):
        e = Extension.artin_schreier(F2, poly_from_str("t^3", F2))
        assert e.genus == 1 and e.m == 2

    def test_artin_schreier_reduction(self):
        # x^2 + x = t^2 reduces to x^2 + x = t (substitute x -> x + t)
        e = Extension.artin_schreier(F2, poly_from_str("t^2", F2))
        assert e.params["a"] == poly_from_str("t", F2)
        assert e.genus == 0

    def test_kummer_refuses_matching_degree(self):
        with pytest.raises(UnsupportedShape):
            Extension.kummer(F3, 2, poly_from_str("t^2+1", F3))

    def test_kummer_refuses_char_divisor(self):
        with pytest.raises(UnsupportedShape):
            Extension.kummer(F2, 2, poly_from_str("t", F2))

    def test_generic_inseparable_pure(self):
        e = Extension.generic(F2, [poly_from_str("t", F2).__neg__(),
                                   Poly.zero(F2), Poly.one(F2)], genus=0)
        assert not e.separable

    def test_generic_inseparable_pth_power_refused(self):
        with pytest.raises(ReducibleDefiningPolynomial):
            Extension.generic(F2, [-poly_from_str("t^2", F2), Poly.zero(F2),
                                   Poly.one(F2)], genus=0)

    def test_generic_multiple_infinite_places_refused(self):
        with pytest.raises(MultipleInfinitePlaces):
            Extension.generic(F2, [Poly.one(F2), Poly.one(F2)], genus=0,
                              infinity_places=2)

    def test_json_roundtrip(self):
        specs = [
            {"kind": "constant", "n": 2, "base": "3"},
            {"kind": "kummer", "n": 2, "a": "t^3+2*t", "base": "3"},
            {"kind": "artin_schreier", "a": "t^3", "base": "2"},
        ]
        for spec in specs:
            e = make_extension(spec)
            again = make_extension(e.to_json())
            assert again.to_json() == e.to_json()


class TestSplitting:
    def test_elliptic_at_t_ramified(self):
        e = kummer_elliptic()
        sp = splitting(e, prime_from_str("t", F3))
        assert not sp.unramified
        assert [(pl.e, pl.f) for pl in sp.places] == [(2, 1)]

    def test_elliptic_at_t2_plus_1_splits(self):
        e = kummer_elliptic()
        sp = splitting(e, prime_from_str("t^2+1", F3))
        assert sp.unramified
        assert [(pl.e, pl.f) for pl in sp.places] == [(1, 1), (1, 1)]

    def test_constant_degree1_prime_inert(self):
        e = Extension.constant(F3, 2)
        sp = splitting(e, prime_from_str("t", F3))
        assert [(pl.e, pl.f) for pl in sp.places] == [(1, 2)]

    def test_constant_law_matches_factoring(self):
        for n in (2, 3):
            e = Extension.constant(F2, n)
            for d in range(1, 5):
                count, fdeg = constant_splitting_law(n, d)
                for prime in primes_of_degree(F2, d):
                    sp = splitting(e, prime)
                    assert len(sp.places) == count
                    assert all(pl.f == fdeg and pl.e == 1 for pl in sp.places)

    def test_sum_ef_equals_degree_1000_random_pairs(self):
        rng = random.Random(0)
        exts = [kummer_elliptic(), Extension.constant(F3, 2),
                Extension.constant(F2, 3),
                Extension.artin_schreier(F2, poly_from_str("t^3", F2)),
                Extension.kummer(F5, 2, poly_from_str("t", F5)),
                Extension.kummer(F3, 2, poly_from_str("t^5+t+1", F3)),
                Extension.artin_schreier(F3, poly_from_str("t^2", F3))]
        pools = [(e, enumerate_primes(e.base, 3)) for e in exts]
        checked = 0
        while checked < 1000:
            e, pool = pools[rng.randrange(len(pools))]
            prime = pool[rng.randrange(len(pool))]
            try:
                sp = splitting(e, prime)
            except UnsupportedRamifiedPrime:
                continue
            assert sum(pl.e * pl.f for pl in sp.places) == e.m
            checked += 1

    def test_pattern_agrees_with_factoring(self):
        # the fast residue-test path must match the factor-based splitting
        from drinlat.extension import splitting_pattern
        exts = [Extension.constant(F3, 2), Extension.constant(F2, 3),
                kummer_elliptic(),
                Extension.kummer(F5, 2, poly_from_str("t", F5)),
                Extension.kummer(F3, 2, poly_from_str("t^5+t+1", F3)),
                Extension.artin_schreier(F2, poly_from_str("t^3", F2)),
                Extension.artin_schreier(F3, poly_from_str("t^2", F3))]
        for e in exts:
            for prime in enumerate_primes(e.base, 3):
                try:
                    sp = splitting(e, prime)
                except UnsupportedRamifiedPrime:
                    continue
                want = tuple(sorted((pl.e, pl.f) for pl in sp.places))
                assert splitting_pattern(e, prime) == want, (e.kind, str(prime))

    def test_inseparable_always_ramified(self):
        e = Extension.generic(F2, [-poly_from_str("t", F2), Poly.zero(F2),
                                   Poly.one(F2)], genus=0)
        for prime in enumerate_primes(F2, 4):
            sp = splitting(e, prime)
            assert [(pl.e, pl.f) for pl in sp.places] == [(2, 1)]


class TestZeta:
    def test_genus0_class_number_one(self):
        assert class_number(Extension.constant(F3, 2)) == 1
        assert class_number(Extension.kummer(F5, 2, poly_from_str("t", F5))) == 1

    def test_elliptic_curve_over_f3(self):
        e = kummer_elliptic()
        z = zeta_numerator(e)
        assert z.point_counts == [4]
        assert z.coefficients == [1, 0, 3]
        assert z.h == 4

    def test_elliptic_oracle_affine_count(self):
        # independent brute-force point count of y^2 = t^3 - t over F_3,
        # plus the single point at infinity
        count = 0
        for t in range(3):
            rhs = (t ** 3 - t) % 3
            for y in range(3):
                if (y * y) % 3 == rhs:
                    count += 1
        assert count + 1 == 4

    def test_divisor_class_oracle_genus1(self):
        # genus 1: degree-0 divisor classes biject with degree-1 places
        for e in (kummer_elliptic(),
                  Extension.artin_schreier(F2, poly_from_str("t^3", F2))):
            assert class_number(e) == count_places(e, 1)

    def test_functional_equation(self):
        for e in (kummer_elliptic(),
                  Extension.artin_schreier(F2, poly_from_str("t^3", F2)),
                  Extension.kummer(F3, 2, poly_from_str("t^5+t+1", F3))):
            z = zeta_numerator(e)
            g = e.genus
            assert len(z.coefficients) == 2 * g + 1
            for i in range(g + 1):
                assert z.coefficients[2 * g - i] == \
                    e.q_prime ** (g - i) * z.coefficients[i]

    def test_genus_bound_from_class_number(self):
        for e in (kummer_elliptic(),
                  Extension.artin_schreier(F2, poly_from_str("t^3", F2))):
            h = class_number(e)
            assert e.genus <= 8 + 2 * math.log(h, e.base.size)


class TestCountPlaces:
    def test_elliptic_b1(self):
        assert count_places(kummer_elliptic(), 1) == 4

    def test_constant_extension_inert_places(self):
        e = Extension.constant(F2, 2)
        # degree-1 places of F_4(t): t-c for c in F_4 plus infinity = 5
        assert count_places(e, 1) == 5


class TestPredegree:
    def test_genus0(self):
        assert predegree(Extension.constant(F3, 2), 1) == 1

    def test_elliptic(self):
        assert predegree(kummer_elliptic(), 1) == 4
        assert predegree(kummer_elliptic(), 6) == 24

    def test_bad_index(self):
        with pytest.raises(MalformedInput):
            predegree(kummer_elliptic(), 0)


class TestIndexIX:
    def test_standard_datum_index_one(self):
        from drinlat.goodprime import SubvarietyDatum
        from drinlat.extension import index_iX
        datum = SubvarietyDatum(Extension.constant(F2, 2), 2)
        assert index_iX(datum) == 1

    def test_single_twist_orbit_size(self):
        # lattice A_p + p R' inside the unramified quadratic order: index 2,
        # orbit of size 3 under the 12-element unit group of R'/m^2
        from drinlat.goodprime import SubvarietyDatum
        from drinlat.extension import index_iX
        from drinlat.ffpoly import prime_from_str
        from drinlat.localfield import LocalMatrix
        prime = prime_from_str("t", F2)
        ext = Extension.constant(F2, 2)
        g = LocalMatrix.from_polys(prime, [[poly_from_str("1", F2),
                                            Poly.zero(F2)],
                                           [Poly.zero(F2),
                                            poly_from_str("t", F2)]])
        datum = SubvarietyDatum(ext, 2, {prime: g})
        assert index_iX(datum) == 3

    def test_unsaturated_twist_normalized(self):
        # p * (A_p + p R') normalizes back to the same orbit: index 3
        from drinlat.goodprime import SubvarietyDatum
        from drinlat.extension import index_iX
        from drinlat.ffpoly import prime_from_str
        from drinlat.localfield import LocalMatrix
        prime = prime_from_str("t", F2)
        ext = Extension.constant(F2, 2)
        g = LocalMatrix.from_polys(prime, [[poly_from_str("t", F2),
                                            Poly.zero(F2)],
                                           [Poly.zero(F2),
                                            poly_from_str("t^2", F2)]])
        datum = SubvarietyDatum(ext, 2, {prime: g})
        assert index_iX(datum) == 3

    def test_scalar_twist_is_trivial(self):
        from drinlat.goodprime import SubvarietyDatum
        from drinlat.extension import index_iX
        from drinlat.ffpoly import prime_from_str
        from drinlat.localfield import LocalMatrix
        prime = prime_from_str("t", F3)
        ext = Extension.constant(F3, 2)
        g = LocalMatrix.from_polys(prime, [[poly_from_str("t", F3),
                                            Poly.zero(F3)],
                                           [Poly.zero(F3),
                                            poly_from_str("t", F3)]])
        datum = SubvarietyDatum(ext, 2, {prime: g})
        assert index_iX(datum) == 1

    def test_product_over_two_primes(self):
        from drinlat.goodprime import SubvarietyDatum
        from drinlat.extension import index_iX
        from drinlat.ffpoly import prime_from_str
        from drinlat.localfield import LocalMatrix
        ext = Extension.constant(F2, 2)
        p1 = prime_from_str("t", F2)
        p2 = prime_from_str("t+1", F2)
        def twist(prime):
            return LocalMatrix.from_polys(prime, [[poly_from_str("1", F2),
                                                   Poly.zero(F2)],
                                                  [Poly.zero(F2),
                                                   prime.poly]])
        datum = SubvarietyDatum(ext, 2, {p1: twist(p1), p2: twist(p2)})
        assert index_iX(datum) == 9


class TestOrderAt:
    def test_split_prime_gives_product_order(self):
        e = kummer_elliptic()
        order = order_at(e, prime_from_str("t^2+1", F3), 1)
        assert order.factors == ((1, 1), (1, 1))
        assert order.m == 2

    def test_eisenstein_prime_gives_ramified_order(self):
        e = kummer_elliptic()
        order = order_at(e, prime_from_str("t", F3), 1)
        assert order.factors == ((2, 1),)

    def test_inert_prime(self):
        e = Extension.constant(F3, 2)
        order = order_at(e, prime_from_str("t", F3), 1)
        assert order.factors == ((1, 2),)

    def test_inseparable_refused(self):
        e = Extension.generic(F2, [-poly_from_str("t", F2), Poly.zero(F2),
                                   Poly.one(F2)], genus=0)
        with pytest.raises(UnsupportedRamifiedPrime):
            order_at(e, prime_from_str("t", F2), 1)
