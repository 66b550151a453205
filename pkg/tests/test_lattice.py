import math
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import (circle_points_double_loop, jarnik_bruteforce, max_on_arc_bruteforce,
                     min_sep_sq_pairs, union_find_clusters, complex_vandermonde_product)
from torusnodal.errors import CapacityError, PreconditionError
from torusnodal.gaussian import GaussianInteger, det_bareiss, det_leibniz, prime_two_squares
from torusnodal.lattice import (ARC, CHORD, LatticePoint, cluster_frequencies, delta_exponent,
                                distance_product_bound, enumerate_circle, exceptional_census,
                                short_arc_size, short_arc_check, max_points_on_arc,
                                min_separation, min_separation_sq, r2, r2_formula,
                                ramana_determinant, verify_jarnik, verify_pair_product)


def as_tuples(circle):
    return sorted((p.a, p.b) for p in circle)


class TestEnumerate:
    def test_unit_circle(self):
        c = enumerate_circle(1)
        assert as_tuples(c) == [(-1, 0), (0, -1), (0, 1), (1, 0)]
        assert c.r2 == 4

    def test_25(self):
        c = enumerate_circle(25)
        assert len(c) == 12
        assert {(3, 4), (4, 3), (5, 0)} <= set(as_tuples(c))
        assert as_tuples(c) == circle_points_double_loop(25)

    def test_3_is_empty(self):
        assert len(enumerate_circle(3)) == 0

    def test_sorted_by_angle(self):
        c = enumerate_circle(5525)
        th = c.angles()
        assert all(0 <= t < 2 * math.pi for t in th)
        assert list(th) == sorted(th)

    @pytest.mark.parametrize("E", [0, -4])
    def test_rejects_nonpositive(self, E):
        with pytest.raises(PreconditionError):
            enumerate_circle(E)

    def test_rejects_over_budget(self):
        with pytest.raises(CapacityError):
            enumerate_circle(10**6, max_energy=10**5)

    @pytest.mark.parametrize("E", [1, 2, 25, 65, 1105, 5525, 99_999_937, 2 * 3**2 * 5**3 * 13])
    def test_gaussian_route_matches_brute(self, E):
        assert as_tuples(enumerate_circle(E, method="gaussian")) == as_tuples(enumerate_circle(E, method="brute"))

    def test_large_energy_uses_factorization(self):
        E = 5**4 * 13**3 * 17 * 29 * 37 * 41 * 53  # > 1e8, many representations
        c = enumerate_circle(E)
        assert E > 10**8
        assert c.r2 == r2_formula(E) == 4 * 5 * 4 * 2 * 2 * 2 * 2 * 2
        assert all(p.a * p.a + p.b * p.b == E for p in c)

    def test_norm_overflow_free_at_1e12(self):
        c = enumerate_circle(5**12 * 2**12 * 13)
        assert all(p.norm() == 5**12 * 2**12 * 13 for p in c)
        assert 5**12 * 2**12 * 13 > 10**12

    def test_eightfold_symmetry(self):
        for E in (25, 65, 325, 1105):
            s = set(as_tuples(enumerate_circle(E)))
            for a, b in s:
                assert {(-a, b), (a, -b), (b, a), (-b, -a)} <= s


class TestR2:
    @pytest.mark.parametrize("E,expected", [(2, 4), (65, 16), (9, 4), (3, 0), (25, 12), (1, 4)])
    def test_values(self, E, expected):
        assert len(circle_points_double_loop(E)) == expected
        assert r2(E) == expected
        assert r2_formula(E) == expected

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=1, max_value=20000))
    def test_formula_matches_enumeration(self, E):
        assert r2_formula(E) == len(circle_points_double_loop(E)) == len(enumerate_circle(E))


def test_prime_two_squares():
    for p in (2, 5, 13, 17, 29, 1000000009, 998244353):
        if p % 4 == 3:
            continue
        x, y = prime_two_squares(p)
        assert x * x + y * y == p


class TestSeparation:
    def test_25(self):
        d2, pair = min_separation_sq(enumerate_circle(25))
        assert d2 == 2 == min_sep_sq_pairs(circle_points_double_loop(25))
        assert math.isclose(min_separation(enumerate_circle(25)), math.sqrt(2))

    def test_65(self):
        # brute force over all pairs: (1, 8) and (-1, 8) are 2 apart
        d2, pair = min_separation_sq(enumerate_circle(65))
        assert d2 == min_sep_sq_pairs(circle_points_double_loop(65)) == 4

    def test_unit(self):
        assert min_separation_sq(enumerate_circle(1))[0] == 2

    def test_too_few_points(self):
        with pytest.raises(PreconditionError):
            min_separation_sq(enumerate_circle(3))

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=1, max_value=5000))
    def test_adjacent_pairs_suffice(self, E):
        pts = circle_points_double_loop(E)
        if len(pts) >= 2:
            assert min_separation_sq(enumerate_circle(E))[0] == min_sep_sq_pairs(pts)


class TestJarnik:
    def test_example_triple(self):
        p0, p1, p2 = (4, 3), (3, 4), (0, 5)
        assert math.dist(p0, p1) <= math.dist(p0, p2)
        assert math.isclose(math.dist(p0, p2) ** 2 * math.dist(p0, p1), 20 * math.sqrt(2))
        assert 20 * math.sqrt(2) > 5

    @pytest.mark.parametrize("E", [25, 65, 325, 1105])
    def test_matches_bruteforce(self, E):
        rep = verify_jarnik(enumerate_circle(E))
        assert rep.applicable and rep.holds
        assert math.isclose(rep.min_ratio, jarnik_bruteforce(circle_points_double_loop(E), E), rel_tol=1e-12)

    def test_25_frozen(self):
        # brute force over all ordered triples: 2*sqrt(2), e.g. (4,3),(3,4),(5,0)
        assert math.isclose(verify_jarnik(enumerate_circle(25)).min_ratio, 2 * math.sqrt(2))

    def test_inapplicable(self):
        assert not verify_jarnik(enumerate_circle(3)).applicable


class TestPairProduct:
    def test_25_arc(self):
        c = enumerate_circle(25)
        # arc from (5,0) to (0,5) holds (5,0),(4,3),(3,4),(0,5) and nothing else
        rep = verify_pair_product(c, arc_size_max=5 * math.pi / 2)
        assert rep.applicable and rep.min_ratio > 0
        # exhaustive oracle over 4-sets in a quarter-circle arc
        pts = circle_points_double_loop(25)
        best = None
        for quad in combinations(pts, 4):
            th = sorted(math.atan2(b, a) % (2 * math.pi) for a, b in quad)
            gaps = [th[(i + 1) % 4] - th[i] + (2 * math.pi if i == 3 else 0) for i in range(4)]
            r = 5 * (2 * math.pi - max(gaps))
            if r > 5 * math.pi / 2 + 1e-12:
                continue
            for (i, j), (k, l) in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
                v = math.dist(quad[i], quad[j]) * math.dist(quad[k], quad[l]) * r / 5
                best = v if best is None else min(best, v)
        assert math.isclose(rep.min_ratio, best, rel_tol=1e-12)

    def test_full_circle_trivial(self):
        c = enumerate_circle(65)
        rep = verify_pair_product(c, arc_size_max=2 * math.pi * c.lam)
        assert rep.min_ratio > 0

    def test_inapplicable_short_arc(self):
        c = enumerate_circle(25)
        assert not verify_pair_product(c, arc_size_max=0.5).applicable
        assert not verify_pair_product(enumerate_circle(3), 10.0).applicable


class TestDistanceProduct:
    def test_m2(self):
        rep = distance_product_bound([(3, 4), (4, 3)])
        assert rep.rhs_exponent == 0 and rep.holds

    def test_m3_25(self):
        rep = distance_product_bound([(3, 4), (4, 3), (5, 0)])
        # sqrt(2) sqrt(10) sqrt(20) = 20 >= lambda = 5
        assert rep.lhs_sq == 400 and rep.rhs_sq == 25 and rep.holds

    def test_m4_65(self):
        pts = [(8, 1), (7, 4), (4, 7), (1, 8)]
        rep = distance_product_bound(pts)
        expected = 1
        for p, q in combinations(pts, 2):
            expected *= (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
        assert rep.lhs_sq == expected
        assert rep.rhs_exponent == Fraction(2) and rep.rhs_sq == 65**2
        assert rep.holds

    def test_mixed_norm_rejected(self):
        with pytest.raises(PreconditionError):
            distance_product_bound([(3, 4), (1, 1)])

    def test_repeated_rejected(self):
        with pytest.raises(PreconditionError):
            distance_product_bound([(3, 4), (3, 4)])


class TestRamana:
    def test_k0_is_vandermonde(self):
        pts = [(3, 4), (4, 3), (5, 0), (0, 5)]
        rep = ramana_determinant(pts, 0)
        assert rep.lhs == rep.rhs or rep.lhs == -rep.rhs
        assert complex(rep.lhs) == pytest.approx(complex_vandermonde_product(pts))

    def test_m2_k1_25(self):
        rep = ramana_determinant([GaussianInteger(3, 4), GaussianInteger(4, 3)], 1)
        assert rep.equal_up_to_sign
        assert rep.lhs.norm() == rep.rhs.norm() == 1250

    def test_m3_k1_65(self):
        rep = ramana_determinant([(8, 1), (7, 4), (4, 7)], 1)
        assert rep.equal_up_to_sign and rep.det_nonzero
        # independent route: complex floats at modest size
        lhs = 65 * complex_vandermonde_product([(8, 1), (7, 4), (4, 7)])
        assert complex(rep.lhs) == pytest.approx(lhs)

    def test_k_out_of_range(self):
        with pytest.raises(PreconditionError):
            ramana_determinant([(3, 4), (4, 3)], 2)

    def test_off_circle(self):
        with pytest.raises(PreconditionError):
            ramana_determinant([(3, 4), (1, 2)], 0)

    def test_bareiss_vs_leibniz(self):
        pts = [GaussianInteger(*p) for p in [(8, 1), (7, 4), (4, 7), (1, 8), (-1, 8)]]
        from torusnodal.lattice import vandermonde_type_matrix
        for k in range(5):
            m = vandermonde_type_matrix(pts, k)
            assert det_bareiss(m) == det_leibniz(m)


class TestDelta:
    @pytest.mark.parametrize("m,val", [(2, Fraction(1, 6)), (3, Fraction(1, 6)), (4, Fraction(1, 10))])
    def test_values(self, m, val):
        assert delta_exponent(m) == val

    def test_reject(self):
        with pytest.raises(PreconditionError):
            delta_exponent(1)


class TestArcCount:
    def test_whole_circle(self):
        c = enumerate_circle(65)
        assert max_points_on_arc(c, 2 * math.pi * c.lam).count == 16

    def test_short_arc_m2_25(self):
        c = enumerate_circle(25)
        r = math.sqrt(2) * 5 ** (0.5 - 1 / 6)
        got = max_points_on_arc(c, r).count
        assert got == max_on_arc_bruteforce(circle_points_double_loop(25), 25, r) == 2
        assert got <= 2

    def test_below_separation(self):
        c = enumerate_circle(1105)
        d = min_separation(c)
        assert max_points_on_arc(c, 0.99 * d).count <= 1

    def test_empty(self):
        assert max_points_on_arc(enumerate_circle(3), 1.0).count == 0

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=1, max_value=3000), st.floats(min_value=0.1, max_value=60))
    def test_sweep_matches_bruteforce(self, E, r):
        pts = circle_points_double_loop(E)
        if pts:
            assert max_points_on_arc(enumerate_circle(E), r).count == max_on_arc_bruteforce(pts, E, r)

    @pytest.mark.parametrize("convention", [ARC, CHORD])
    def test_short_arc_desk_scale(self, convention):
        for E in range(1, 3001):
            c = enumerate_circle(E)
            for m in range(2, 7):
                ok, _ = short_arc_check(c, m, convention)
                assert ok, (E, m)

    def test_chord_is_more_permissive(self):
        c = enumerate_circle(5525)
        r = short_arc_size(5525, 2)
        assert max_points_on_arc(c, r, CHORD).count >= max_points_on_arc(c, r, ARC).count


class TestCensus:
    def test_epsilon_near_one(self):
        rep = exceptional_census(2000, 0.999)
        assert rep.count == 0

    def test_1000_bruteforce(self):
        rep = exceptional_census(1000, 0.5)
        oracle = []
        for E in range(1, 1001):
            pts = circle_points_double_loop(E)
            if len(pts) >= 2 and min_sep_sq_pairs(pts) <= E ** 0.5:
                oracle.append(E)
        assert rep.exceptional == oracle

    def test_reference_scale(self):
        rep = exceptional_census(100, 0.3)
        assert math.isclose(rep.reference, 100 ** 0.9)


class TestClusters:
    def test_25_threshold3(self):
        c = enumerate_circle(25)
        cl = cluster_frequencies(c, 3)
        assert len(cl) == 8
        assert sorted(len(x.members) for x in cl) == [1, 1, 1, 1, 2, 2, 2, 2]
        got = sorted(frozenset((p.a, p.b) for p in x.members) for x in cl)
        want = union_find_clusters(circle_points_double_loop(25), 3)
        assert sorted(got, key=sorted) == sorted(want, key=sorted)

    def test_single_cluster(self):
        c = enumerate_circle(325)
        cl = cluster_frequencies(c, 2 * c.lam)
        assert len(cl) == 1

    def test_singletons(self):
        c = enumerate_circle(325)
        cl = cluster_frequencies(c, 0.9 * min_separation(c))
        assert len(cl) == c.r2

    @settings(max_examples=50, deadline=None)
    @given(st.sampled_from([25, 65, 325, 1105, 5525, 4225]), st.floats(min_value=0.5, max_value=80))
    def test_partition_and_separation(self, E, t):
        c = enumerate_circle(E)
        cl = cluster_frequencies(c, t)
        members = [p for x in cl for p in x.members]
        assert sorted(members) == sorted(c.points)
        for x, y in combinations(cl, 2):
            assert min(math.dist((p.a, p.b), (q.a, q.b)) for p in x.members for q in y.members) > t
        for x in cl:
            assert x.diameter <= t * c.r2 + 1e-9
