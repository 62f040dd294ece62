import random
from fractions import Fraction
from itertools import combinations

import pytest

from predim.constructions import (
    Certificate,
    PointedStructure,
    SearchBudget,
    SeedTrace,
    acceptability,
    amalg_copies,
    approach_zero,
    chain,
    dense_find,
    family_structure,
    find_seed,
    is_admissible,
    verify_family_admissible,
)
from predim.decompose import Leaf, assemble, validate
from predim.dimension import Alpha, DimValue, Ordering, delta_rel, predimension
from predim.errors import (
    AlphaOutOfRange,
    InsufficientPrecision,
    RangeViolation,
    Unachievable,
    UsageError,
)
from predim.structures import graph


def family_certificate(n: int, k: int, alpha: Alpha) -> Certificate:
    ok, rel = verify_family_admissible(n, k, alpha)
    assert ok
    p = family_structure(n, k)
    return Certificate(p, rel, SeedTrace("family", n, k), Leaf(p.structure), "verified")


class TestAcceptability:
    def test_values(self):
        assert acceptability(3, 2) == (Fraction(2, 5), Fraction(7, 15))
        assert acceptability(1, 1) == (Fraction(3, 4), Fraction(1))
        assert acceptability(100, 1) == (Fraction(102, 400), Fraction(103, 400))

    def test_lower_decreasing_in_n(self):
        for k in range(0, 51):
            for n in range(1, 51):
                assert acceptability(n + 1, k)[0] < acceptability(n, k)[0]

    def test_windows_overlap_only_beyond_k_plus_one(self):
        # the overlap u_{n+1,k} > l_{n,k} needs n > k+1; (2,2) is a
        # genuine gap witness
        for k in range(0, 20):
            for n in range(1, 40):
                lo_n = acceptability(n, k)[0]
                hi_next = acceptability(n + 1, k)[1]
                assert (hi_next > lo_n) == (n > k + 1)

    def test_limit_value(self):
        for k in (1, 2, 5):
            lo, _ = acceptability(10**6, k)
            assert abs(lo - Fraction(1, k + 3)) < Fraction(1, 10**5)

    def test_rejects_bad_arguments(self):
        with pytest.raises(UsageError):
            acceptability(0, 1)


class TestFamilyStructures:
    def test_counts(self):
        p = family_structure(3, 2)
        assert len(p.structure.elements) == 8
        assert len(p.structure.all_instances) == 3 * 2 + 3 * 3

    def test_symmetric_verifier_matches_bruteforce(self, rng):
        # the class-based check must agree with the literal subset check
        for _ in range(25):
            n, k = rng.randint(1, 3), rng.randint(0, 3)
            alpha = Alpha.rational(Fraction(rng.randint(1, 9), rng.randint(10, 13)))
            fast, rel = verify_family_admissible(n, k, alpha)
            slow, report = is_admissible(family_structure(n, k), alpha)
            assert fast == slow, (n, k, alpha.format(), report)
            if fast:
                assert report["rel_dim"] == rel


class TestAdmissibility:
    def test_family_32_at_5_11(self):
        # rel = 6 - 15a = -9/11; every base-containing subset checked
        alpha = Alpha.rational(Fraction(5, 11))
        ok, report = is_admissible(family_structure(3, 2), alpha)
        assert ok
        assert alpha.evaluate(report["rel_dim"]) == Fraction(-9, 11)

    def test_edge_inside_triple_fails(self):
        s = graph(range(4), [(0, 2), (3, 0), (3, 1), (3, 2)])
        ok, report = is_admissible(PointedStructure(s, 0, 1, 2), Alpha.rational(Fraction(1, 2)))
        assert not ok
        assert not report["clauses"]["discrete_triple"]

    def test_positive_rel_dim_fails(self):
        # the two-pendant seed at 1/2 has rel = 3 - 2 = 1 > 0
        s = graph(range(5), [(3, 0), (3, 2), (4, 1), (4, 2)])
        ok, report = is_admissible(PointedStructure(s, 0, 1, 2), Alpha.rational(Fraction(1, 2)))
        assert not ok
        assert not report["clauses"]["rel_dim_range"]

    def test_spot_mode_on_large_structure(self):
        alpha = Alpha.rational(Fraction(1, 100))
        cert = find_seed(alpha)
        ok, report = is_admissible(cert.pointed, alpha, spot_samples=2000, seed=9)
        assert ok
        assert report["mode"] == "spot"


class TestFindSeed:
    CASES = [
        ("4/5", "two-pendants", Fraction(-1, 5)),
        ("99/100", "two-pendants", Fraction(-24, 25)),
        ("7/10", "three-pendant", Fraction(-1, 2)),
        ("3/4", "three-pendant", Fraction(-3, 4)),
        ("2/3", "bridged-pendants", Fraction(-1, 3)),
        ("5/8", "family", Fraction(-3, 4)),
        ("1/2", "family", Fraction(-1, 2)),
        ("5/11", "family", Fraction(-1, 11)),
    ]

    @pytest.mark.parametrize("alpha_str,case,rel", CASES)
    def test_cases(self, alpha_str, case, rel):
        alpha = Alpha.rational(Fraction(alpha_str))
        cert = find_seed(alpha)
        assert cert.trace.case == case
        assert alpha.evaluate(cert.rel_dim) == rel
        assert cert.revalidate()

    def test_rejects_alpha_one(self):
        with pytest.raises(AlphaOutOfRange):
            find_seed(Alpha.rational(1))

    def test_positive_over_single_points(self):
        # the admissible range forces positive dimension over each base point
        for a_str in ("4/5", "2/3", "1/2", "5/11", "3/10"):
            alpha = Alpha.rational(Fraction(a_str))
            cert = find_seed(alpha)
            s = cert.structure
            for pt in (cert.pointed.a, cert.pointed.b):
                rel = delta_rel(s.elements, {pt}, s)
                assert alpha.sign(rel) > 0

    def test_interval_seed_requires_case_resolution(self):
        wide = Alpha.irrational(Fraction(60, 100), Fraction(70, 100))
        with pytest.raises(InsufficientPrecision):
            find_seed(wide)

    def test_interval_seeds(self):
        for lo, hi in [("7070/10000", "7072/10000"), ("4141/10000", "4143/10000")]:
            alpha = Alpha.irrational(Fraction(lo), Fraction(hi))
            cert = find_seed(alpha)
            ok, _ = is_admissible(cert.pointed, alpha)
            assert ok


class TestCopies:
    def test_identity(self):
        alpha = Alpha.rational(Fraction(5, 11))
        cert = family_certificate(3, 1, alpha)
        assert amalg_copies(cert, 1, alpha) is cert

    def test_doubling(self):
        alpha = Alpha.rational(Fraction(5, 11))
        cert = family_certificate(3, 1, alpha)  # rel = -5/11
        c2 = amalg_copies(cert, 2, alpha)
        assert alpha.evaluate(c2.rel_dim) == Fraction(-10, 11)
        assert len(c2.structure.elements) == 2 * (7 - 2) + 2
        assert c2.revalidate()
        validate(c2.tree)
        assert assemble(c2.tree) == c2.structure

    def test_range_violation(self):
        alpha = Alpha.rational(Fraction(5, 11))
        cert = family_certificate(3, 2, alpha)  # rel = -9/11
        with pytest.raises(RangeViolation):
            amalg_copies(cert, 2, alpha)
        forced = amalg_copies(cert, 2, alpha, allow_out_of_range=True)
        assert forced.membership == "outside"
        assert alpha.evaluate(forced.rel_dim) == Fraction(-18, 11)

    def test_triple_still_discrete(self):
        alpha = Alpha.rational(Fraction(1, 2))
        cert = find_seed(alpha)
        c3 = amalg_copies(cert, 3, alpha) if alpha.cmp(
            cert.rel_dim.scale(3), DimValue.of(-1)
        ) == Ordering.GT else amalg_copies(cert, 1, alpha)
        s = c3.structure
        assert s.induced(c3.pointed.triple).is_discrete()


class TestChain:
    def test_rel_dim_identity(self):
        alpha = Alpha.rational(Fraction(5, 11))
        c1 = family_certificate(3, 2, alpha)  # -9/11
        c2 = family_certificate(3, 2, alpha)
        ch = chain(c1, c2, alpha)
        assert alpha.evaluate(ch.rel_dim) == Fraction(-7, 11)
        assert ch.membership == "lemma"
        assert len(ch.structure.elements) == 8 + 8 - 1
        assert ch.revalidate()
        validate(ch.tree)

    def test_chained_chain(self):
        alpha = Alpha.rational(Fraction(5, 11))
        c1 = family_certificate(3, 2, alpha)
        ch = chain(chain(c1, c1, alpha), c1, alpha)  # -7/11 then -5/11
        assert alpha.evaluate(ch.rel_dim) == Fraction(-5, 11)

    def test_boundary_sum_gives_zero_member(self):
        alpha = Alpha.rational(Fraction(1, 2))
        seed = find_seed(alpha)  # -1/2
        ch = chain(seed, seed, alpha)
        assert alpha.evaluate(ch.rel_dim) == 0
        assert ch.membership == "lemma"
        ok, report = is_admissible(ch.pointed, alpha)
        assert ok, report

    def test_positive_regime_flagged_outside(self):
        alpha = Alpha.rational(Fraction(5, 11))
        c1 = family_certificate(3, 1, alpha)  # -5/11; sum = -10/11 > -1
        ch = chain(c1, c1, alpha)
        assert ch.membership == "outside"
        assert alpha.evaluate(ch.rel_dim) == Fraction(1, 11)
        # the positive-regime facts: dimension at least one over each point
        s = ch.structure
        one = DimValue.of(1)
        for pt in (ch.pointed.a, ch.pointed.b):
            assert alpha.cmp(delta_rel(s.elements, {pt}, s), one) != Ordering.LT

    def test_membership_verified_exhaustively_when_small(self, rng):
        for a_str in ("5/8", "7/10", "2/3"):
            alpha = Alpha.rational(Fraction(a_str))
            seed = find_seed(alpha)
            total = seed.rel_dim.scale(2)
            if alpha.cmp(total, DimValue.of(-2)) == Ordering.GT and alpha.cmp(
                total, DimValue.of(-1)
            ) != Ordering.GT:
                ch = chain(seed, seed, alpha)
                ok, report = is_admissible(ch.pointed, alpha)
                assert ok, (a_str, report)


class TestApproachZero:
    GRID = [("1/2", m) for m in range(2, 7)] + [("5/11", m) for m in range(2, 7)] + [
        ("5/8", m) for m in range(2, 7)
    ] + [("7/10", m) for m in range(2, 7)]

    @pytest.mark.parametrize("alpha_str,m", GRID)
    def test_grid(self, alpha_str, m):
        alpha = Alpha.rational(Fraction(alpha_str))
        cert = approach_zero(alpha, m)
        assert alpha.cmp(cert.rel_dim, DimValue.of(Fraction(-1, m))) == Ordering.GT
        assert alpha.sign(cert.rel_dim) <= 0
        assert cert.revalidate()

    def test_m_one_any_seed(self):
        alpha = Alpha.rational(Fraction(7, 10))
        cert = approach_zero(alpha, 1)
        assert alpha.cmp(cert.rel_dim, DimValue.of(-1)) == Ordering.GT

    def test_deterministic(self):
        alpha = Alpha.rational(Fraction(5, 8))
        c1 = approach_zero(alpha, 4)
        c2 = approach_zero(alpha, 4)
        assert c1.trace.describe() == c2.trace.describe()
        assert c1.structure == c2.structure


class TestDenseFind:
    def test_whole_interval_trivial(self):
        alpha = Alpha.rational(Fraction(5, 11))
        cert = dense_find(alpha, Fraction(-1), Fraction(0))
        assert alpha.sign(cert.rel_dim) < 0

    def test_inside_target(self):
        alpha = Alpha.rational(Fraction(5, 11))
        cert = dense_find(alpha, Fraction(-1, 2), Fraction(-2, 5))
        v = alpha.evaluate(cert.rel_dim)
        assert Fraction(-1, 2) < v < Fraction(-2, 5)

    def test_lattice_miss_unachievable(self):
        with pytest.raises(Unachievable):
            dense_find(Alpha.rational(Fraction(1, 2)), Fraction(-2, 5), Fraction(-3, 10))

    def test_random_wide_subintervals(self, rng):
        alpha = Alpha.rational(Fraction(5, 11))
        for _ in range(10):
            lo = Fraction(rng.randint(-100, -12), 100)
            hi = lo + Fraction(rng.randint(10, 12), 100)
            if hi > 0:
                continue
            cert = dense_find(alpha, lo, hi, budget=SearchBudget(8000, 500))
            v = alpha.evaluate(cert.rel_dim)
            assert lo < v < hi


class TestClaimTwo:
    def test_base_containing_subsets_dominate(self, rng):
        # for admissible family members every base-containing subset has
        # relative delta at least the whole structure's
        for _ in range(10):
            n, k = rng.randint(1, 3), rng.randint(0, 2)
            den = rng.randint(7, 12)
            alpha = Alpha.rational(Fraction(rng.randint(1, den - 1), den))
            ok, rel = verify_family_admissible(n, k, alpha)
            if not ok:
                continue
            p = family_structure(n, k)
            s = p.structure
            others = sorted(s.elements - p.base_pair)
            for r in range(len(others) + 1):
                for extra in combinations(others, r):
                    sub = p.base_pair | frozenset(extra)
                    assert alpha.cmp(
                        delta_rel(sub, p.base_pair, s), rel
                    ) != Ordering.LT
