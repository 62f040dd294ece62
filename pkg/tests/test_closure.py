from fractions import Fraction

import pytest

from conftest import random_graph
from predim.closure import (
    chi,
    chi_star,
    d_independent,
    intrinsic_closure,
    intrinsic_closure_step,
    is_intrinsic,
    is_minimal_pair,
    is_primitive,
    strong_intersection_closure,
)
from predim.dimension import Alpha, is_strong
from predim.errors import NotStrong
from predim.structures import bouquet, discrete, glue, graph

A_HALF = Alpha.rational(Fraction(1, 2))
A_23 = Alpha.rational(Fraction(2, 3))
WEDGE = graph(range(3), [(2, 0), (2, 1)])


class TestIntrinsic:
    def test_whole_set_vacuous(self):
        assert is_intrinsic(WEDGE.elements, WEDGE, A_23)

    def test_wedge_pair_intrinsic(self):
        assert is_intrinsic({0, 1}, WEDGE, A_23)

    def test_single_edge_not_intrinsic(self):
        b = graph(range(3), [(2, 0)])
        assert not is_intrinsic({0, 1}, b, A_HALF)

    def test_step_bound_one_is_identity(self):
        assert intrinsic_closure_step(WEDGE, {0, 1}, 1, A_23) == frozenset({0, 1})

    def test_step_collects_wedge_point(self):
        assert intrinsic_closure_step(WEDGE, {0, 1}, 2, A_23) == frozenset({0, 1, 2})

    def test_discrete_closure_trivial(self):
        res = intrinsic_closure(discrete(6), {1, 4}, A_HALF)
        assert res.closure == frozenset({1, 4})
        assert res.converged


class TestClosure:
    def test_idempotent(self):
        res = intrinsic_closure(WEDGE, {0, 1}, A_23)
        again = intrinsic_closure(WEDGE, res.closure, A_23)
        assert again.closure == res.closure

    def test_matches_strong_intersection_random(self, rng):
        for _ in range(60):
            g = random_graph(rng, rng.randint(2, 8), 0.4)
            alpha = Alpha.rational(Fraction(rng.randint(1, 7), rng.randint(8, 11)))
            base = frozenset(rng.sample(sorted(g.elements), rng.randint(1, 2)))
            res = intrinsic_closure(g, base, alpha)
            assert res.converged
            assert res.closure == strong_intersection_closure(g, base, alpha)
            assert is_strong(res.closure, g, alpha)

    def test_monotone_in_base(self, rng):
        for _ in range(20):
            g = random_graph(rng, rng.randint(3, 8), 0.4)
            alpha = Alpha.rational(Fraction(rng.randint(1, 5), rng.randint(6, 9)))
            elems = sorted(g.elements)
            small = frozenset(rng.sample(elems, 1))
            big = small | frozenset(rng.sample(elems, rng.randint(1, len(elems))))
            c_small = intrinsic_closure(g, small, alpha).closure
            c_big = intrinsic_closure(g, big, alpha).closure
            assert c_small <= c_big

    def test_disconnected_negative_satellite_is_collected(self):
        # without hereditary nonnegativity, a dense far component belongs
        # to the closure; the safe default must find it
        k6 = [(i, j) for i in range(1, 7) for j in range(i + 1, 7)]
        g = graph(range(7), k6)
        res = intrinsic_closure(g, {0}, A_HALF)
        assert res.converged
        assert res.closure == frozenset(range(7))
        assert res.closure == strong_intersection_closure(g, {0}, A_HALF)


class TestPrimitive:
    def test_single_point_extension(self):
        s = graph(range(3), [(0, 2)])
        assert is_primitive({0, 1}, s, A_HALF)

    def test_stacked_layers_not_primitive(self):
        # two wedge layers: the first layer is an intermediate strong set
        layer1 = graph(range(4), [(2, 0), (2, 1), (3, 0), (3, 1)])
        mid, r1, r2 = glue(
            layer1, graph([0, 1, 9], [(9, 0), (9, 1)]), {0: 0, 1: 1}
        )
        alpha = Alpha.rational(Fraction(4, 7))
        if is_strong({r1[0], r1[1]}, mid, alpha):
            assert not is_primitive({r1[0], r1[1]}, mid, alpha)

    def test_requires_strong_base(self):
        with pytest.raises(NotStrong):
            is_primitive({0, 1}, WEDGE, A_23)


class TestMinimalPair:
    def test_three_point_star(self):
        s = graph(range(4), [(3, 0), (3, 1), (3, 2)])
        assert is_minimal_pair({0, 1, 2}, s, A_HALF)

    def test_nonnegative_fails(self):
        s = graph(range(3), [(2, 0)])
        assert not is_minimal_pair({0, 1}, s, A_HALF)

    def test_isolated_extra_point_fails(self):
        s = graph(range(5), [(3, 0), (3, 1), (3, 2)])
        assert not is_minimal_pair({0, 1, 2}, s, A_HALF)


class TestCopyCounting:
    def test_chi_of_base_itself(self):
        base = graph([0, 1], [])
        m = graph(range(4), [])
        assert chi(m, base, {0, 1}) == 1

    def test_star_edges(self):
        star = graph(range(6), [(0, i) for i in range(1, 6)])
        pat = graph([0, 9], [(0, 9)])
        assert chi(star, pat, {0}) == 5
        res = chi_star(star, pat, {0})
        assert res.value == 5 and res.exact

    def test_glued_copies(self):
        blk = graph([0, 1, 2], [(2, 0), (2, 1)])
        m, remaps = bouquet(blk, [0, 1], 4)
        base = {remaps[0][0], remaps[0][1]}
        pat = blk.relabel(remaps[0])
        assert chi_star(m, pat, base).value == 4

    def test_chi_star_at_most_chi(self, rng):
        for _ in range(10):
            m = random_graph(rng, 7, 0.45)
            pat = graph([0, 1, 2], [(0, 1), (1, 2)])
            c = chi(m, pat, frozenset())
            star = chi_star(m, pat, frozenset(), node_budget=200_000)
            assert star.value <= c
            assert star.greedy_lower_bound <= star.value


class TestIndependence:
    def test_equal_sets_dependent(self):
        m = graph(range(4), [(0, 1)])
        ok, cert = d_independent(m, {2}, {2}, {0}, A_HALF)
        assert not ok
        assert not cert["closure_clause"]

    def test_far_points_independent(self):
        m = discrete(5)
        ok, cert = d_independent(m, {0}, {1}, frozenset(), A_HALF)
        assert ok, cert

    def test_witness_c_depends_on_y_over_x(self):
        from predim.witnesses import rank_zero_witness

        w = rank_zero_witness(A_HALF, 1)
        x, y, c = w.points["x"], w.points["y"], w.points["c"]
        ok, cert = d_independent(w.structure, {c}, {y}, {x}, A_HALF)
        assert not ok
        assert not cert["d_clause"]

    def test_closed_independent_union_is_closed(self):
        # two wedges over disjoint bases: closures join without growing
        w1 = graph([0, 1, 2], [(2, 0), (2, 1)])
        w2 = graph([3, 4, 5], [(5, 3), (5, 4)])
        m, r1, r2 = glue(w1, w2, {})
        a = frozenset(r1.values())
        b = frozenset(r2.values())
        res = intrinsic_closure(m, a | b, A_23)
        assert res.closure == a | b
