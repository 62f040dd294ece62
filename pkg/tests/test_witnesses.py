from fractions import Fraction

import pytest

from conftest import random_graph
from predim.closure import is_primitive
from predim.decompose import (
    Leaf,
    Node,
    assemble,
    d_rel_tree,
    min_delta_tree,
    validate,
)
from predim.dimension import Alpha, DimValue, Ordering, dimension_oracle
from predim.errors import UsageError
from predim.structures import bouquet, graph
from predim.witnesses import build_block, discontinuity_witness, rank_zero_witness

GRID = ["1/2", "5/11", "5/8", "7/10"]


class TestTreeDecomposition:
    def test_random_bouquets_match_oracle(self, rng):
        for _ in range(25):
            blk = random_graph(rng, rng.randint(3, 5), 0.5)
            base = sorted(rng.sample(sorted(blk.elements), 2))
            copies = rng.randint(2, 3)
            whole, remaps = bouquet(blk, base, copies)
            parts = tuple(Leaf(blk.relabel(r)) for r in remaps)
            shared = frozenset(remaps[0][b] for b in base)
            tree = Node(parts, shared, whole.induced(shared))
            validate(tree)
            alpha = Alpha.rational(Fraction(rng.randint(1, 7), rng.randint(8, 11)))
            q = frozenset(rng.sample(sorted(whole.elements), rng.randint(0, 3)))
            v_tree = min_delta_tree(tree, q, alpha)
            v_oracle, _ = dimension_oracle(whole, q, alpha)
            assert alpha.evaluate(v_tree) == alpha.evaluate(v_oracle)

    def test_nested_chain_trees_match_oracle(self, rng):
        from predim.constructions import find_seed, chain

        for a_str in ("1/2", "7/10", "2/3"):
            alpha = Alpha.rational(Fraction(a_str))
            seed = find_seed(alpha)
            cert = chain(seed, seed, alpha)
            validate(cert.tree)
            assert assemble(cert.tree) == cert.structure
            for _ in range(8):
                q = frozenset(
                    rng.sample(sorted(cert.structure.elements), rng.randint(1, 3))
                )
                v_tree = min_delta_tree(cert.tree, q, alpha)
                v_oracle, _ = dimension_oracle(cert.structure, q, alpha)
                assert alpha.evaluate(v_tree) == alpha.evaluate(v_oracle)

    def test_forbidden_elements_respected(self):
        alpha = Alpha.rational(Fraction(1, 2))
        e1 = graph([0, 1], [(0, 1)])
        e2 = graph([1, 2], [(1, 2)])
        tree = Node((Leaf(e1), Leaf(e2)), frozenset({1}), graph([1], []))
        v = min_delta_tree(tree, {0}, alpha, forbidden={2})
        assert alpha.evaluate(v) == alpha.evaluate(
            dimension_oracle(graph([0, 1], [(0, 1)]), {0}, alpha)[0]
        )


class TestBlocks:
    @pytest.mark.parametrize("alpha_str", GRID)
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_grid_conditions(self, alpha_str, n):
        alpha = Alpha.rational(Fraction(alpha_str))
        blk = build_block(alpha, n)
        assert blk.conditions["eps_in_range"]
        assert blk.conditions["triple_discrete"]
        assert blk.conditions["dim_over_x_ge_1"]
        assert blk.conditions["dim_over_y_ge_1"]
        if len(blk.structure.elements) <= 22:
            assert blk.conditions["primitive_check"] == "exhaustive"
            assert blk.conditions["primitive"] is True
        else:
            assert blk.conditions["primitive"] is True  # spot evidence

    def test_zero_block_primitive_by_library_check(self):
        alpha = Alpha.rational(Fraction(1, 2))
        blk = build_block(alpha, 1)
        assert is_primitive(blk.base, blk.structure, alpha)

    def test_strict_block_when_lattice_admits(self):
        alpha = Alpha.rational(Fraction(5, 11))
        blk = build_block(alpha, 2, strict=True)
        assert alpha.sign(blk.eps) > 0
        assert alpha.cmp(blk.eps, DimValue.of(Fraction(1, 2))) == Ordering.LT


class TestRankZeroWitness:
    def test_half_single_block(self):
        alpha = Alpha.rational(Fraction(1, 2))
        w = rank_zero_witness(alpha, 1)
        validate(w.tree)
        assert assemble(w.tree) == w.structure
        assert alpha.evaluate(w.values["d_c_over_base"]) == 0
        assert w.values["eps_nonneg"]
        assert w.values["hereditarily_nonneg"]
        # the witness is small enough for a full pointwise oracle check
        x, y, c = w.points["x"], w.points["y"], w.points["c"]
        for base in ({x, y, c}, {x, y}, {x, c}, {x}, {c}, set()):
            v_tree = min_delta_tree(w.tree, base, alpha)
            v_oracle, _ = dimension_oracle(w.structure, base, alpha)
            assert alpha.evaluate(v_tree) == alpha.evaluate(v_oracle)

    def test_five_elevenths_three_blocks(self):
        alpha = Alpha.rational(Fraction(5, 11))
        w = rank_zero_witness(alpha, 3)
        validate(w.tree)
        assert alpha.cmp(
            w.values["d_c_over_base"], DimValue.of(Fraction(1, 3))
        ) == Ordering.LT
        assert w.values["eps_nonneg"]
        # hereditary nonnegativity over all 2^135 subsets comes from the
        # tree decomposition; direct enumeration is out of reach here
        assert w.values["hereditarily_nonneg"]

    def test_rejects_zero_blocks(self):
        with pytest.raises(UsageError):
            rank_zero_witness(Alpha.rational(Fraction(1, 2)), 0)

    def test_d_bounded_by_block_eps(self):
        for a_str in GRID:
            alpha = Alpha.rational(Fraction(a_str))
            w = rank_zero_witness(alpha, 2)
            bound = min(
                (alpha.evaluate(e) for e in w.values["block_eps"]),
            )
            assert alpha.evaluate(w.values["d_c_over_base"]) <= bound


class TestDiscontinuityWitness:
    def test_five_elevenths_two_blocks(self):
        alpha = Alpha.rational(Fraction(5, 11))
        w = discontinuity_witness(alpha, 2)
        validate(w.tree)
        assert all(alpha.sign(e) > 0 for e in w.values["block_eps"])
        assert all(w.values["prefix_positive"])
        assert alpha.cmp(
            w.values["d_c_over_all_bases"], DimValue.of(Fraction(1, 2))
        ) == Ordering.LT

    def test_dropping_bases_never_lowers(self):
        alpha = Alpha.rational(Fraction(5, 11))
        w = discontinuity_witness(alpha, 3)
        dims = [alpha.evaluate(v) for v in w.values["d_c_over_prefix"]]
        assert dims == sorted(dims, reverse=True)

    def test_positive_over_each_single_base(self):
        alpha = Alpha.rational(Fraction(5, 11))
        w = discontinuity_witness(alpha, 2)
        b0, b1 = [frozenset(b) for b in w.points["bases"]]
        c = w.points["c"]
        d_b0 = d_rel_tree(w.tree, {c}, b0, alpha)
        d_b1 = d_rel_tree(w.tree, {c}, b1, alpha)
        assert alpha.sign(d_b0) > 0 and alpha.sign(d_b1) > 0

    def test_rejects_single_block(self):
        with pytest.raises(UsageError):
            discontinuity_witness(Alpha.rational(Fraction(1, 2)), 1)

    def test_half_degenerate_lattice_reported(self):
        # at 1/2 the level-1 window (0,1) still has the lattice point 1/2,
        # but level 2 needs eps in (0,1/2) which the lattice misses: the
        # fallback zero block pins the full-base dimension at zero
        alpha = Alpha.rational(Fraction(1, 2))
        w = discontinuity_witness(alpha, 2)
        eps = [alpha.evaluate(e) for e in w.values["block_eps"]]
        assert eps == [Fraction(1, 2), Fraction(0)]
        assert alpha.evaluate(w.values["d_c_over_all_bases"]) == 0
        assert w.values["prefix_positive"] == [True]
