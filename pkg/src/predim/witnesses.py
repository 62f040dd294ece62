"""Primitive blocks and the glued dimension witnesses.

A block is a pointed extension (C, x, y, c) of the discrete pair
B = {x,y} with 0 <= delta(C/B) < 1/n, a discrete triple, and no strong
set strictly between B and C.  Blocks glue over a shared (x,y,c) into
the zero-dimension witness, or over a shared c alone into the
discontinuity witness; all reported dimensions are computed exactly
along the amalgamation tree.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .decompose import AmalgamTree, Node, assemble, d_rel_tree, min_delta_tree
from .dimension import (
    ONE,
    Alpha,
    DimValue,
    Ordering,
    delta_rel,
    predimension,
)
from .closure import is_primitive
from .constructions import (
    Certificate,
    NEG_ONE,
    SearchBudget,
    _MaskEval,
    amalg_copies,
    approach_zero,
    chain,
    search_reachable,
)
from .errors import BudgetExceeded, UsageError
from .structures import Structure, glue
from .subsets import MAX_EXHAUSTIVE, SubsetTables

PRIMITIVE_EXHAUSTIVE_CAP = MAX_EXHAUSTIVE


@dataclass(frozen=True)
class Block:
    structure: Structure
    x: int
    y: int
    c: int
    tree: AmalgamTree
    eps: DimValue  # delta(C / {x,y})
    level: int
    conditions: dict

    @property
    def base(self) -> frozenset[int]:
        return frozenset({self.x, self.y})

    def relabeled(self, mapping) -> "Block":
        return Block(
            self.structure.relabel(mapping),
            mapping[self.x],
            mapping[self.y],
            mapping[self.c],
            self.tree.relabel(mapping),
            self.eps,
            self.level,
            self.conditions,
        )


def _primitive_exhaustive(s: Structure, base: frozenset[int], alpha: Alpha, beta: Fraction) -> bool:
    t = SubsetTables(s, alpha.exact, beta)
    base_mask = t.mask_of(base)
    full = (1 << t.n) - 1
    msup = t.min_over_supersets()
    if msup[base_mask] != t.delta_num[base_mask]:
        return False
    mids = t.supersets(base_mask)
    strong = msup[mids] == t.delta_num[mids]
    strong[mids == base_mask] = False
    strong[mids == full] = False
    return not strong.any()


def _spot_minimality(
    s: Structure,
    base: frozenset[int],
    eps: DimValue,
    alpha: Alpha,
    beta: Fraction,
    samples: int,
    seed: int,
) -> bool:
    """Sampled check of the sufficient condition for primitivity: every
    strictly intermediate base-containing subset exceeds delta(C/B)."""
    ev = _MaskEval(s, beta)
    base_mask = ev.mask_of(base)
    n = len(s.elements)
    full = (1 << n) - 1
    target = predimension(s, beta)
    rng = random.Random(seed)
    for _ in range(samples):
        m = (rng.getrandbits(n) | base_mask) & full
        if m in (base_mask, full):
            continue
        if alpha.cmp(ev.delta(m), target) != Ordering.GT:
            return False
    return True


def build_block(
    alpha: Alpha,
    n: int,
    beta: Fraction = ONE,
    budget: SearchBudget | None = None,
    primitive_cap: int = PRIMITIVE_EXHAUSTIVE_CAP,
    spot_samples: int = 100_000,
    strict: bool = False,
) -> Block:
    """A primitive extension of a discrete pair with relative dimension
    in [0, 1/n).

    For exact alpha an exact-zero certificate is preferred (one block
    then serves every n); ``strict`` requests relative dimension
    strictly positive instead, which the rational value lattice may not
    admit.  Falling back, two class members are chained so their
    relative dimensions sum into (-1, -1 + 1/n].
    """
    if n < 1:
        raise UsageError("need n >= 1")
    budget = budget or SearchBudget()
    cert: Certificate | None = None

    if not strict:
        try:
            hit = search_reachable(
                alpha, lambda c: alpha.sign(c.rel_dim) == 0, beta, budget
            )
            assert isinstance(hit, Certificate)
            cert = hit
        except BudgetExceeded:
            cert = None

    if cert is None:
        window_lo = NEG_ONE
        window_hi = DimValue.of(Fraction(-1) + Fraction(1, n))

        def pair_ok(c1: Certificate, c2: Certificate) -> bool:
            total = c1.rel_dim + c2.rel_dim
            return (
                alpha.cmp(total, window_lo) == Ordering.GT
                and alpha.cmp(total, window_hi) == Ordering.LT
                and c1.size() + c2.size() - 1 <= budget.size_limit
            )

        hit = search_reachable(
            alpha, lambda c: False, beta, budget, pair_goal=pair_ok
        )
        assert isinstance(hit, tuple)
        cert = chain(hit[0], hit[1], alpha, beta)

    s = cert.structure
    p = cert.pointed
    eps = cert.rel_dim if alpha.sign(cert.rel_dim) >= 0 else None
    if eps is None:
        raise BudgetExceeded("no block with nonnegative relative dimension found")

    conditions: dict = {}
    conditions["eps_in_range"] = (
        alpha.sign(eps) >= 0
        and alpha.cmp(eps, DimValue.of(Fraction(1, n))) == Ordering.LT
    )
    conditions["triple_discrete"] = s.induced(p.triple).is_discrete()
    one = DimValue.of(1)
    conditions["dim_over_x_ge_1"] = (
        alpha.cmp(delta_rel(s.elements, {p.a}, s, beta), one) != Ordering.LT
    )
    conditions["dim_over_y_ge_1"] = (
        alpha.cmp(delta_rel(s.elements, {p.b}, s, beta), one) != Ordering.LT
    )

    if alpha.is_exact and len(s.elements) <= primitive_cap:
        conditions["primitive"] = _primitive_exhaustive(s, p.base_pair, alpha, beta)
        conditions["primitive_check"] = "exhaustive"
    elif not alpha.is_exact and len(s.elements) <= 12:
        conditions["primitive"] = is_primitive(p.base_pair, s, alpha, beta)
        conditions["primitive_check"] = "exhaustive"
    else:
        conditions["primitive"] = _spot_minimality(
            s, p.base_pair, eps, alpha, beta, spot_samples, seed=0
        )
        conditions["primitive_check"] = "deferred-spot"

    return Block(s, p.a, p.b, p.e, cert.tree, eps, n, conditions)


@dataclass(frozen=True)
class WitnessReport:
    structure: Structure
    tree: AmalgamTree
    points: dict
    blocks: list
    values: dict


def rank_zero_witness(
    alpha: Alpha,
    blocks_count: int,
    beta: Fraction = ONE,
    budget: SearchBudget | None = None,
    node_budget: int | None = 2_000_000,
) -> WitnessReport:
    """Glue blocks for n = 1..N over a common base pair, identifying all
    their distinguished points as one point c.

    Reports the exact dimensions of c over the base pair and over each
    single base point, the per-block nonnegativity certificates, and
    hereditary nonnegativity of the whole witness, all via the
    amalgamation-tree decomposition.
    """
    if blocks_count < 1:
        raise UsageError("need at least one block")
    blocks = [build_block(alpha, n, beta, budget) for n in range(1, blocks_count + 1)]

    first, remap = blocks[0].structure.renumbered()
    parts: list[AmalgamTree] = [blocks[0].tree.relabel(remap)]
    placed = [blocks[0].relabeled(remap)]
    x, y, c = placed[0].x, placed[0].y, placed[0].c
    whole = first
    for blk in blocks[1:]:
        ident = {blk.x: x, blk.y: y, blk.c: c}
        whole, r_new, r_old = glue(blk.structure, whole, ident)
        parts = [p.relabel(r_old) for p in parts]
        placed = [b.relabeled(r_old) for b in placed]
        x, y, c = r_old[x], r_old[y], r_old[c]
        parts.append(blk.tree.relabel(r_new))
        placed.append(blk.relabeled(r_new))

    shared = frozenset({x, y, c})
    tree = Node(tuple(parts), shared, whole.induced(shared))

    memo: dict = {}
    d_xyc = min_delta_tree(tree, {x, y, c}, alpha, beta, node_budget=node_budget, _memo=memo)
    d_xy = min_delta_tree(tree, {x, y}, alpha, beta, node_budget=node_budget, _memo=memo)
    d_xc = min_delta_tree(tree, {x, c}, alpha, beta, node_budget=node_budget, _memo=memo)
    d_x = min_delta_tree(tree, {x}, alpha, beta, node_budget=node_budget, _memo=memo)
    d_yc = min_delta_tree(tree, {y, c}, alpha, beta, node_budget=node_budget, _memo=memo)
    d_y = min_delta_tree(tree, {y}, alpha, beta, node_budget=node_budget, _memo=memo)
    whole_min = min_delta_tree(tree, frozenset(), alpha, beta, node_budget=node_budget, _memo=memo)

    eps_list = [b.eps for b in placed]
    values = {
        "d_c_over_base": d_xyc - d_xy,
        "d_c_over_x": d_xc - d_x,
        "d_c_over_y": d_yc - d_y,
        "block_eps": eps_list,
        "eps_nonneg": all(alpha.sign(e) >= 0 for e in eps_list),
        "block_dim_over_x_ge_1": all(b.conditions["dim_over_x_ge_1"] for b in placed),
        "block_dim_over_y_ge_1": all(b.conditions["dim_over_y_ge_1"] for b in placed),
        "hereditarily_nonneg": alpha.sign(whole_min) >= 0,
    }
    return WitnessReport(
        whole, tree, {"x": x, "y": y, "c": c}, placed, values
    )


def discontinuity_witness(
    alpha: Alpha,
    blocks_count: int,
    beta: Fraction = ONE,
    budget: SearchBudget | None = None,
    node_budget: int | None = 2_000_000,
) -> WitnessReport:
    """Blocks over pairwise-distinct base pairs sharing only the
    distinguished point c.

    Dropping base pairs should strictly raise the dimension of c, so
    strictly-positive-dimension blocks are preferred; when the rational
    lattice has none, zero blocks are used and the degenerate dimensions
    are reported as computed.
    """
    if blocks_count < 2:
        raise UsageError("need at least two blocks")
    blocks = []
    for n in range(1, blocks_count + 1):
        try:
            blocks.append(build_block(alpha, n, beta, budget, strict=True))
        except BudgetExceeded:
            blocks.append(build_block(alpha, n, beta, budget))

    first, remap = blocks[0].structure.renumbered()
    parts: list[AmalgamTree] = [blocks[0].tree.relabel(remap)]
    placed = [blocks[0].relabeled(remap)]
    c = placed[0].c
    whole = first
    for blk in blocks[1:]:
        whole, r_new, r_old = glue(blk.structure, whole, {blk.c: c})
        parts = [p.relabel(r_old) for p in parts]
        placed = [b.relabeled(r_old) for b in placed]
        c = r_old[c]
        parts.append(blk.tree.relabel(r_new))
        placed.append(blk.relabeled(r_new))

    shared = frozenset({c})
    tree = Node(tuple(parts), shared, whole.induced(shared))

    memo: dict = {}
    bases = [b.base for b in placed]
    all_bases: frozenset[int] = frozenset().union(*bases)
    prefix_dims: list[DimValue] = []
    for m in range(1, blocks_count + 1):
        pref: frozenset[int] = frozenset().union(*bases[:m])
        d_with = min_delta_tree(
            tree, pref | {c}, alpha, beta, node_budget=node_budget, _memo=memo
        )
        d_without = min_delta_tree(tree, pref, alpha, beta, node_budget=node_budget, _memo=memo)
        prefix_dims.append(d_with - d_without)

    values = {
        "d_c_over_all_bases": prefix_dims[-1],
        "d_c_over_prefix": prefix_dims,
        "prefix_positive": [alpha.sign(v) > 0 for v in prefix_dims[:-1]],
        "block_eps": [b.eps for b in placed],
    }
    return WitnessReport(
        whole, tree, {"c": c, "bases": [sorted(b) for b in bases]}, placed, values
    )
