"""Dimension computation along free-amalgamation trees.

Constructed structures are towers of free amalgams over small shared
bases.  Minimizing delta over supersets then splits exactly: for a node
whose parts pairwise intersect in a shared base D,

    delta(Y) = sum_i delta(Y_i) - (k-1) * delta(Y & D),

so the minimum decomposes per part once the trace Y & D is fixed.  The
tree recursion enumerates the 2^|D| traces (D is 1-3 elements here) and
reduces leaf queries to ordinary branch-and-bound minimization.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Union

from .dimension import ONE, Alpha, DimValue, min_delta, predimension
from .errors import UsageError
from .structures import Structure


@dataclass(frozen=True)
class Leaf:
    structure: Structure

    @property
    def elements(self) -> frozenset[int]:
        return self.structure.elements

    def relabel(self, mapping: Mapping[int, int]) -> "Leaf":
        return Leaf(self.structure.relabel(mapping))


@dataclass(frozen=True)
class Node:
    parts: tuple["AmalgamTree", ...]
    shared: frozenset[int]
    base_structure: Structure  # induced structure on the shared base

    @property
    def elements(self) -> frozenset[int]:
        out: set[int] = set()
        for p in self.parts:
            out |= p.elements
        return frozenset(out)

    def relabel(self, mapping: Mapping[int, int]) -> "Node":
        return Node(
            tuple(p.relabel(mapping) for p in self.parts),
            frozenset(mapping[e] for e in self.shared),
            self.base_structure.relabel(mapping),
        )


AmalgamTree = Union[Leaf, Node]


def assemble(tree: AmalgamTree) -> Structure:
    """The structure an amalgam tree denotes (union of its leaves)."""
    leaves = list(_leaves(tree))
    sig = leaves[0].signature
    elements: set[int] = set()
    inst = {name: set() for name in sig.symbols}
    for s in leaves:
        if s.signature != sig:
            raise UsageError("leaf signatures differ")
        elements |= s.elements
        for name, rows in s.instances:
            inst[name] |= rows
    return Structure.make(sig, elements, {k: list(v) for k, v in inst.items()})


def _leaves(tree: AmalgamTree):
    if isinstance(tree, Leaf):
        yield tree.structure
    else:
        for p in tree.parts:
            yield from _leaves(p)


def validate(tree: AmalgamTree) -> None:
    """Check the free-amalgam invariants at every node (test support)."""
    if isinstance(tree, Leaf):
        return
    for p in tree.parts:
        validate(p)
        if not tree.shared <= p.elements:
            raise UsageError("part does not contain the shared base")
    for p1, p2 in combinations(tree.parts, 2):
        if p1.elements & p2.elements != tree.shared:
            raise UsageError("parts overlap outside the shared base")
    whole = assemble(tree)
    if whole.induced(tree.shared) != tree.base_structure:
        raise UsageError("base structure does not match the assembly")


def min_delta_tree(
    tree: AmalgamTree,
    required: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    forbidden: Iterable[int] = (),
    node_budget: int | None = 2_000_000,
    _memo: dict | None = None,
) -> DimValue:
    """Exact min of delta over required <= Y <= elements - forbidden,
    computed by per-part decomposition (value only)."""
    required = frozenset(required)
    forbidden = frozenset(forbidden)
    if _memo is None:
        _memo = {}
    elems = tree.elements
    key = (id(tree), required & elems, forbidden & elems)
    if key in _memo:
        return _memo[key]

    if isinstance(tree, Leaf):
        val, _ = min_delta(
            tree.structure,
            required & elems,
            alpha,
            beta,
            forbidden=forbidden & elems,
            node_budget=node_budget,
            want_argmin=False,
        )
        _memo[key] = val
        return val

    shared_free = sorted(tree.shared - forbidden)
    need = required & tree.shared
    if not need <= frozenset(shared_free):
        raise UsageError("required elements of the base are forbidden")
    optional = [e for e in shared_free if e not in need]
    best: DimValue | None = None
    for k in range(len(optional) + 1):
        for extra in combinations(optional, k):
            trace = need | frozenset(extra)
            banned = tree.shared - trace
            total = predimension(
                tree.base_structure.induced(trace), beta
            ).scale(-(len(tree.parts) - 1))
            for part in tree.parts:
                total = total + min_delta_tree(
                    part,
                    (required & part.elements) | trace,
                    alpha,
                    beta,
                    (forbidden & part.elements) | banned,
                    node_budget,
                    _memo,
                )
            if best is None or alpha.sign(total - best) < 0:
                best = total
    assert best is not None
    _memo[key] = best
    return best


def dimension_tree(
    tree: AmalgamTree,
    base: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
) -> DimValue:
    """d(base) inside the assembled structure, via the decomposition."""
    return min_delta_tree(tree, base, alpha, beta, node_budget=node_budget)


def d_rel_tree(
    tree: AmalgamTree,
    a: Iterable[int],
    b: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
) -> DimValue:
    """Relative dimension d(A/B) = d(AB) - d(B) via the decomposition."""
    a, b = frozenset(a), frozenset(b)
    memo: dict = {}
    d_ab = min_delta_tree(tree, a | b, alpha, beta, node_budget=node_budget, _memo=memo)
    d_b = min_delta_tree(tree, b, alpha, beta, node_budget=node_budget, _memo=memo)
    return d_ab - d_b
