"""Sparse random graphs with edge probability c * n**(-alpha) and the
small-subgraph census used for first-moment checks.

Edge indicators come from a counter-based generator keyed on the seed,
drawn in canonical pair order, so a spec reproduces the identical graph
regardless of how callers iterate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded, ProbabilityOverflow, UsageError
from .structures import Structure, embeddings_over, graph


@dataclass(frozen=True)
class SampleSpec:
    n: int
    alpha_star: Fraction  # rational proxy for the edge-probability exponent
    coeff: Fraction
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("need n >= 1")
        if self.coeff < 0:
            raise UsageError("coefficient must be nonnegative")

    def probability(self) -> float:
        p = float(self.coeff) * float(self.n) ** (-float(self.alpha_star))
        if p > 1.0:
            raise ProbabilityOverflow(f"edge probability {p} exceeds 1")
        return p


def sample(spec: SampleSpec) -> Structure:
    """One draw: each unordered pair independently an edge with
    probability c * n**(-alpha), deterministic per (seed, pair index).

    Pair index k runs over (i, j) with i < j in lexicographic order."""
    p = spec.probability()
    n = spec.n
    m = n * (n - 1) // 2
    if m == 0:
        return graph(range(n), [])
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    uniforms = rng.random(m)
    hits = np.nonzero(uniforms < p)[0]
    row_starts = np.concatenate(([0], np.cumsum(np.arange(n - 1, 0, -1))))
    rows = np.searchsorted(row_starts, hits, side="right") - 1
    cols = hits - row_starts[rows] + rows + 1
    edges = list(zip(map(int, rows), map(int, cols)))
    return graph(range(n), edges)


def _match_order(h: Structure) -> list[tuple[int, list[int]]]:
    """Pattern vertices ordered so each one (when possible) has an earlier
    neighbor; returns (vertex, earlier-neighbor positions) per slot."""
    ids = list(h.sorted_elements)
    adj: dict[int, set[int]] = {e: set() for e in ids}
    for inst in h.all_instances:
        u, v = tuple(inst)
        adj[u].add(v)
        adj[v].add(u)
    placed: list[int] = []
    remaining = set(ids)
    order: list[tuple[int, list[int]]] = []
    while remaining:
        attached = sorted(v for v in remaining if adj[v] & set(placed))
        nxt = attached[0] if attached else min(remaining)
        anchors = [placed.index(u) for u in sorted(adj[nxt] & set(placed))]
        order.append((nxt, anchors))
        placed.append(nxt)
        remaining.discard(nxt)
    return order


def census(m: Structure, h: Structure, node_budget: int | None = 50_000_000) -> int:
    """Number of vertex subsets of ``m`` whose induced structure contains
    a (not necessarily induced) copy of ``h``.

    Matching is edge-guided: each pattern vertex with placed neighbors
    draws candidates from their common adjacency, so sparse ambients are
    cheap even at large n."""
    if len(h.elements) > 6:
        raise BudgetExceeded("census patterns capped at 6 vertices")
    if not m.signature.is_graph or not h.signature.is_graph:
        raise UsageError("census requires graph signatures")
    adj: dict[int, set[int]] = {e: set() for e in m.elements}
    for inst in m.all_instances:
        u, v = tuple(inst)
        adj[u].add(v)
        adj[v].add(u)
    order = _match_order(h)
    all_vertices = sorted(m.elements)
    found: set[tuple[int, ...]] = set()
    nodes = 0

    def rec(i: int, assign: list[int]) -> None:
        nonlocal nodes
        nodes += 1
        if node_budget is not None and nodes > node_budget:
            raise BudgetExceeded(spent=nodes)
        if i == len(order):
            found.add(tuple(sorted(assign)))
            return
        _, anchors = order[i]
        if anchors:
            cands = set(adj[assign[anchors[0]]])
            for a in anchors[1:]:
                cands &= adj[assign[a]]
            cands -= set(assign)
            it = sorted(cands)
        else:
            it = (v for v in all_vertices if v not in assign)
        for cand in it:
            assign.append(cand)
            rec(i + 1, assign)
            assign.pop()

    rec(0, [])
    return len(found)


def expected_count(spec: SampleSpec, h: Structure) -> float:
    """First-moment count of copies of ``h``: C(n,v) * v!/|Aut(h)| * p^e."""
    v = len(h.elements)
    e = len(h.all_instances)
    aut = len(embeddings_over(h, frozenset(), h))
    p = spec.probability()
    return math.comb(spec.n, v) * (math.factorial(v) // aut) * p ** e
