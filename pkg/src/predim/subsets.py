"""Exhaustive subset tables for small structures.

For an exact rational alpha = p/q and beta = u/v every value
``beta*|S| - alpha*e(S)`` lies on the integer lattice scaled by q*v, so
whole-powerset tables can be computed in int64 numpy arrays with zero
rounding.  Feasible up to ~22 elements; callers gate on ``MAX_EXHAUSTIVE``.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded
from .structures import Structure

MAX_EXHAUSTIVE = 22


class SubsetTables:
    """Powerset tables for a structure renumbered to 0..n-1.

    Values are numerators of delta over the common denominator
    ``q * v``; ``delta(S) == delta_num[mask] / denom`` exactly.
    """

    def __init__(self, s: Structure, alpha: Fraction, beta: Fraction):
        n = len(s.elements)
        if n > MAX_EXHAUSTIVE:
            raise BudgetExceeded(f"{n} elements exceeds exhaustive cap {MAX_EXHAUSTIVE}")
        self.structure = s
        self.n = n
        self.alpha = alpha
        self.beta = beta
        p, q = alpha.numerator, alpha.denominator
        u, v = beta.numerator, beta.denominator
        self.denom = q * v
        self.size_coeff = q * u
        self.edge_coeff = p * v
        self._ids = s.sorted_elements
        self._index = s.element_index
        size = 1 << n
        masks = np.arange(size, dtype=np.uint64)
        self.popcount = np.bitwise_count(masks).astype(np.int64)
        self.e_table = self._build_e_table(s, size)
        self.delta_num = self.popcount * self.size_coeff - self.e_table * self.edge_coeff
        self._min_over_supersets: np.ndarray | None = None

    def _build_e_table(self, s: Structure, size: int) -> np.ndarray:
        n = self.n
        e = np.zeros(size, dtype=np.int64)
        if s.signature.is_graph:
            adj = [np.uint64(s.adjacency[self._ids[i]]) for i in range(n)]
            for v in range(n - 1, -1, -1):
                high = np.arange(1 << (n - v - 1), dtype=np.uint64) << np.uint64(v + 1)
                cross = np.bitwise_count(adj[v] & high).astype(np.int64)
                e[(high | np.uint64(1 << v)).astype(np.int64)] = e[high.astype(np.int64)] + cross
            return e
        # generic arity: per-lowest-element instance masks, python DP
        by_low: list[list[int]] = [[] for _ in range(n)]
        for m in s.instance_masks:
            by_low[(m & -m).bit_length() - 1].append(m)
        for v in range(n - 1, -1, -1):
            insts = by_low[v]
            bit = 1 << v
            step = bit << 1
            for k in range(1 << (n - v - 1)):
                high = k * step
                cnt = e[high]
                for im in insts:
                    if im & ~(high | bit) == 0:
                        cnt += 1
                e[high | bit] = cnt
        return e

    def mask_of(self, subset) -> int:
        m = 0
        for e in subset:
            m |= 1 << self._index[e]
        return m

    def set_of(self, mask: int) -> frozenset[int]:
        return frozenset(self._ids[i] for i in range(self.n) if mask >> i & 1)

    def delta_fraction(self, mask: int) -> Fraction:
        return Fraction(int(self.delta_num[mask]), self.denom)

    def min_over_supersets(self) -> np.ndarray:
        """msup[m] = min delta_num over all supersets of m (m included)."""
        if self._min_over_supersets is None:
            msup = self.delta_num.copy()
            for v in range(self.n):
                view = msup.reshape(-1, 2, 1 << v)
                np.minimum(view[:, 0, :], view[:, 1, :], out=view[:, 0, :])
            self._min_over_supersets = msup
        return self._min_over_supersets

    def is_strong_mask(self, mask: int) -> bool:
        return self.min_over_supersets()[mask] == self.delta_num[mask]

    def supersets(self, base_mask: int, within_mask: int | None = None) -> np.ndarray:
        """All masks Y with base <= Y <= within, ascending numerically."""
        full = (1 << self.n) - 1
        if within_mask is None:
            within_mask = full
        free = within_mask & ~base_mask
        bits = [i for i in range(self.n) if free >> i & 1]
        combos = np.zeros(1 << len(bits), dtype=np.int64)
        for i, b in enumerate(bits):
            combos[(np.arange(1 << len(bits)) >> i) & 1 == 1] += 1 << b
        return np.sort(combos + base_mask)

    def min_delta_over(
        self, base_mask: int, within_mask: int | None = None
    ) -> tuple[Fraction, frozenset[int]]:
        """Exact min of delta over base <= Y <= within, with the
        lexicographically least argmin (compared as sorted id tuples)."""
        masks = self.supersets(base_mask, within_mask)
        vals = self.delta_num[masks]
        best = vals.min()
        ties = masks[vals == best]
        arg = min(tuple(sorted(self.set_of(int(m)))) for m in ties)
        return Fraction(int(best), self.denom), frozenset(arg)
