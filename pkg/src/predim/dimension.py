"""Exact predimension and dimension arithmetic.

Values of ``delta_{beta,alpha}`` are carried as affine forms p - q*alpha
so that a single structure computation serves both exact-rational alpha
and declared-irrational alpha given by an open rational interval.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from .errors import (
    AlphaOutOfRange,
    BudgetExceeded,
    InsufficientPrecision,
    SetsNotDisjoint,
    UnknownElement,
)
from .structures import Structure
from .subsets import MAX_EXHAUSTIVE, SubsetTables

ONE = Fraction(1)


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class DimValue:
    """The affine form p - q*alpha with exact rational coefficients."""

    p: Fraction
    q: Fraction

    def __add__(self, other: "DimValue") -> "DimValue":
        return DimValue(self.p + other.p, self.q + other.q)

    def __sub__(self, other: "DimValue") -> "DimValue":
        return DimValue(self.p - other.p, self.q - other.q)

    def __neg__(self) -> "DimValue":
        return DimValue(-self.p, -self.q)

    def scale(self, k) -> "DimValue":
        k = Fraction(k)
        return DimValue(self.p * k, self.q * k)

    @staticmethod
    def of(value) -> "DimValue":
        return DimValue(Fraction(value), Fraction(0))

    def __repr__(self) -> str:
        return f"DimValue({self.p}, {self.q})"


ZERO = DimValue.of(0)
ALPHA_VALUE = DimValue(Fraction(0), Fraction(-1))  # the form 0 - (-1)*alpha == alpha


@dataclass(frozen=True)
class Alpha:
    """The edge-cost parameter: exact rational, or declared irrational
    inside an open rational interval (0,1)."""

    exact: Fraction | None = None
    lo: Fraction | None = None
    hi: Fraction | None = None

    @staticmethod
    def rational(value) -> "Alpha":
        v = Fraction(value)
        if not 0 < v <= 1:
            raise AlphaOutOfRange(f"exact alpha must satisfy 0 < alpha <= 1, got {v}")
        return Alpha(exact=v)

    @staticmethod
    def irrational(lo, hi) -> "Alpha":
        lo, hi = Fraction(lo), Fraction(hi)
        if not (0 < lo < hi < 1):
            raise AlphaOutOfRange(f"need 0 < lo < hi < 1, got ({lo}, {hi})")
        return Alpha(lo=lo, hi=hi)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def midpoint(self) -> Fraction:
        """A rational proxy; exact value or interval midpoint."""
        if self.is_exact:
            return self.exact
        return (self.lo + self.hi) / 2

    def evaluate(self, x: DimValue) -> Fraction:
        if not self.is_exact:
            raise InsufficientPrecision()
        return x.p - x.q * self.exact

    def sign(self, x: DimValue) -> int:
        """Sign of x on the whole alpha domain; raises when undetermined."""
        if self.is_exact:
            v = self.evaluate(x)
            return (v > 0) - (v < 0)
        if x.q == 0:
            return (x.p > 0) - (x.p < 0)
        t = x.p / x.q  # x > 0 iff alpha < t (q > 0) / alpha > t (q < 0)
        if x.q > 0:
            if t >= self.hi:
                return 1
            if t <= self.lo:
                return -1
        else:
            if t <= self.lo:
                return 1
            if t >= self.hi:
                return -1
        raise InsufficientPrecision(threshold=t)

    def cmp(self, x: DimValue, y: DimValue) -> Ordering:
        return Ordering(self.sign(x - y))

    def sign_or_none(self, x: DimValue) -> int | None:
        """Sign when resolvable, None when the threshold is interior."""
        try:
            return self.sign(x)
        except InsufficientPrecision:
            return None

    def format(self) -> str:
        if self.is_exact:
            return str(self.exact)
        return f"({self.lo},{self.hi})"


def parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def lattice_step(alpha: Alpha, beta: Fraction) -> Fraction:
    """Spacing of the value lattice for exact alpha: all delta values are
    integer multiples of 1/lcm(q, den(beta))."""
    if not alpha.is_exact:
        raise InsufficientPrecision()
    return Fraction(1, math.lcm(alpha.exact.denominator, beta.denominator))


# -- counting ---------------------------------------------------------------


def e_count(s: Structure) -> int:
    """Total relation instances, summed over symbols (with multiplicity
    across symbols)."""
    return len(s.all_instances)


def _check_disjoint(*sets: frozenset[int]) -> None:
    for i, a in enumerate(sets):
        for b in sets[i + 1:]:
            if a & b:
                raise SetsNotDisjoint(f"sets share {sorted(a & b)}")


def e_cross(a: Iterable[int], b: Iterable[int], s: Structure) -> int:
    """Instances within A|B meeting both A and B."""
    a, b = frozenset(a), frozenset(b)
    _check_disjoint(a, b)
    if not (a | b) <= s.elements:
        raise UnknownElement("cross-count sets not within the structure")
    both = a | b
    return sum(1 for r in s.all_instances if r <= both and r & a and r & b)


def e_cross3(a: Iterable[int], b: Iterable[int], c: Iterable[int], s: Structure) -> int:
    """Instances within A|B|C meeting both A and C."""
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    _check_disjoint(a, b, c)
    whole = a | b | c
    if not whole <= s.elements:
        raise UnknownElement("cross-count sets not within the structure")
    return sum(1 for r in s.all_instances if r <= whole and r & a and r & c)


# -- predimension -----------------------------------------------------------


def predimension(s: Structure, beta: Fraction = ONE) -> DimValue:
    """delta_{beta,alpha}(S) = beta*|S| - alpha*e(S) as an affine form."""
    return DimValue(Fraction(len(s.elements)) * beta, Fraction(e_count(s)))


def delta_rel(a: Iterable[int], b: Iterable[int], s: Structure, beta: Fraction = ONE) -> DimValue:
    """delta(A/B) = delta(A|B) - delta(B), both induced in ``s``."""
    a, b = frozenset(a), frozenset(b)
    return predimension(s.induced(a | b), beta) - predimension(s.induced(b), beta)


# -- subset minimization ----------------------------------------------------


class _Budget:
    def __init__(self, limit: int | None):
        self.limit = limit
        self.spent = 0

    def tick(self, n: int = 1) -> None:
        self.spent += n
        if self.limit is not None and self.spent > self.limit:
            raise BudgetExceeded(spent=self.spent)


def _instance_lists(s: Structure, pool: frozenset[int]):
    """Instances inside ``pool`` indexed by member element."""
    per: dict[int, list[frozenset[int]]] = {e: [] for e in pool}
    for inst in s.all_instances:
        if inst <= pool:
            for e in inst:
                per[e].append(inst)
    return per


def _min_delta_bnb(
    s: Structure,
    required: frozenset[int],
    forbidden: frozenset[int],
    alpha: Alpha,
    beta: Fraction,
    budget: _Budget,
    want_argmin: bool,
) -> tuple[DimValue, frozenset[int]]:
    """Branch-and-bound min of delta over required <= Y <= S - forbidden.

    Pruning is strict (only provably worse branches are cut) so ties are
    fully explored and the lexicographically least argmin is exact.
    Exact alpha runs entirely on the integer value lattice.
    """
    if alpha.is_exact:
        return _bnb_exact(s, required, forbidden, alpha, beta, budget, want_argmin)
    return _bnb_interval(s, required, forbidden, alpha, beta, budget, want_argmin)


def _bnb_exact(
    s: Structure,
    required: frozenset[int],
    forbidden: frozenset[int],
    alpha: Alpha,
    beta: Fraction,
    budget: _Budget,
    want_argmin: bool,
) -> tuple[DimValue, frozenset[int]]:
    # all values scaled by q*v onto the integer lattice
    p, q = alpha.exact.numerator, alpha.exact.denominator
    u, v = beta.numerator, beta.denominator
    size_c = q * u
    edge_c = p * v
    pool = s.elements - forbidden
    per = _instance_lists(s, pool)
    free = sorted(pool - required)

    def value_of(members: frozenset[int]) -> int:
        sub = s.induced(members)
        return size_c * len(sub.elements) - edge_c * e_count(sub)

    neg_suffix = [0] * (len(free) + 1)
    for i in range(len(free) - 1, -1, -1):
        gain = size_c - edge_c * len(per[free[i]])
        neg_suffix[i] = neg_suffix[i + 1] + (gain if gain < 0 else 0)

    req_num = value_of(required)
    best_num = req_num
    best_set = required
    chosen = set(required)
    full_num = value_of(pool)
    if full_num < best_num:
        best_num, best_set = full_num, frozenset(pool)

    def rec(i: int, cur: int) -> None:
        nonlocal best_num, best_set
        budget.tick()
        if i == len(free):
            if cur < best_num:
                best_num, best_set = cur, frozenset(chosen)
            elif cur == best_num and want_argmin:
                if tuple(sorted(chosen)) < tuple(sorted(best_set)):
                    best_set = frozenset(chosen)
            return
        bound = cur + neg_suffix[i]
        if bound > best_num or (bound == best_num and not want_argmin):
            return
        w = free[i]
        cnt = sum(1 for inst in per[w] if inst - {w} <= chosen)
        chosen.add(w)
        rec(i + 1, cur + size_c - edge_c * cnt)
        chosen.remove(w)
        rec(i + 1, cur)

    rec(0, req_num)
    return predimension(s.induced(best_set), beta), best_set


def _bnb_interval(
    s: Structure,
    required: frozenset[int],
    forbidden: frozenset[int],
    alpha: Alpha,
    beta: Fraction,
    budget: _Budget,
    want_argmin: bool,
) -> tuple[DimValue, frozenset[int]]:
    pool = s.elements - forbidden
    per = _instance_lists(s, pool)
    free = sorted(pool - required)

    def marginal(v: int, prior: set[int]) -> DimValue:
        cnt = sum(1 for inst in per[v] if inst - {v} <= prior)
        return DimValue(beta, Fraction(cnt))

    # static lower bounds on each free element's marginal (degree within pool)
    neg_suffix: list[DimValue] = [ZERO] * (len(free) + 1)
    for i in range(len(free) - 1, -1, -1):
        v = free[i]
        gain = DimValue(beta, Fraction(len(per[v])))
        sgn = alpha.sign_or_none(gain)
        neg_suffix[i] = neg_suffix[i + 1] + (gain if (sgn is None or sgn < 0) else ZERO)

    start_val = predimension(s.induced(required), beta)
    best_val = start_val
    best_set: frozenset[int] = required
    chosen = set(required)

    # seed with the full pool as a second candidate to tighten early pruning
    full_val = predimension(s.induced(pool), beta)
    sgn = alpha.sign_or_none(full_val - best_val)
    if sgn is not None and sgn < 0:
        best_val, best_set = full_val, frozenset(pool)

    def consider(val: DimValue, members: set[int]) -> None:
        nonlocal best_val, best_set
        c = alpha.cmp(val, best_val)
        if c == Ordering.LT:
            best_val, best_set = val, frozenset(members)
        elif c == Ordering.EQ and want_argmin:
            if tuple(sorted(members)) < tuple(sorted(best_set)):
                best_val, best_set = val, frozenset(members)

    def rec(i: int, cur_val: DimValue) -> None:
        budget.tick()
        if i == len(free):
            consider(cur_val, chosen)
            return
        bound = cur_val + neg_suffix[i]
        c = alpha.sign_or_none(bound - best_val)
        if c is not None and (c > 0 or (c == 0 and not want_argmin)):
            return
        v = free[i]
        m = marginal(v, chosen)
        chosen.add(v)
        rec(i + 1, cur_val + m)
        chosen.remove(v)
        rec(i + 1, cur_val)

    rec(0, start_val)
    return best_val, best_set


def _components(s: Structure, pool: frozenset[int]) -> list[frozenset[int]]:
    """Connected components of instance co-membership within ``pool``."""
    parent = {e: e for e in pool}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for inst in s.all_instances:
        if inst <= pool:
            it = iter(inst)
            r = find(next(it))
            for e in it:
                parent[find(e)] = r
    groups: dict[int, set[int]] = {}
    for e in pool:
        groups.setdefault(find(e), set()).add(e)
    return [frozenset(g) for g in groups.values()]


def _peel_core(
    s: Structure, required: frozenset[int], pool: frozenset[int], alpha: Alpha, beta: Fraction
) -> frozenset[int]:
    """Drop pool elements that can never appear in an inclusion-minimal
    argmin: their marginal is provably >= 0 however the search goes.

    An element stays only while strictly more than beta/alpha of its
    instances survive; worklist peeling makes this linear in the
    instance count."""
    alpha_high = alpha.exact if alpha.is_exact else alpha.hi
    universe = pool | required

    insts = [inst for inst in s.all_instances if inst <= universe]
    member_of: dict[int, list[int]] = {e: [] for e in universe}
    for i, inst in enumerate(insts):
        for e in inst:
            member_of[e].append(i)
    inst_alive = [True] * len(insts)
    count = {e: len(member_of[e]) for e in universe}
    alive = set(universe)

    def removable(v: int) -> bool:
        return v not in required and count[v] * alpha_high <= beta

    work = sorted(v for v in pool if removable(v))
    in_work = set(work)
    while work:
        v = work.pop()
        in_work.discard(v)
        if v not in alive:
            continue
        alive.remove(v)
        for i in member_of[v]:
            if not inst_alive[i]:
                continue
            inst_alive[i] = False
            for u in insts[i]:
                if u in alive:
                    count[u] -= 1
                    if u not in in_work and removable(u):
                        work.append(u)
                        in_work.add(u)
    return frozenset(alive - required)


def min_delta(
    s: Structure,
    required: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    forbidden: Iterable[int] = (),
    node_budget: int | None = 2_000_000,
    want_argmin: bool = True,
    assume_hereditary: bool = False,
) -> tuple[DimValue, frozenset[int]]:
    """Exact min of delta over required <= Y <= S - forbidden.

    With ``want_argmin`` the lexicographically least argmin over the full
    space is produced; the value-only path peels provably useless
    elements, decomposes over connected components, and is much faster
    on large sparse structures.  ``assume_hereditary`` skips components
    disjoint from the base (their minimum is 0), valid whenever the
    ambient is hereditarily nonnegative.
    """
    required = frozenset(required)
    forbidden = frozenset(forbidden)
    if not required <= s.elements:
        raise UnknownElement("base not within the structure")
    if required & forbidden:
        raise UnknownElement("required and forbidden overlap")
    budget = _Budget(node_budget)
    if want_argmin:
        val, arg = _min_delta_bnb(s, required, forbidden, alpha, beta, budget, True)
        return val, arg

    pool = s.elements - forbidden
    core = _peel_core(s, required, pool - required, alpha, beta)
    sub = s.induced(required | core)
    total = ZERO
    members: set[int] = set()
    for comp in sorted(_components(sub, sub.elements), key=min):
        req_c = required & comp
        if not req_c and assume_hereditary:
            continue
        part = sub.induced(comp)
        val, arg = _min_delta_bnb(part, req_c, frozenset(), alpha, beta, budget, False)
        if req_c:
            total = total + val
            members |= arg
        else:
            sgn = alpha.sign_or_none(val)
            if sgn is not None and sgn >= 0:
                continue
            total = total + val
            members |= arg
    return total, frozenset(members)


def dimension(
    s: Structure,
    base: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
    oracle: bool = False,
) -> tuple[DimValue, frozenset[int]]:
    """d_S(base): exact min of delta over supersets of ``base`` in ``s``,
    with the lexicographically least minimizer.

    ``oracle`` forces the pure exhaustive table path (no pruning); both
    paths agree exactly wherever both complete.
    """
    base = frozenset(base)
    if not base <= s.elements:
        raise UnknownElement("base not within the structure")
    if oracle:
        return dimension_oracle(s, base, alpha, beta)
    return min_delta(s, base, alpha, beta, node_budget=node_budget, want_argmin=True)


def dimension_value(
    s: Structure,
    base: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
    assume_hereditary: bool = False,
) -> DimValue:
    """d_S(base), value only, via core/component reduction."""
    val, _ = min_delta(
        s, base, alpha, beta, node_budget=node_budget, want_argmin=False,
        assume_hereditary=assume_hereditary,
    )
    return val


def dimension_oracle(s: Structure, base: Iterable[int], alpha: Alpha, beta: Fraction = ONE):
    """Pure exhaustive d_S(base) over the whole powerset (no pruning).

    Returns the affine form of the minimizer's delta so both paths carry
    the same representation, not just the same evaluated value.
    """
    if not alpha.is_exact:
        raise InsufficientPrecision()
    t = SubsetTables(s, alpha.exact, beta)
    _, arg = t.min_delta_over(t.mask_of(frozenset(base)))
    return predimension(s.induced(arg), beta), arg


def d_rel(
    s: Structure,
    a: Iterable[int],
    b: Iterable[int],
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
) -> DimValue:
    """Relative dimension d(A/B) = d(AB) - d(B) inside ``s``."""
    a, b = frozenset(a), frozenset(b)
    d_ab = dimension_value(s, a | b, alpha, beta, node_budget)
    d_b = dimension_value(s, b, alpha, beta, node_budget)
    return d_ab - d_b


def is_strong(
    base: Iterable[int],
    s: Structure,
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
    assume_hereditary: bool = False,
) -> bool:
    """base <= S in the strong-substructure sense: d_S(base) = delta(base)."""
    base = frozenset(base)
    val = dimension_value(s, base, alpha, beta, node_budget, assume_hereditary)
    return alpha.cmp(val, predimension(s.induced(base), beta)) == Ordering.EQ


def is_in_class(
    s: Structure,
    alpha: Alpha,
    beta: Fraction = ONE,
    node_budget: int | None = 2_000_000,
) -> tuple[bool, frozenset[int] | None]:
    """Hereditary nonnegativity: every subset has delta >= 0.

    On failure returns an inclusion-minimal violating subset.
    """
    val, arg = min_delta(s, frozenset(), alpha, beta, node_budget=node_budget, want_argmin=False)
    if alpha.sign(val) >= 0:
        return True, None
    # minimalize the violating witness deterministically
    witness = set(arg)
    changed = True
    while changed:
        changed = False
        for v in sorted(witness):
            trial = frozenset(witness - {v})
            if alpha.sign(predimension(s.induced(trial), beta)) < 0:
                witness.discard(v)
                changed = True
    return False, frozenset(witness)


# -- axiom audits ------------------------------------------------------------


def verify_axioms(
    s: Structure,
    trials: int,
    alpha: Alpha,
    beta: Fraction = ONE,
    seed: int = 0,
) -> dict:
    """Sample random disjoint triples (A,B,C) and audit the dimension
    axioms: submodularity, the negative-value lattice gap (exact alpha),
    and the cross-instance characterization of conditioning gaps.

    Any violation in the report is a correctness bug, not a property of
    the input.
    """
    rng = random.Random(seed)
    elems = list(s.sorted_elements)
    eps = lattice_step(alpha, beta) if alpha.is_exact else None
    report = {
        "trials": trials,
        "submodularity_checked": 0,
        "lattice_checked": 0,
        "gap_checked": 0,
        "violations": [],
    }
    for t in range(trials):
        rng.shuffle(elems)
        if len(elems) < 3:
            break
        na = rng.randint(1, max(1, len(elems) // 3))
        nb = rng.randint(1, max(1, (len(elems) - na) // 2))
        nc = rng.randint(1, max(1, len(elems) - na - nb))
        a = frozenset(elems[:na])
        b = frozenset(elems[na:na + nb])
        c = frozenset(elems[na + nb:na + nb + nc])
        elems.sort()

        d_ca = delta_rel(c, a, s, beta)
        d_cab = delta_rel(c, a | b, s, beta)
        gap_cb = d_ca - d_cab
        report["submodularity_checked"] += 1
        if alpha.sign(gap_cb) < 0:
            report["violations"].append(("submodularity", sorted(a), sorted(b), sorted(c)))
        # identity: the gap is exactly alpha * (instances meeting C and B)
        expected = ALPHA_VALUE.scale(e_cross3(c, a, b, s))
        if gap_cb != expected:
            report["violations"].append(("gap-identity", sorted(a), sorted(b), sorted(c)))

        d_ab = delta_rel(a, b, s, beta)
        if alpha.is_exact:
            report["lattice_checked"] += 1
            v = alpha.evaluate(d_ab)
            if v < 0 and v > -eps:
                report["violations"].append(("lattice", sorted(a), sorted(b)))

        gap = d_ab - delta_rel(a, b | c, s, beta)
        report["gap_checked"] += 1
        if alpha.cmp(gap, ALPHA_VALUE) == Ordering.LT:
            if e_cross3(a, b, c, s) != 0 or alpha.sign(gap) != 0:
                report["violations"].append(("small-gap", sorted(a), sorted(b), sorted(c)))
    report["ok"] = not report["violations"]
    return report
