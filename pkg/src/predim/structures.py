"""Finite relational structures with set-valued relation instances.

Relations hold only on tuples of distinct elements and are closed under
permutation, so an instance is stored as a frozenset of element ids.
Element ids are plain non-negative ints scoped to a structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

from .errors import BaseMismatch, OverlapViolation, UnknownElement, UsageError

GRAPH_SYMBOL = "E"


@dataclass(frozen=True)
class Signature:
    """Relation symbols with fixed arities (every arity >= 2)."""

    arities: tuple[tuple[str, int], ...]

    @staticmethod
    def make(arities: Mapping[str, int]) -> "Signature":
        for name, ar in arities.items():
            if ar < 2:
                raise UsageError(f"arity of {name!r} must be >= 2, got {ar}")
        return Signature(tuple(sorted(arities.items())))

    @cached_property
    def as_dict(self) -> dict[str, int]:
        return dict(self.arities)

    @property
    def is_graph(self) -> bool:
        """Single binary symbol: the adjacency-bitset fast path applies."""
        return len(self.arities) == 1 and self.arities[0][1] == 2

    @property
    def symbols(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.arities)


GRAPH_SIGNATURE = Signature.make({GRAPH_SYMBOL: 2})


@dataclass(frozen=True)
class Structure:
    signature: Signature
    elements: frozenset[int]
    instances: tuple[tuple[str, frozenset[frozenset[int]]], ...]

    @staticmethod
    def make(
        signature: Signature,
        elements: Iterable[int],
        instances: Mapping[str, Iterable[Iterable[int]]] | None = None,
    ) -> "Structure":
        elems = frozenset(int(e) for e in elements)
        inst: dict[str, frozenset[frozenset[int]]] = {}
        arities = signature.as_dict
        for name in signature.symbols:
            given = (instances or {}).get(name, ())
            rows = set()
            for row in given:
                fs = frozenset(int(e) for e in row)
                if len(fs) != arities[name]:
                    raise UsageError(
                        f"instance {sorted(fs)} of {name!r} must have "
                        f"{arities[name]} distinct elements"
                    )
                if not fs <= elems:
                    raise UnknownElement(f"instance {sorted(fs)} not within element set")
                rows.add(fs)
            inst[name] = frozenset(rows)
        unknown = set(instances or {}) - set(signature.symbols)
        if unknown:
            raise UsageError(f"instances for unknown symbols {sorted(unknown)}")
        return Structure(signature, elems, tuple((s, inst[s]) for s in signature.symbols))

    # -- basic views ------------------------------------------------------

    @cached_property
    def instance_map(self) -> dict[str, frozenset[frozenset[int]]]:
        return dict(self.instances)

    @cached_property
    def all_instances(self) -> tuple[frozenset[int], ...]:
        """Every instance of every symbol, with multiplicity across symbols."""
        out = []
        for _, rows in self.instances:
            out.extend(rows)
        return tuple(out)

    def __len__(self) -> int:
        return len(self.elements)

    @cached_property
    def sorted_elements(self) -> tuple[int, ...]:
        return tuple(sorted(self.elements))

    @cached_property
    def element_index(self) -> dict[int, int]:
        return {e: i for i, e in enumerate(self.sorted_elements)}

    @cached_property
    def instance_masks(self) -> tuple[int, ...]:
        """Instances as bitmasks over the sorted-element positions."""
        idx = self.element_index
        masks = []
        for inst in self.all_instances:
            m = 0
            for e in inst:
                m |= 1 << idx[e]
            masks.append(m)
        return tuple(masks)

    @cached_property
    def adjacency(self) -> dict[int, int]:
        """Adjacency bitmasks per element (positions in sorted order).

        Only meaningful for a single-binary-symbol signature; generic
        signatures get the union of instance co-membership, which the
        subset engines do not use.
        """
        idx = self.element_index
        adj = {e: 0 for e in self.elements}
        for inst in self.all_instances:
            for e in inst:
                for f in inst:
                    if f != e:
                        adj[e] |= 1 << idx[f]
        return adj

    def degree(self, e: int) -> int:
        return sum(1 for inst in self.all_instances if e in inst)

    def is_discrete(self) -> bool:
        return not self.all_instances

    # -- spec operations --------------------------------------------------

    def induced(self, subset: Iterable[int]) -> "Structure":
        """Substructure on ``subset`` with exactly the instances inside it."""
        sub = frozenset(subset)
        if not sub <= self.elements:
            raise UnknownElement(f"{sorted(sub - self.elements)} not in structure")
        inst = {
            name: [r for r in rows if r <= sub] for name, rows in self.instances
        }
        return Structure.make(self.signature, sub, inst)

    def relabel(self, mapping: Mapping[int, int]) -> "Structure":
        """Rename elements; ``mapping`` must be injective on the elements."""
        img = [mapping[e] for e in self.elements]
        if len(set(img)) != len(img):
            raise UsageError("relabel mapping is not injective")
        inst = {
            name: [[mapping[e] for e in r] for r in rows]
            for name, rows in self.instances
        }
        return Structure.make(self.signature, img, inst)

    def renumbered(self) -> tuple["Structure", dict[int, int]]:
        """Dense 0..n-1 ids in sorted order; returns (structure, old->new)."""
        mapping = {e: i for i, e in enumerate(self.sorted_elements)}
        return self.relabel(mapping), mapping


def graph(elements: Iterable[int], edges: Iterable[tuple[int, int]]) -> Structure:
    """Convenience constructor for the single-binary-symbol case."""
    return Structure.make(GRAPH_SIGNATURE, elements, {GRAPH_SYMBOL: [list(e) for e in edges]})


def discrete(n: int) -> Structure:
    return graph(range(n), [])


def free_amalgam(b: Structure, c: Structure, base: Iterable[int]) -> Structure:
    """Union of ``b`` and ``c`` over a shared base, adding no relations.

    Preconditions: the element overlap of the two structures is exactly
    ``base`` and both induce the same structure on it.
    """
    base_set = frozenset(base)
    if b.signature != c.signature:
        raise BaseMismatch("signatures differ")
    if (b.elements & c.elements) != base_set:
        raise OverlapViolation(
            f"element overlap {sorted(b.elements & c.elements)} != base {sorted(base_set)}"
        )
    if b.induced(base_set) != c.induced(base_set):
        raise BaseMismatch("induced structures on the base differ")
    inst = {
        name: list(b.instance_map[name] | c.instance_map[name])
        for name in b.signature.symbols
    }
    return Structure.make(b.signature, b.elements | c.elements, inst)


def glue(
    b: Structure, c: Structure, identify: Mapping[int, int]
) -> tuple[Structure, dict[int, int], dict[int, int]]:
    """Free amalgam of two structures with disjoint id spaces.

    ``identify`` maps elements of ``b`` to the elements of ``c`` they are
    merged with.  Fresh dense ids are assigned; the two remap tables
    (old id -> new id) are returned alongside the amalgam.
    """
    if len(set(identify.values())) != len(identify):
        raise UsageError("identification is not injective")
    remap_b: dict[int, int] = {}
    remap_c: dict[int, int] = {}
    nxt = 0
    for e in b.sorted_elements:
        remap_b[e] = nxt
        nxt += 1
    for e_b, e_c in identify.items():
        if e_b not in b.elements or e_c not in c.elements:
            raise UnknownElement("identified element missing from its structure")
        remap_c[e_c] = remap_b[e_b]
    for e in c.sorted_elements:
        if e not in remap_c:
            remap_c[e] = nxt
            nxt += 1
    b2 = b.relabel(remap_b)
    c2 = c.relabel(remap_c)
    base = frozenset(remap_b[e] for e in identify)
    return free_amalgam(b2, c2, base), remap_b, remap_c


def bouquet(
    block: Structure, base: Iterable[int], copies: int
) -> tuple[Structure, list[dict[int, int]]]:
    """Free amalgam of ``copies`` fresh copies of ``block`` over ``base``.

    The base keeps its ids from copy 0; returns the remap table per copy.
    """
    base_t = tuple(sorted(frozenset(base)))
    if copies < 1:
        raise UsageError("need at least one copy")
    first, remap0 = block.renumbered()
    remaps = [remap0]
    result = first
    for _ in range(copies - 1):
        ident = {e: remap0[e] for e in base_t}
        result, remap_new, remap_old = glue(block, result, ident)
        # glue renumbers everything; rebase previous remaps through remap_old
        remaps = [{k: remap_old[v] for k, v in r.items()} for r in remaps]
        remaps.append(remap_new)
        remap0 = {e: remaps[0][e] for e in block.elements}
    return result, remaps


# -- embeddings ------------------------------------------------------------


def _extends_instances(b: Structure, m: Structure, partial: dict[int, int]) -> bool:
    """Check instance preservation/reflection on the assigned part."""
    dom = set(partial)
    img = set(partial.values())
    inv = {v: k for k, v in partial.items()}
    for name, rows in b.instances:
        m_rows = m.instance_map[name]
        for r in rows:
            if r <= dom:
                if frozenset(partial[e] for e in r) not in m_rows:
                    return False
    for name, rows in m.instances:
        b_rows = b.instance_map[name]
        for r in rows:
            if r <= img:
                if frozenset(inv[e] for e in r) not in b_rows:
                    return False
    return True


def embeddings_over(
    b: Structure, base: Iterable[int], m: Structure, limit: int | None = None
) -> list[dict[int, int]]:
    """All induced-substructure embeddings of ``b`` into ``m`` fixing
    ``base`` pointwise, ordered lexicographically by image tuple."""
    base_set = frozenset(base)
    if not base_set <= b.elements:
        raise UnknownElement("base not within the pattern")
    if not base_set <= m.elements:
        raise UnknownElement("base not within the ambient structure")
    if b.signature != m.signature:
        raise UsageError("signatures differ")
    free = [e for e in b.sorted_elements if e not in base_set]
    start = {e: e for e in base_set}
    if not _extends_instances(b, m, start):
        return []
    results: list[dict[int, int]] = []

    def rec(i: int, partial: dict[int, int]) -> bool:
        if limit is not None and len(results) >= limit:
            return True
        if i == len(free):
            results.append(dict(partial))
            return False
        used = set(partial.values())
        for cand in m.sorted_elements:
            if cand in used:
                continue
            partial[free[i]] = cand
            if _extends_instances(b, m, partial) and rec(i + 1, partial):
                del partial[free[i]]
                return True
            del partial[free[i]]
        return False

    rec(0, start)
    return results


def isomorphic_over(s1: Structure, s2: Structure, fixed: Iterable[int]) -> bool:
    """True iff some bijection s1 -> s2 fixing ``fixed`` pointwise is an
    isomorphism of induced structures."""
    fixed_set = frozenset(fixed)
    if len(s1.elements) != len(s2.elements):
        return False
    if not (fixed_set <= s1.elements and fixed_set <= s2.elements):
        raise UnknownElement("fixed set not within both structures")
    embs = embeddings_over(s1, fixed_set, s2, limit=1)
    return bool(embs)


# -- serialization ---------------------------------------------------------

SCHEMA_VERSION = 1


def to_json_obj(s: Structure) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "signature": s.signature.as_dict,
        "elements": list(s.sorted_elements),
        "instances": {
            name: sorted(sorted(r) for r in rows) for name, rows in s.instances
        },
    }


def canonical_json(s: Structure) -> bytes:
    """Byte-stable canonical form: sorted ids, sorted instance lists."""
    return (json.dumps(to_json_obj(s), sort_keys=True, separators=(",", ":")) + "\n").encode()


def from_json_obj(obj: dict) -> Structure:
    try:
        sig = Signature.make({str(k): int(v) for k, v in obj["signature"].items()})
        return Structure.make(sig, obj["elements"], obj.get("instances", {}))
    except (KeyError, TypeError, AttributeError) as exc:
        raise UsageError(f"malformed structure JSON: {exc}") from exc


def loads(data: bytes | str) -> Structure:
    return from_json_obj(json.loads(data))


def to_dot(s: Structure) -> str:
    """DOT export; only binary signatures have an edge rendering."""
    if not s.signature.is_graph:
        raise UsageError("DOT export requires a single binary relation symbol")
    lines = ["graph predim {"]
    for e in s.sorted_elements:
        lines.append(f"  {e};")
    for inst in sorted(tuple(sorted(r)) for r in s.all_instances):
        lines.append(f"  {inst[0]} -- {inst[1]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
