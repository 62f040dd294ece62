from fractions import Fraction

import pytest

from predim.closure import chi
from predim.dimension import Alpha, is_in_class, is_strong
from predim.errors import UsageError
from predim.generic import audit_extension, audit_finite_closures, build, catalog
from predim.structures import canonical_json, graph

A58 = Alpha.rational(Fraction(5, 8))


class TestCatalog:
    def test_pairs_are_strong_and_in_class(self):
        pairs = catalog(A58, max_ext=3)
        assert pairs
        for p in pairs:
            assert is_in_class(p.ext, A58)[0]
            assert is_strong(p.base, p.ext, A58)
            assert len(p.base) < len(p.ext.elements)

    def test_no_triangle_over_edge(self):
        # completing an edge to a triangle is not a strong extension at 5/8
        pairs = catalog(A58, max_ext=3)
        for p in pairs:
            if len(p.base) == 2 and len(p.ext.elements) == 3:
                base_inst = p.ext.induced(p.base).all_instances
                if base_inst and len(p.ext.all_instances) == 3:
                    pytest.fail("edge-to-triangle pair should be excluded")

    def test_iso_dedupe(self):
        pairs = catalog(A58, max_ext=2)
        keys = {(len(p.ext.elements), len(p.base), len(p.ext.all_instances),
                 len(p.ext.induced(p.base).all_instances)) for p in pairs}
        assert len(keys) == len(pairs)


class TestBuild:
    def test_zero_budget(self):
        g = build(A58, steps=0, max_ext=2, seed=1)
        assert len(g.structure.elements) == 0

    def test_budget_counts_discharges(self):
        g = build(A58, steps=25, max_ext=3, seed=1)
        assert len(g.completed()) == 25

    def test_stays_in_class(self):
        g = build(A58, steps=60, max_ext=3, seed=2)
        assert is_in_class(g.structure, A58)[0]

    def test_isolated_strong_point_appears(self):
        g = build(A58, steps=10, max_ext=1, seed=0)
        assert len(g.structure.elements) >= 1
        some = min(g.structure.elements)
        assert is_strong({some}, g.structure, A58, assume_hereditary=True)

    def test_deterministic(self):
        g1 = build(A58, steps=40, max_ext=3, seed=9)
        g2 = build(A58, steps=40, max_ext=3, seed=9)
        assert canonical_json(g1.structure) == canonical_json(g2.structure)
        assert [t.image for t in g1.tasks[:50]] == [t.image for t in g2.tasks[:50]]

    def test_rejects_bad_max_ext(self):
        with pytest.raises(UsageError):
            build(A58, steps=1, max_ext=0, seed=0)


class TestAudits:
    def test_extension_audit_on_completed(self):
        g = build(A58, steps=80, max_ext=3, seed=3)
        rep = audit_extension(g)
        assert rep["all_completed_satisfied"], rep["failures"][:3]
        assert rep["completed"] == 80

    def test_unscheduled_sampling_reports_rates(self):
        g = build(A58, steps=40, max_ext=3, seed=4)
        rep = audit_extension(g, sample_unscheduled=20, seed=5)
        assert rep["sampled"] <= 20
        assert 0 <= rep["sampled_satisfied"] <= rep["sampled"]

    def test_closure_audit(self):
        g = build(A58, steps=60, max_ext=3, seed=6)
        rep = audit_finite_closures(g, samples=12, seed=8)
        assert rep["stage_chain_strong"]
        assert rep["closures_ok"], rep["samples"]

    def test_copy_counts_recorded_for_intrinsic_pair(self):
        # observation only: the number of wedge copies over an intrinsic
        # pair stays finite and small at this scale
        g = build(A58, steps=60, max_ext=3, seed=6)
        m = g.structure
        pat = graph([0, 1, 2], [(2, 0), (2, 1)])
        pairs = [t.image for t in g.completed() if len(t.image) == 2][:5]
        観察 = []
        for img in pairs:
            pattern = pat.relabel({0: img[0], 1: img[1], 2: 999_999})
            観察.append(chi(m, pattern, set(img)))
        assert all(c <= 8 for c in 観察)
