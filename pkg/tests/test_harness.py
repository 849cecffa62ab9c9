import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaussbonnet.graph import GraphError, MetricAssignment, parse_graph
from gaussbonnet.harness import (
    EnumerationBudget, FamilySpec, ball_positivity, completeness_check, connected_subsets,
    convergence_study, cutoff_conditions_hold, cutoff_violations, edge_boundary, generate,
    homogeneity_constant, isoperimetric, parse_spec, random_subset_check, th_constant, truncate,
    truncation_sequence,
)

from conftest import graphs


def seq_for(kind, radius, N, **kw):
    t = truncate(FamilySpec(kind, radius, **kw))
    return t, truncation_sequence(t.graph, MetricAssignment.ctt(t.graph), t.base, N)


class TestFamilies:
    @pytest.mark.parametrize("kind, radius, nv, ne", [
        ("tree", 2, 10, 9),
        ("tree", 0, 1, 0),
        ("ray", 5, 6, 5),
        ("ladder", 3, 8, 10),
        ("grid2d", 1, 9, 12),
        ("grid2d", 2, 25, 40),
    ])
    def test_counts(self, kind, radius, nv, ne):
        g = generate(FamilySpec(kind, radius))
        assert (g.n_vertices, g.n_edges) == (nv, ne)
        assert g.is_connected()

    def test_tree_valence(self):
        t = truncate(FamilySpec("tree", 4, valence=4))
        for v in t.interior:
            assert len(t.graph.neighbors(v)) == 4
        assert all(t.height[v] == 4 for v in t.rim)

    def test_weight_ratios(self):
        g = generate(FamilySpec("ray", 3, c=2.0, c_ratio=0.5, r_ratio=3.0))
        assert g.weight("2") == 0.5
        assert g.resistance("1", "2") == 9.0

    def test_core_plus_trees(self, tmp_path):
        core = tmp_path / "core.txt"
        core.write_text("v x 1\nv y 1\nv z 1\ne x y 1\ne y z 1\ne x z 1\n")
        t = truncate(FamilySpec("core-plus-trees", 3, core=str(core), attach=("x", "z")))
        g = t.graph
        assert g.has_edge("x", "x/t") and "y/t" not in g
        # each attached tree: root plus p + p^2 descendants
        assert g.n_vertices == 3 + 2 * (1 + 2 + 4)
        assert t.core == {"x", "y", "z"} and not (t.rim & t.core)

    def test_bad_specs(self, tmp_path):
        with pytest.raises(GraphError):
            FamilySpec("torus", 3)
        with pytest.raises(GraphError):
            FamilySpec("ray", -1)
        with pytest.raises(GraphError):
            FamilySpec("core-plus-trees", 2)

    def test_parse_spec(self):
        spec = parse_spec("# family\nkind = tree\nradius 3\nc-ratio = 2\n", radius=5)
        assert spec == FamilySpec("tree", 5, c_ratio=2.0)
        assert parse_spec("kind regular-tree\nradius 2\n").kind == "tree"
        with pytest.raises(GraphError, match="unknown spec key"):
            parse_spec("kind tree\nradius 2\ncolour red\n")


class TestTruncationSequence:
    @pytest.mark.parametrize("kind", ["tree", "ray", "ladder", "grid2d"])
    def test_conditions_and_bound(self, kind):
        t, seq = seq_for(kind, 6, 5)
        assert cutoff_conditions_hold(seq)
        assert cutoff_violations(seq) == 0
        for n in range(seq.N + 1):
            assert seq.balls[n] <= seq.balls[n + 1]

    def test_weighted_bound(self):
        # heavy vertices shrink a, so the min(1, a) cap is active
        t, seq = seq_for("ray", 6, 4, c=0.25, r=4.0)
        assert np.all(seq.metric.a < 1)
        assert cutoff_violations(seq) == 0
        assert th_constant(seq) <= 1.0 + 1e-12

    def test_ray_homogeneity(self):
        _, seq = seq_for("ray", 8, 6)
        h = homogeneity_constant(seq)
        assert h.both_roles == 2.0 and h.once == 1.0

    def test_tree_homogeneity_bounded_by_valence(self):
        t, seq = seq_for("tree", 6, 4)
        h = homogeneity_constant(seq, exclude=t.rim)
        assert h.once <= t.spec.valence

    def test_completeness(self):
        _, seq = seq_for("ray", 10, 8)
        for p in range(0, 4):
            n0 = completeness_check(seq, p)
            assert n0 is not None and n0 <= p + 2

    def test_completeness_window_too_short(self):
        _, seq = seq_for("ray", 10, 2)
        assert completeness_check(seq, 3) is None

    def test_unknown_base(self, path3):
        with pytest.raises(GraphError):
            truncation_sequence(path3, MetricAssignment.ctt(path3), "zz", 2)

    @settings(max_examples=30, deadline=None)
    @given(graphs(max_vertices=15), st.sampled_from(["ctt", "th"]), st.floats(1.0, 3.0))
    def test_bound_on_random_graphs(self, gr, rule, step):
        g, _ = gr
        seq = truncation_sequence(g, MetricAssignment.from_name(g, rule), g.vertices[0], 3, step=step)
        assert cutoff_conditions_hold(seq)
        assert cutoff_violations(seq) == 0


def brute_connected_subsets(g, max_size, allowed=None):
    pool = list(g.vertices if allowed is None else allowed)
    out = set()
    for k in range(1, max_size + 1):
        for W in itertools.combinations(pool, k):
            if g.subgraph(W).is_connected():
                out.add(frozenset(W))
    return out


class TestIsoperimetric:
    @settings(max_examples=30, deadline=None)
    @given(graphs(max_vertices=9), st.integers(1, 5))
    def test_enumeration_matches_brute_force(self, gr, k):
        g, _ = gr
        found = [frozenset(g.vertices[x] for x in W) for W in connected_subsets(g, k)]
        assert len(found) == len(set(found))
        assert set(found) == brute_connected_subsets(g, k)

    def test_singleton_on_tree(self):
        t = truncate(FamilySpec("tree", 5))
        res = isoperimetric(t.graph, 1, allowed=t.interior)
        assert res.value == 3.0

    def test_tree_bound_mode(self):
        t = truncate(FamilySpec("tree", 5))
        res = isoperimetric(t.graph, 6, mode="tree-bound", allowed=t.interior, heights=t.height, valence=3)
        assert res.value == 1.0
        assert min(v[0] for v in res.per_size.values()) >= 1.0

    def test_tree_bound_rejects_rim(self):
        t = truncate(FamilySpec("tree", 3))
        with pytest.raises(ValueError, match="full valence"):
            isoperimetric(t.graph, 2, mode="tree-bound", heights=t.height, valence=3)

    def test_ladder_decays(self):
        t = truncate(FamilySpec("ladder", 8))
        vals = [isoperimetric(t.graph, k, allowed=t.interior).value for k in (2, 4, 6)]
        assert vals == sorted(vals, reverse=True) and vals[-1] < 1

    def test_budget(self):
        g = generate(FamilySpec("grid2d", 3))
        with pytest.raises(EnumerationBudget):
            isoperimetric(g, 6, budget=100)

    def test_edge_boundary(self, square):
        assert edge_boundary(square, ["a"]) == 2
        assert edge_boundary(square, ["a", "c"]) == 4
        assert edge_boundary(square, square.vertices) == 0

    def test_random_subsets(self):
        t = truncate(FamilySpec("tree", 4))
        assert random_subset_check(t.graph, 6, 200, np.random.default_rng(0), t.interior)


class TestPositivityAndConvergence:
    def test_tree_ball_positive(self):
        est = ball_positivity(truncate(FamilySpec("tree", 4)))
        assert est.d > 0.1

    def test_rim_matters(self):
        t = truncate(FamilySpec("ray", 5))
        assert ball_positivity(t, interior_only=False).d <= ball_positivity(t).d

    def test_convergence_zero_problem(self):
        rows = convergence_study(FamilySpec("tree", 3), {}, {}, [2, 3, 4])
        assert [r.radius for r in rows] == [2, 3, 4]
        assert rows[0].difference is None
        assert all(r.difference == 0.0 for r in rows[1:])

    def test_convergence_dipole(self):
        rows = convergence_study(FamilySpec("tree", 3), {"t.0": 1.0, "t.1": -1.0}, {}, [2, 3, 4])
        assert all(r.residual_current <= 1e-9 for r in rows)
        # on a tree the dipole current stays on the path between the poles
        assert all(r.difference <= 1e-12 for r in rows[1:])


def test_unknown_core_file(tmp_path):
    with pytest.raises(GraphError, match="core"):
        generate(FamilySpec("core-plus-trees", 2, core=str(tmp_path / "missing.txt")))


def test_core_must_be_connected(tmp_path):
    core = tmp_path / "core.txt"
    core.write_text("v x 1\nv y 1\n")
    with pytest.raises(GraphError, match="connected"):
        generate(FamilySpec("core-plus-trees", 2, core=str(core)))


def test_parse_graph_helper_used_by_fixtures():
    assert parse_graph("v a 1\n").n_vertices == 1
