import warnings

import numpy as np
import pytest

from sprawl.ambit import Ambit, LinearMap, table1_region
from sprawl.comparison import (
    AmbitQuery,
    Ball,
    EuclideanSpace,
    ExplicitSetQuery,
    ProjectionSpace,
    Workload,
)
from sprawl.engine import (
    EMPTY,
    UNIVERSE,
    Edge,
    ExplicitRegion,
    ResponsibilityAssignment,
    ShellGroup,
    Sprawl,
    brute_force_sprawl,
    build_classic,
    build_dnf_gadget,
    check_correct_small,
    check_responsibility,
    emulate_from_traces,
    is_tautology,
    linear_scan,
    member_node,
    parse_dnf,
    random_small_sprawl,
    reduce_to_signed,
    search,
    sprawl_trace_oracle,
)
from sprawl.errors import EmulationError, SizeLimitError, StructureError
from sprawl.hypergraph import Heuristic, enumerate_repertoire


def toy_space(n=6, dims=2, seed=0):
    return EuclideanSpace(np.random.default_rng(seed).random((n, dims)))


# --- reduction ------------------------------------------------------------------


def test_reduce_universe_edge_positive():
    space = toy_space()
    s = Sprawl(space, range(3), [Edge((), 0), Edge((0,), 1, (UNIVERSE,), ())])
    g = reduce_to_signed(s, Ball((0.5, 0.5), 0.1))
    assert any(e.sign > 0 and e.target == 1 for e in g.edges)


def test_reduce_unconditional_negative():
    space = toy_space()
    s = Sprawl(space, range(2), [Edge((), 0), Edge((0,), 1, (), (EMPTY,))])
    for q in (Ball((0.5, 0.5), 10.0), ExplicitSetQuery(frozenset({0, 1}))):
        g = reduce_to_signed(s, q)
        assert any(e.sign < 0 and e.target == 1 for e in g.edges)


def test_reduce_multi_region_labels():
    # the general form: discovery needs *every* positive region hit,
    # elimination fires as soon as *some* negative region is missed
    space = EuclideanSpace([[0.0, 0.0], [4.0, 0.0], [2.0, 0.0]])
    ball_a = Ambit((0,), LinearMap([[1.0]]), (1.0,))
    ball_b = Ambit((0,), LinearMap([[1.0]]), (3.0,))
    s = Sprawl(space, range(3), [Edge((), 0), Edge((0,), 2, (ball_a, ball_b), ())])
    hits_both = Ball((0.5, 0.0), 0.6)
    hits_one = Ball((2.0, 0.0), 0.2)  # meets ball_b only
    assert any(e.sign > 0 and e.target == 2 for e in reduce_to_signed(s, hits_both).edges)
    assert not any(e.target == 2 for e in reduce_to_signed(s, hits_one).edges)

    neg = Sprawl(space, range(3), [Edge((), 0), Edge((0,), 2, (EMPTY,), (ball_a, ball_b))])
    assert any(e.sign < 0 for e in reduce_to_signed(neg, hits_one).edges)
    assert not any(e.sign < 0 for e in reduce_to_signed(neg, hits_both).edges)


def test_reduce_shell_protects_target():
    # pivot-filter edge: target at distance z from source; ball with
    # s >= |z - r| must not turn the edge negative
    space = EuclideanSpace([[0.0, 0.0], [3.0, 0.0]])
    shell = table1_region("sphere", (0,), r=3.0)
    s = Sprawl(space, range(2), [Edge((), 0), Edge((), 1), Edge((0,), 1, (EMPTY,), (shell,))])
    near = Ball((5.0, 0.0), 2.1)  # z = 5, |z - r| = 2
    far = Ball((5.0, 0.0), 1.9)
    g_near = reduce_to_signed(s, near)
    g_far = reduce_to_signed(s, far)
    assert not any(e.sign < 0 for e in g_near.edges)
    assert any(e.sign < 0 and e.target == 1 for e in g_far.edges)


# --- basic search ------------------------------------------------------------------


def test_brute_force_exact_and_counts(rng):
    space = EuclideanSpace(rng.random((50, 3)))
    s = brute_force_sprawl(space, range(50))
    q = Ball(tuple(rng.random(3)), 0.4)
    got = search(s, q)
    assert got.members == tuple(sorted(linear_scan(space, range(50), q)))
    assert got.distance_computations == 50
    assert got.traversed == 50


def test_explicit_set_query():
    space = toy_space(5)
    s = brute_force_sprawl(space, range(5))
    got = search(s, ExplicitSetQuery(frozenset({1, 3})))
    assert got.members == (1, 3)


def test_ambit_query_membership(rng):
    space = EuclideanSpace(rng.random((30, 2)))
    s = brute_force_sprawl(space, range(30))
    q = AmbitQuery((0, 1), (0.6, 0.4), 0.5)
    got = search(s, q)
    want = linear_scan(space, range(30), q)
    assert got.members == tuple(sorted(want))


def test_radius_zero_returns_duplicates():
    space = EuclideanSpace([[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])
    s = brute_force_sprawl(space, range(3))
    got = search(s, Ball((0.0, 0.0), 0.0))
    assert got.members == (0, 2)


# --- classic builders ----------------------------------------------------------------


@pytest.mark.parametrize("kind,params", [
    ("ball-tree", {}),
    ("aesa", {}),
    ("laesa", {"pivots": 4}),
    ("pm-tree", {"pivots": 3}),
])
def test_builders_exact_on_ball_queries(rng, kind, params):
    space = EuclideanSpace(rng.random((120, 4)))
    sprawl, res = build_classic(space, range(120), kind, **params)
    for _ in range(25):
        center = rng.random(4)
        radius = float(rng.random() * 0.4)
        q = Ball(center, radius)
        got = search(sprawl, q)
        assert set(got.members) == set(linear_scan(space, range(120), q))


def test_ball_tree_prunes(rng):
    space = EuclideanSpace(rng.random((300, 2)))
    sprawl, _ = build_classic(space, range(300), "ball-tree")
    q = Ball((0.1, 0.1), 0.05)
    got = search(sprawl, q)
    assert set(got.members) == set(linear_scan(space, range(300), q))
    assert got.distance_computations < 300


def test_aesa_three_points_has_six_shell_edges(rng):
    space = EuclideanSpace(rng.random((3, 2)))
    sprawl, res = build_classic(space, range(3), "aesa")
    logical = list(sprawl.iter_logical_edges())
    shell_edges = [e for _, e in logical if e.negative]
    assert len(shell_edges) == 6  # complete directed graph
    for e in shell_edges:
        assert e.positive == (EMPTY,)
        d = space.compare(e.sources[0], e.target)
        region = e.negative[0]
        assert region.radii == (d, -d)


def test_aesa_filters_hard(rng):
    space = EuclideanSpace(rng.random((200, 2)))
    sprawl, _ = build_classic(space, range(200), "aesa")
    q = Ball((0.5, 0.5), 0.05)
    got = search(sprawl, q)
    assert set(got.members) == set(linear_scan(space, range(200), q))
    assert got.distance_computations < 100


def test_laesa_structure(rng):
    space = EuclideanSpace(rng.random((40, 2)))
    sprawl, _ = build_classic(space, range(40), "laesa", pivots=5)
    assert len(sprawl.roots) == 40  # everyone unconditionally discovered
    assert len(sprawl.groups) == 5
    assert all(not g.lazy for g in sprawl.groups)
    assert all(len(g) == 35 for g in sprawl.groups)


def test_pm_tree_lazy_groups(rng):
    space = EuclideanSpace(rng.random((60, 2)))
    sprawl, _ = build_classic(space, range(60), "pm-tree", pivots=4)
    assert len(sprawl.groups) == 4
    assert all(g.lazy for g in sprawl.groups)


def test_sorted_interval_tree_on_1_to_7():
    space = ProjectionSpace([[float(v)] for v in range(1, 8)])
    sprawl, res = build_classic(space, range(7), "sorted-interval-tree")
    assert sprawl.roots == (3,)  # the median key 4 sits at ref 3
    axis = space.axis_ref(0)
    for i, e in enumerate(sprawl.edges):
        if e.is_root_edge:
            continue
        assert 1 <= len(e.sources) <= 2
        region = e.positive[0]
        assert region.foci == (axis,)
        # interval delimited by the source keys
        values = sorted(float(space.points[s, 0]) for s in e.sources)
        for v in res.get(i):
            assert values[0] - 1e-9 <= space.points[v, 0] <= values[-1] + 1e-9 or len(e.sources) == 1
    for center in (0.2, 3.0, 4.5, 7.9):
        q = Ball((center,), 1.3)
        got = search(sprawl, q)
        assert set(got.members) == set(linear_scan(space, range(7), q))


def test_sorted_interval_tree_requires_projection(rng):
    with pytest.raises(ValueError):
        build_classic(toy_space(), range(6), "sorted-interval-tree")


def test_builder_validates():
    with pytest.raises(ValueError):
        build_classic(toy_space(), [], "ball-tree")
    with pytest.raises(ValueError):
        build_classic(toy_space(4), range(4), "laesa", pivots=9)
    with pytest.raises(ValueError):
        build_classic(toy_space(4), range(4), "nonsense")


# --- kNN -------------------------------------------------------------------------------


def test_knn_k1_true_nearest(rng):
    space = EuclideanSpace(rng.random((150, 3)))
    for kind in ("ball-tree", "aesa"):
        sprawl, _ = build_classic(space, range(150), kind)
        for _ in range(10):
            center = rng.random(3)
            got = search(sprawl, Ball(center, 0.0, k=1))
            want = linear_scan(space, range(150), Ball(center, 0.0, k=1))
            assert got.members == want


def test_knn_k10_matches_scan(rng):
    space = EuclideanSpace(rng.random((200, 4)))
    sprawl, _ = build_classic(space, range(200), "ball-tree")
    for _ in range(10):
        center = rng.random(4)
        got = search(sprawl, Ball(center, 0.0, k=10))
        want = linear_scan(space, range(200), Ball(center, 0.0, k=10))
        assert got.members == want


def test_knn_ties_break_by_node_id():
    pts = [[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [5.0, 5.0]]
    space = EuclideanSpace(pts)
    sprawl, _ = build_classic(space, range(5), "ball-tree")
    got = search(sprawl, Ball((0.0, 0.0), 0.0, k=3))
    assert got.members == (0, 1, 2)


def test_knn_k_larger_than_dataset(rng):
    space = toy_space(4)
    sprawl, _ = build_classic(space, range(4), "ball-tree")
    got = search(sprawl, Ball((0.0, 0.0), 0.0, k=10))
    assert len(got.members) == 4


def test_knn_on_lazy_and_pivot_indexes(rng):
    space = EuclideanSpace(rng.random((120, 3)))
    for kind, params in (("pm-tree", {"pivots": 4}), ("laesa", {"pivots": 4})):
        sprawl, _ = build_classic(space, range(120), kind, **params)
        for _ in range(8):
            center = rng.random(3)
            k = int(rng.integers(1, 9))
            got = search(sprawl, Ball(center, 0.0, k=k))
            assert got.members == linear_scan(space, range(120), Ball(center, 0.0, k=k))


def test_knn_on_interval_tree(rng):
    values = np.sort(rng.random(60) * 5.0).reshape(-1, 1)
    space = ProjectionSpace(values)
    sprawl, _ = build_classic(space, range(60), "sorted-interval-tree")
    for _ in range(10):
        q = Ball((float(rng.random() * 6.0),), 0.0, k=int(rng.integers(1, 6)))
        assert search(sprawl, q).members == linear_scan(space, range(60), q)


def test_exactness_invariant_under_heuristic(rng):
    space = EuclideanSpace(rng.random((80, 2)))
    sprawl, _ = build_classic(space, range(80), "pm-tree", pivots=3)
    q = Ball(tuple(rng.random(2)), 0.25)
    want = set(linear_scan(space, range(80), q))
    for h in (Heuristic.fifo(), Heuristic.lifo(), Heuristic.priority(lambda v: (v * 7919) % 101)):
        assert set(search(sprawl, q, heuristic=h).members) == want


def test_ball_center_as_point_ref(rng):
    space = EuclideanSpace(rng.random((20, 2)))
    s = brute_force_sprawl(space, range(20))
    got = search(s, Ball(5, 0.3))
    want = linear_scan(space, range(20), Ball(tuple(space.points[5]), 0.3))
    assert got.members == tuple(sorted(want))


def test_string_index_end_to_end(rng):
    from sprawl.comparison import StringSpace

    alphabet = list("abcd")
    words = ["".join(rng.choice(alphabet, size=rng.integers(1, 8))) for _ in range(50)]
    space = StringSpace(words)
    for kind in ("ball-tree", "laesa"):
        sprawl, _ = build_classic(space, range(50), kind, pivots=4)
        for _ in range(10):
            center = words[int(rng.integers(0, 50))]
            q = Ball(center, float(rng.integers(0, 4)))
            got = search(sprawl, q)
            assert set(got.members) == set(linear_scan(space, range(50), q))


# --- lazy vs eager ----------------------------------------------------------------------


def _eager_clone(sprawl: Sprawl) -> Sprawl:
    edges = [
        Edge(e.sources, e.target, e.positive, e.negative, lazy=False) for e in sprawl.edges
    ]
    groups = [ShellGroup(g.source, g.targets, g.lo, g.hi, lazy=False) for g in sprawl.groups]
    return Sprawl(sprawl.space, sprawl.nodes, edges, groups)


def test_lazy_matches_eager_and_saves_evaluations(rng):
    space = EuclideanSpace(rng.random((150, 3)))
    lazy_sprawl, _ = build_classic(space, range(150), "pm-tree", pivots=4)
    eager_sprawl = _eager_clone(lazy_sprawl)
    total_lazy = total_eager = 0
    for _ in range(20):
        q = Ball(tuple(rng.random(3)), float(rng.random() * 0.3))
        a = search(lazy_sprawl, q)
        b = search(eager_sprawl, q)
        assert a.members == b.members
        total_lazy += a.region_evaluations
        total_eager += b.region_evaluations
    assert total_lazy <= total_eager


# --- DNF gadget -------------------------------------------------------------------------


def test_parse_dnf():
    formula, names = parse_dnf("(x&y)|(!x)|(!y&x)")
    assert names == ("x", "y")
    assert len(formula) == 3
    assert is_tautology(formula, 2)


def test_dnf_tautology_gadget_correct():
    formula, names = parse_dnf("x|!x")
    sprawl, workload = build_dnf_gadget(formula)
    assert check_correct_small(sprawl, workload).correct


def test_dnf_single_clause_incorrect():
    formula, names = parse_dnf("x&y")
    sprawl, workload = build_dnf_gadget(formula)
    report = check_correct_small(sprawl, workload)
    assert not report.correct
    qi, traversal, missing = report.certificate
    assert missing == (sprawl.nodes[-1],)


def test_dnf_verdicts_match_truth_table_small(rng):
    lits = [(v, pol) for v in range(2) for pol in (True, False)]
    for _ in range(40):
        clause_count = int(rng.integers(1, 4))
        formula = []
        for _ in range(clause_count):
            size = int(rng.integers(1, 4))
            picks = rng.choice(len(lits), size=size, replace=False)
            formula.append(frozenset(lits[int(i)] for i in picks))
        formula = tuple(formula)
        sprawl, workload = build_dnf_gadget(formula)
        assert check_correct_small(sprawl, workload).correct == is_tautology(formula, 2)


def test_gadget_cap():
    formula, _ = parse_dnf("a|b|c|d|e")
    with pytest.raises(SizeLimitError):
        build_dnf_gadget(formula, cap=8)


# --- correctness checker ------------------------------------------------------------------


def test_correct_small_eliminated_root_certificate():
    space = toy_space(2)
    s = Sprawl(space, range(2), [Edge((), 0), Edge((), 0, (), (EMPTY,)), Edge((), 1)])
    workload = Workload((ExplicitSetQuery(frozenset({0})),))
    report = check_correct_small(s, workload)
    assert not report.correct
    _, traversal, missing = report.certificate
    assert missing == (0,)
    assert 0 not in traversal


def test_correct_small_cap():
    space = toy_space(9, seed=2)
    s = brute_force_sprawl(space, range(9))
    with pytest.raises(SizeLimitError):
        check_correct_small(s, Workload((ExplicitSetQuery(frozenset({0})),)), cap=8)


def test_monotonicity_on_random_sprawls(rng):
    for _ in range(15):
        sprawl = random_small_sprawl(rng)
        center = tuple(rng.random(2))
        r1 = float(rng.random() * 0.5)
        r2 = r1 + float(rng.random())
        small = enumerate_repertoire(reduce_to_signed(sprawl, Ball(center, r1)))
        big = enumerate_repertoire(reduce_to_signed(sprawl, Ball(center, r2)))
        assert small <= big


# --- responsibility --------------------------------------------------------------------------


def _atomistic_workload(sprawl, extra=()):
    singles = tuple(ExplicitSetQuery(frozenset({v})) for v in sprawl.nodes)
    return Workload(singles + tuple(extra), atomistic=True)


def test_ball_tree_responsibility_passes(rng):
    space = EuclideanSpace(rng.random((40, 3)))
    sprawl, res = build_classic(space, range(40), "ball-tree")
    report = check_responsibility(sprawl, res, _atomistic_workload(sprawl))
    assert report.passed, report.violations[:3]


def test_shrunk_radius_fails_l1(rng):
    space = EuclideanSpace(rng.random((20, 2)))
    sprawl, res = build_classic(space, range(20), "ball-tree")
    edges = list(sprawl.edges)
    idx = next(i for i, e in enumerate(edges) if e.positive and isinstance(e.positive[0], Ambit)
               and res.get(i) and max(
        space.compare(e.positive[0].foci[0], v) for v in res.get(i)) > 0.01)
    bad_region = Ambit(
        edges[idx].positive[0].foci,
        edges[idx].positive[0].map,
        (edges[idx].positive[0].radii[0] * 0.25 - 1e-6,),
    )
    edges[idx] = Edge(edges[idx].sources, edges[idx].target, (bad_region,), ())
    broken = Sprawl(space, sprawl.nodes, edges)
    report = check_responsibility(broken, res, _atomistic_workload(broken))
    assert not report.passed
    assert any(rule == "L1" and e == idx for rule, e, _, _ in report.violations)


def test_enlarged_regions_still_pass(rng):
    space = EuclideanSpace(rng.random((25, 2)))
    sprawl, res = build_classic(space, range(25), "ball-tree")
    edges = []
    for e in sprawl.edges:
        if e.positive and isinstance(e.positive[0], Ambit):
            reg = e.positive[0]
            bigger = Ambit(reg.foci, reg.map, tuple(r + 1.0 for r in reg.radii))
            edges.append(Edge(e.sources, e.target, (bigger,), e.negative))
        else:
            edges.append(e)
    grown = Sprawl(space, sprawl.nodes, edges)
    report = check_responsibility(grown, res, _atomistic_workload(grown))
    assert report.passed


def test_aesa_and_pm_responsibility(rng):
    space = EuclideanSpace(rng.random((25, 2)))
    for kind, params in (("aesa", {}), ("pm-tree", {"pivots": 3}), ("laesa", {"pivots": 4})):
        sprawl, res = build_classic(space, range(25), kind, **params)
        report = check_responsibility(sprawl, res, _atomistic_workload(sprawl))
        assert report.passed, (kind, report.violations[:3])


def test_cyclic_sprawl_rejected():
    space = toy_space(2)
    ball0 = Ambit((0,), LinearMap([[1.0]]), (2.0,))
    ball1 = Ambit((1,), LinearMap([[1.0]]), (2.0,))
    s = Sprawl(space, range(2), [Edge((0,), 1, (ball0,), ()), Edge((1,), 0, (ball1,), ())])
    with pytest.raises(StructureError):
        check_responsibility(s, ResponsibilityAssignment({}), _atomistic_workload(s))


def test_untargeted_node_rejected():
    space = toy_space(2)
    s = Sprawl(space, range(2), [Edge((), 0)])
    with pytest.raises(StructureError):
        check_responsibility(s, ResponsibilityAssignment({}), _atomistic_workload(s))


def test_non_atomistic_workload_rejected():
    space = toy_space(2)
    s = brute_force_sprawl(space, range(2))
    with pytest.raises(ValueError):
        check_responsibility(s, ResponsibilityAssignment({}), Workload((), atomistic=False))


def test_responsibility_implies_correct(rng):
    for i in range(10):
        space = EuclideanSpace(rng.random((6, 2)))
        kind = ("ball-tree", "aesa", "pm-tree")[i % 3]
        params = {"pivots": 2} if kind == "pm-tree" else {}
        sprawl, res = build_classic(space, range(6), kind, **params)
        workload = _atomistic_workload(
            sprawl, extra=[Ball(tuple(rng.random(2)), float(rng.random() * 0.8))]
        )
        assert check_responsibility(sprawl, res, workload).passed
        assert check_correct_small(sprawl, workload).correct


# --- emulation ---------------------------------------------------------------------------------


def test_emulate_flat_oracle_gives_roots():
    space = toy_space(4)

    def oracle(traversed, v):
        return {0, 1, 2, 3}, set()  # root edges stay ready for every set

    got = emulate_from_traces(space, range(4), oracle)
    assert sorted(got.roots) == [0, 1, 2, 3]
    assert all(e.is_root_edge for e in got.edges)


@pytest.mark.parametrize("kind,params", [
    ("ball-tree", {}),
    ("aesa", {}),
    ("laesa", {"pivots": 3}),
    ("pm-tree", {"pivots": 3}),
])
def test_emulate_round_trip_per_kind(rng, kind, params):
    space = EuclideanSpace(rng.random((14, 2)))
    original, _ = build_classic(space, range(14), kind, **params)
    emulated = emulate_from_traces(space, range(14), sprawl_trace_oracle(original))
    for v in range(14):
        q = Ball(tuple(space.points[v]), 0.0)
        assert search(emulated, q).members == search(original, q).members


def test_emulate_aesa_three_points(rng):
    space = EuclideanSpace(rng.random((3, 2)))
    original, _ = build_classic(space, range(3), "aesa")
    emulated = emulate_from_traces(space, range(3), sprawl_trace_oracle(original))
    neg = [e for e in emulated.edges if e.negative and not e.is_root_edge]
    assert len(neg) == 6
    for e in neg:
        region = e.negative[0]
        assert isinstance(region, Ambit)
        # shell grown around the source, containing the target
        d = space.compare(e.sources[0], e.target)
        rem = region.map.remoteness(np.array([d]))
        assert np.all(rem <= np.asarray(region.radii) + 1e-12)


def test_emulate_interval_tree_round_trip():
    space = ProjectionSpace([[float(v)] for v in range(1, 8)])
    original, _ = build_classic(space, range(7), "sorted-interval-tree")
    emulated = emulate_from_traces(space, range(7), sprawl_trace_oracle(original))
    for v in range(7):
        q = Ball((float(v + 1),), 0.0)
        assert search(emulated, q).members == search(original, q).members


def test_emulate_detects_non_monotone_oracle():
    space = toy_space(3)

    def oracle(traversed, v):
        t = set(traversed)
        if not t:
            return {0, 1, 2}, set()
        if t == {0}:
            return {1}, set()
        return (set(), set())  # discovery vanished for supersets of {0}

    with pytest.raises(EmulationError):
        emulate_from_traces(space, range(3), oracle)


# --- heuristics --------------------------------------------------------------------------------


def test_search_explicit_order_stops_early(rng):
    space = toy_space(5)
    s = brute_force_sprawl(space, range(5))
    got = search(s, Ball((0.5, 0.5), 2.0), heuristic=Heuristic.explicit([2, 0]))
    assert got.order == (2, 0)


def test_search_matches_reduction_repertoire(rng):
    for _ in range(10):
        sprawl = random_small_sprawl(rng)
        q = Ball(tuple(rng.random(2)), float(rng.random()))
        rep = enumerate_repertoire(reduce_to_signed(sprawl, q))
        got = search(sprawl, q)
        local = tuple(sprawl.nodes.index(v) for v in got.order)
        assert local in rep


def test_group_member_edge_view(rng):
    space = EuclideanSpace(rng.random((5, 2)))
    sprawl, _ = build_classic(space, range(5), "aesa")
    idx, edge = next(
        (i, e) for i, e in sprawl.iter_logical_edges() if not e.is_root_edge
    )
    assert sprawl.logical_edge(idx) == edge
    assert edge.positive == (EMPTY,)
    assert len(edge.negative) == 1


def test_validate_foci_must_be_sources():
    space = toy_space(3)
    stray = Ambit((2,), LinearMap([[1.0]]), (1.0,))
    with pytest.raises(ValueError):
        Sprawl(space, range(3), [Edge((0,), 1, (stray,), ())])


def test_lazy_edge_validation():
    with pytest.raises(ValueError):
        Edge((0,), 1, (UNIVERSE,), (EMPTY,), lazy=True)
    with pytest.raises(ValueError):
        Edge((0,), 1, (), (), lazy=True)


def test_member_node_ball():
    space = EuclideanSpace([[0.0, 0.0], [3.0, 4.0]])
    assert member_node(space, Ball((0.0, 0.0), 5.0), 1)
    assert not member_node(space, Ball((0.0, 0.0), 4.9), 1)


def test_validate_atomistic():
    from sprawl.engine import validate_atomistic

    space = toy_space(3)
    singles = tuple(ExplicitSetQuery(frozenset({v})) for v in range(3))
    big = Ball((0.5, 0.5), 5.0)
    good = Workload(singles + (big,), atomistic=True)
    assert validate_atomistic(space, range(3), good)
    missing = Workload(singles[:2] + (big,), atomistic=True)
    assert not validate_atomistic(space, range(3), missing)
    assert not validate_atomistic(space, range(3), Workload(singles, atomistic=False))


def test_builders_reject_asymmetric_spaces(rng):
    from conftest import random_quasimetric

    space = random_quasimetric(rng, 8)
    with pytest.raises(ValueError, match="symmetric"):
        build_classic(space, range(8), "aesa")


def test_ambit_query_on_quasimetric_brute_force(rng):
    # directed query: membership uses the backward features throughout
    from conftest import random_quasimetric

    space = random_quasimetric(rng, 12)
    s = brute_force_sprawl(space, range(12))
    q = AmbitQuery((0, 3), (0.5, 0.5), float(np.median(space.matrix)))
    got = search(s, q)
    want = tuple(
        v for v in range(12)
        if 0.5 * space.matrix[v, 0] + 0.5 * space.matrix[v, 3] <= q.radius
    )
    assert got.members == want


def test_interval_tree_exactness_randomized(rng):
    values = np.sort(rng.random(200) * 10.0).reshape(-1, 1)
    space = ProjectionSpace(values)
    sprawl, res = build_classic(space, range(200), "sorted-interval-tree")
    for _ in range(100):
        q = Ball((float(rng.random() * 12.0 - 1.0),), float(rng.random() * 2.0))
        got = search(sprawl, q)
        assert set(got.members) == set(linear_scan(space, range(200), q))
    workload = _atomistic_workload(sprawl)
    assert check_responsibility(sprawl, res, workload).passed
