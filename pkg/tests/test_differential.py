"""Differential battery: the optimized engine vs a literal reference loop.

The reference expands every shell group into ordinary edges, ignores all
caching, treats lazy edges eagerly, and walks the traversal loop
directly. Eager elimination only removes queue entries earlier than lazy
does, so for identical discovery ordering the two must produce the same
FIFO traversal order, not just the same members. It shares the region
overlap code with the engine on purpose: the overlap math has its own
oracles, this battery targets the queue/activation/laziness bookkeeping.
"""
import heapq
import math

import numpy as np

from sprawl.ambit import Ambit, LinearMap, MetaballMap, PowerMap, table1_region
from sprawl.comparison import AmbitQuery, Ball, EuclideanSpace, ExplicitSetQuery
from sprawl.engine import (
    EMPTY,
    Edge,
    Sprawl,
    _QueryEval,
    build_classic,
    linear_scan,
    random_small_sprawl,
    search,
)

from conftest import random_labeled_sprawl, uniform_space


def reference_search(sprawl: Sprawl, query):
    """Direct transcription of the traversal loop, FIFO, everything eager.

    Activation order matches the engine's: a node's explicit out-edges in
    edge order, then its group members in group order.
    """
    explicit = list(sprawl.edges)
    group_members = []
    for g in sprawl.groups:
        group_members.extend(g.member_edge(i) for i in range(len(g)))

    def out_edges(v):
        for e in explicit:
            if e.sources and v in e.sources:
                yield e
        for e in group_members:
            if v in e.sources:
                yield e

    knn = isinstance(query, Ball) and query.k is not None
    best: list[tuple[float, int]] = []
    s = math.inf if knn else None

    def fresh_eval():
        return _QueryEval(sprawl.space, query)

    status: dict[int, str] = {}
    seq: dict[int, int] = {}
    counter = 0
    used: set[int] = set()
    all_edges = explicit + group_members
    order = []
    members = []
    traversed = set()

    def fire(i):
        e = all_edges[i]
        t = e.target
        nonlocal counter
        if status.get(t) in ("trav", "elim"):
            return
        ev = fresh_eval()
        for r in e.negative:
            if not ev.intersects(r, s):
                status[t] = "elim"
                return
        if all(ev.intersects(r, s) for r in e.positive):
            if status.get(t) is None:
                status[t] = "avail"
                seq[t] = counter
                counter += 1

    for i, e in enumerate(all_edges):
        if not e.sources:
            fire(i)
    while True:
        avail = [v for v, st in status.items() if st == "avail"]
        if not avail:
            break
        v = min(avail, key=lambda u: (seq[u], u))
        status[v] = "trav"
        traversed.add(v)
        order.append(v)
        if knn:
            d = sprawl.space.compare(query.center, v)
            item = (-d, -v)
            if len(best) < query.k:
                heapq.heappush(best, item)
            elif item > best[0]:
                heapq.heapreplace(best, item)
            if len(best) == query.k:
                s = -best[0][0]
        else:
            if fresh_eval().member(v):
                members.append(v)
        for i, e in enumerate(all_edges):
            if i in used or not e.sources:
                continue
            if set(e.sources) <= traversed:
                used.add(i)
                fire(i)
    if knn:
        members = [r for _, r in sorted((-d, -r) for d, r in best)]
        return tuple(members), tuple(order)
    return tuple(sorted(members)), tuple(order)


def test_engine_matches_reference_on_random_sprawls(rng):
    nonempty = eliminations = 0
    for i in range(120):
        sprawl = random_labeled_sprawl(rng)
        n = len(sprawl.nodes)
        roll = rng.random()
        if roll < 0.6:
            query = Ball(tuple(rng.random(2)), float(rng.random() * 0.9))
        elif roll < 0.8:
            query = ExplicitSetQuery(frozenset(int(v) for v in rng.choice(n, size=2)))
        else:
            query = AmbitQuery((0,), (1.0,), float(rng.random()))
        want_members, want_order = reference_search(sprawl, query)
        got = search(sprawl, query)
        assert got.order == want_order, f"instance {i}: traversal orders diverge"
        assert got.members == want_members, f"instance {i}: members diverge"
        nonempty += bool(want_order)
        eliminations += len(want_order) < n
    # the battery must exercise real traversals and real eliminations
    assert nonempty > 80
    assert eliminations > 30


def test_engine_matches_reference_on_builders(rng):
    space = uniform_space(rng, 40, 3)
    for kind, params in [
        ("ball-tree", {}),
        ("aesa", {}),
        ("laesa", {"pivots": 4}),
        ("pm-tree", {"pivots": 3}),
    ]:
        sprawl, _ = build_classic(space, range(40), kind, **params)
        for _ in range(6):
            query = Ball(tuple(rng.random(3)), float(rng.random() * 0.5))
            want_members, want_order = reference_search(sprawl, query)
            got = search(sprawl, query)
            assert got.order == want_order, kind
            assert got.members == want_members, kind


def test_engine_matches_reference_knn(rng):
    space = uniform_space(rng, 30, 2)
    for kind, params in [("aesa", {}), ("laesa", {"pivots": 3})]:
        sprawl, _ = build_classic(space, range(30), kind, **params)
        for _ in range(6):
            k = int(rng.integers(1, 6))
            query = Ball(tuple(rng.random(2)), 0.0, k=k)
            want_members, _ = reference_search(sprawl, query)
            got = search(sprawl, query)
            assert got.members == want_members, kind
            assert got.members == linear_scan(space, range(30), query)


def test_random_small_sprawl_reference(rng):
    for _ in range(60):
        sprawl = random_small_sprawl(rng)
        query = Ball(tuple(rng.random(2)), float(rng.random()))
        want_members, want_order = reference_search(sprawl, query)
        got = search(sprawl, query)
        assert got.order == want_order
        assert got.members == want_members
