"""The sprawl index: a region-labeled directed hypergraph over data points.

Edges carry positive (discovery) and negative (elimination) regions. A
query turns the sprawl into a signed hyperdigraph whose traversal visits
exactly the candidate points; `search` runs that traversal directly with
on-demand region evaluation, while `reduce_to_signed` materializes it for
the exhaustive correctness checkers.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ambit as ambit_mod
from .ambit import Ambit, LinearMap, MetaballMap, PowerMap, table1_region
from .comparison import (
    TOL,
    AmbitQuery,
    Ball,
    ComparisonSpace,
    CostSession,
    ExplicitSetQuery,
    MatrixSpace,
    ProjectionSpace,
    Workload,
    feature_map,
)
from .errors import CapabilityError, EmulationError, SizeLimitError, StructureError
from .hypergraph import Heuristic, HyperEdge, SignedHyperdigraph

log = logging.getLogger(__name__)


# --- region labels ----------------------------------------------------------


class Universe:
    """The whole universe; intersects every non-empty query."""

    def __repr__(self):
        return "Universe()"

    def __eq__(self, other):
        return isinstance(other, Universe)

    def __hash__(self):
        return hash("Universe")


class Empty:
    """The empty region; in N(e) it makes elimination unconditional."""

    def __repr__(self):
        return "Empty()"

    def __eq__(self, other):
        return isinstance(other, Empty)

    def __hash__(self):
        return hash("Empty")


UNIVERSE = Universe()
EMPTY = Empty()


@dataclass(frozen=True)
class ExplicitRegion:
    """A finite point-set region with exact intersection (verification path)."""

    ids: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "ids", frozenset(int(i) for i in self.ids))


Region = Universe | Empty | ExplicitRegion | Ambit


@dataclass(frozen=True)
class Edge:
    """One hyperedge: all sources must be traversed before it fires."""

    sources: tuple[int, ...]
    target: int
    positive: tuple = ()
    negative: tuple = ()
    lazy: bool = False

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(int(s) for s in self.sources))
        object.__setattr__(self, "target", int(self.target))
        object.__setattr__(self, "positive", tuple(self.positive))
        object.__setattr__(self, "negative", tuple(self.negative))
        if self.lazy:
            if self.positive and not all(isinstance(r, Empty) for r in self.positive):
                raise ValueError("lazy edges must be purely negative")
            if not self.negative:
                raise ValueError("lazy edges need at least one negative region")

    @property
    def is_root_edge(self) -> bool:
        return not self.sources and not self.positive and not self.negative


@dataclass
class ShellGroup:
    """A fan of single-target negative shell edges sharing one source.

    Stored columnar (targets plus per-target shell bounds around the
    source) so pivot-style indexes stay compact; logically each position
    is an ordinary edge with P = (Empty,) and one shell region.
    """

    source: int
    targets: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    lazy: bool = False

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.int64)
        self.lo = np.asarray(self.lo, dtype=float)
        self.hi = np.asarray(self.hi, dtype=float)
        if not (self.targets.shape == self.lo.shape == self.hi.shape):
            raise ValueError("group arrays must have matching shapes")

    def __len__(self) -> int:
        return int(self.targets.shape[0])

    def member_edge(self, i: int) -> Edge:
        region = Ambit(
            (self.source,),
            LinearMap([[1.0], [-1.0]]),
            (float(self.hi[i]), -float(self.lo[i])),
        )
        return Edge((self.source,), int(self.targets[i]), (EMPTY,), (region,), lazy=self.lazy)


class Sprawl:
    """Immutable-after-build index: ground set, edges, and shell groups."""

    def __init__(self, space: ComparisonSpace, nodes, edges, groups=(), validate: bool = True):
        self.space = space
        self.nodes: tuple[int, ...] = tuple(int(v) for v in nodes)
        self.edges: tuple[Edge, ...] = tuple(edges)
        self.groups: tuple[ShellGroup, ...] = tuple(groups)
        self._node_pos = {v: i for i, v in enumerate(self.nodes)}
        self._plan_cache = None
        if validate:
            self.validate()

    # group member edges are numbered after the explicit ones
    @property
    def logical_edge_count(self) -> int:
        return len(self.edges) + sum(len(g) for g in self.groups)

    def logical_edge(self, idx: int) -> Edge:
        if idx < len(self.edges):
            return self.edges[idx]
        idx -= len(self.edges)
        for g in self.groups:
            if idx < len(g):
                return g.member_edge(idx)
            idx -= len(g)
        raise IndexError("edge index out of range")

    def iter_logical_edges(self):
        for i, e in enumerate(self.edges):
            yield i, e
        idx = len(self.edges)
        for g in self.groups:
            for i in range(len(g)):
                yield idx, g.member_edge(i)
                idx += 1

    @property
    def roots(self) -> tuple[int, ...]:
        return tuple(e.target for e in self.edges if e.is_root_edge)

    def validate(self) -> None:
        nodes = set(self.nodes)
        pseudo = set()
        if isinstance(self.space, ProjectionSpace):
            pseudo = {self.space.axis_ref(i) for i in range(self.space.dimension)}
        for e in self.edges:
            if e.target not in nodes or any(s not in nodes for s in e.sources):
                raise IndexError(f"edge {e} refers to refs outside the ground set")
            allowed = set(e.sources) | pseudo
            for r in e.positive + e.negative:
                if isinstance(r, Ambit) and not set(r.foci) <= allowed:
                    raise ValueError(
                        f"region foci {r.foci} not covered by edge sources {e.sources}"
                    )
            if e.target in e.sources:
                warnings.warn(f"edge into {e.target} lists it as a source and can never fire usefully")
        for g in self.groups:
            if g.source not in nodes or any(int(t) not in nodes for t in g.targets):
                raise IndexError("shell group refers to refs outside the ground set")
            if np.any(g.lo > g.hi):
                raise ValueError("shell group needs lo <= hi")

    def _plan(self):
        if self._plan_cache is not None:
            return self._plan_cache
        eager_out: dict[int, list[int]] = {}
        sourceless: list[int] = []
        lazy_in: dict[int, list[int]] = {}
        for i, e in enumerate(self.edges):
            if e.lazy:
                lazy_in.setdefault(e.target, []).append(i)
                continue
            if not e.sources:
                sourceless.append(i)
            for s in set(e.sources):
                eager_out.setdefault(s, []).append(i)
        groups_out: dict[int, list[int]] = {}
        lazy_group_in: dict[int, list[tuple[int, int]]] = {}
        for gi, g in enumerate(self.groups):
            if g.lazy:
                for pos, t in enumerate(g.targets):
                    lazy_group_in.setdefault(int(t), []).append((gi, pos))
            else:
                groups_out.setdefault(g.source, []).append(gi)
        src_sizes = [len(set(e.sources)) for e in self.edges]
        self._plan_cache = (eager_out, sourceless, lazy_in, groups_out, lazy_group_in, src_sizes)
        return self._plan_cache


# --- query evaluation -------------------------------------------------------


class _QueryEval:
    """Per-search caches: query-center distances and focal cross-distances."""

    def __init__(self, space: ComparisonSpace, query):
        self.space = space
        self.query = query
        self.session = CostSession()
        self.region_evaluations = 0
        self._to_center: dict[int, float] = {}
        self._from_focus: dict[int, float] = {}
        self._cross: dict[tuple[int, int], float] = {}

    def dist_to_center(self, ref: int) -> float:
        d = self._to_center.get(ref)
        if d is None:
            d = self.space.compare(self.query.center, ref, self.session)
            self._to_center[ref] = d
            if self.space.symmetric:
                self._from_focus[ref] = d
        return d

    def dist_from_focus(self, ref: int) -> float:
        d = self._from_focus.get(ref)
        if d is None:
            d = self.space.compare(ref, self.query.center, self.session)
            self._from_focus[ref] = d
            if self.space.symmetric:
                self._to_center[ref] = d
        return d

    def z_of(self, foci) -> np.ndarray:
        return np.array([self.dist_from_focus(p) for p in foci], dtype=float)

    def cross(self, region_focus: int, query_focus: int) -> float:
        key = (region_focus, query_focus)
        d = self._cross.get(key)
        if d is None:
            d = self.space.compare(region_focus, query_focus, self.session)
            self._cross[key] = d
        return d

    def member(self, ref: int, s: float | None = None) -> bool:
        q = self.query
        if isinstance(q, Ball):
            radius = q.radius if s is None else s
            return self.dist_to_center(ref) <= radius
        if isinstance(q, ExplicitSetQuery):
            return ref in q.ids
        if isinstance(q, AmbitQuery):
            fv = feature_map(self.space, q.foci, ref, self.session)
            x = np.asarray(fv.backward if fv.backward is not None else fv.values)
            return float(np.dot(q.weights, x)) <= q.radius
        raise TypeError(f"unsupported query {q!r}")

    def intersects(self, region, s: float | None = None) -> bool:
        """Conservative region/query overlap; never a false negative."""
        self.region_evaluations += 1
        q = self.query
        if isinstance(region, Empty):
            return False
        if isinstance(region, Universe):
            if isinstance(q, ExplicitSetQuery):
                return bool(q.ids)
            return True
        if isinstance(region, ExplicitRegion):
            if isinstance(q, ExplicitSetQuery):
                return bool(region.ids & q.ids)
            return any(self.member(i, s) for i in sorted(region.ids))
        if isinstance(region, Ambit):
            if isinstance(q, ExplicitSetQuery):
                return any(
                    ambit_mod.membership(self.space, region, i, self.session) for i in sorted(q.ids)
                )
            if isinstance(q, Ball):
                radius = q.radius if s is None else s
                z = self.z_of(region.foci)
                if isinstance(region.map, LinearMap):
                    return ambit_mod.overlap_ball_rows(
                        region.map.matrix, np.asarray(region.radii), z, radius
                    )
                if isinstance(region.map, (PowerMap, MetaballMap)) and getattr(
                    region.map, "nondecreasing", False
                ):
                    f_z = region.map.remoteness(z)
                    f_s = region.map.remoteness(np.full(region.degree, float(radius)))
                    return bool(np.all(np.asarray(region.radii) + f_s >= f_z - TOL))
                if getattr(region.map, "nondecreasing", False):
                    # corner of the circumscribing feature box (Hamacher etc.)
                    corner = np.maximum(z - float(radius), 0.0)
                    return bool(np.all(region.map.remoteness(corner) <= np.asarray(region.radii) + TOL))
                log.warning("no sound overlap check for %r; assuming overlap", region)
                return True
            if isinstance(q, AmbitQuery):
                if not isinstance(region.map, LinearMap):
                    log.warning("non-linear region vs ambit query; assuming overlap")
                    return True
                Z = np.array(
                    [[self.cross(p, qf) for qf in q.foci] for p in region.foci], dtype=float
                )
                query_region = Ambit(q.foci, LinearMap([list(q.weights)]), (q.radius,), "backward")
                try:
                    return ambit_mod.overlap_linear(
                        region, query_region, Z, symmetric=self.space.symmetric
                    )
                except CapabilityError:
                    log.warning("sign precondition failed for %r; assuming overlap", region)
                    return True
        raise CapabilityError(f"no overlap check for {type(region).__name__} vs {type(q).__name__}")


def member_node(space: ComparisonSpace, query, ref: int) -> bool:
    """Exact membership of a ground-set point in a query."""
    return _QueryEval(space, query).member(ref)


def validate_atomistic(space: ComparisonSpace, nodes, workload: Workload) -> bool:
    """Check the atomistic contract: each ground-set member of any query
    must itself appear as a singleton query."""
    if not workload.atomistic:
        return False
    singletons = set()
    for q in workload.queries:
        if isinstance(q, ExplicitSetQuery) and len(q.ids) == 1:
            singletons |= q.ids
        elif isinstance(q, Ball) and q.k is None and q.radius == 0.0:
            for v in nodes:
                if member_node(space, q, v):
                    singletons.add(v)
    for q in workload.queries:
        for v in nodes:
            if member_node(space, q, v) and v not in singletons:
                return False
    return True


# --- reduction and search ---------------------------------------------------


def reduce_to_signed(sprawl: Sprawl, query) -> SignedHyperdigraph:
    """Evaluate every edge label against the query, keeping signed edges.

    An edge is positive when the query meets every region in both labels,
    negative when it misses some negative region, and dropped otherwise.
    """
    ev = _QueryEval(sprawl.space, query)
    pos = sprawl._node_pos
    out = []
    for _, e in sprawl.iter_logical_edges():
        neg_hits = [ev.intersects(r) for r in e.negative]
        if not all(neg_hits):
            out.append(HyperEdge(frozenset(pos[s] for s in e.sources), pos[e.target], -1))
        elif all(ev.intersects(r) for r in e.positive):
            out.append(HyperEdge(frozenset(pos[s] for s in e.sources), pos[e.target], +1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SignedHyperdigraph(len(sprawl.nodes), out)


@dataclass
class SearchResult:
    members: tuple[int, ...]
    traversed: int
    distance_computations: int
    region_evaluations: int
    order: tuple[int, ...] = ()


_UNDISC, _AVAIL, _TRAV, _ELIM = 0, 1, 2, 3


def search(sprawl: Sprawl, query, heuristic: Heuristic | None = None) -> SearchResult:
    """Traverse the sprawl for a query, evaluating regions on demand.

    Every traversed node is tested for query membership. Lazy negative
    edges are consulted only immediately before their target would be
    traversed. For kNN queries the cover radius starts at infinity and
    tightens to the current k-th best distance after every traversal;
    node priorities are the per-edge region lower bounds.
    """
    space = sprawl.space
    ev = _QueryEval(space, query)
    knn = isinstance(query, Ball) and query.k is not None
    if knn:
        k = query.k
        worst: list[tuple[float, int]] = []  # max-heap via negation: (-(dist), -ref)
        s_current = math.inf
    else:
        s_current = None

    eager_out, sourceless, lazy_in, groups_out, lazy_group_in, src_sizes = sprawl._plan()
    status: dict[int, int] = {}
    remaining: dict[int, int] = {}
    seq: dict[int, int] = {}
    prio: dict[int, tuple] = {}
    counter = 0
    heap: list[tuple] = []
    explicit_pos = None
    if heuristic is not None and heuristic.kind == "explicit":
        explicit_pos = {v: i for i, v in enumerate(heuristic.order)}

    def entry_key(v: int, lb: float) -> tuple:
        if heuristic is None:
            return (lb, seq[v], v) if knn else (seq[v], v)
        if heuristic.kind == "fifo":
            return (seq[v], v)
        if heuristic.kind == "lifo":
            return (-seq[v], v)
        if heuristic.kind == "priority":
            return (heuristic.key(v), seq[v], v)
        if heuristic.kind == "explicit":
            return (explicit_pos.get(v, math.inf), v)
        raise ValueError(f"unknown heuristic kind {heuristic.kind!r}")

    def lower_bound(edge: Edge) -> float:
        if not knn:
            return 0.0
        lb = 0.0
        for r in edge.positive:
            if isinstance(r, Ambit) and isinstance(r.map, LinearMap):
                z = ev.z_of(r.foci)
                slack = (r.map.matrix @ z - np.asarray(r.radii)) / np.sum(
                    np.abs(r.map.matrix), axis=1
                )
                lb = max(lb, float(np.max(slack)))
        return max(lb, 0.0)

    def push(v: int, lb: float) -> None:
        key = entry_key(v, lb)
        old = prio.get(v)
        if old is not None and key <= old:
            return  # keep the tighter (later-popping) bound on rediscovery
        prio[v] = key
        heapq.heappush(heap, (key, v))

    def discover(v: int, lb: float) -> None:
        nonlocal counter
        st = status.get(v, _UNDISC)
        if st in (_TRAV, _ELIM):
            return
        if st == _UNDISC:
            status[v] = _AVAIL
            seq[v] = counter
            counter += 1
            push(v, lb)
        elif knn:
            push(v, lb)  # rediscovery may tighten the priority

    def eliminate(v: int) -> None:
        st = status.get(v, _UNDISC)
        if st != _TRAV:
            status[v] = _ELIM

    def fire(edge_id: int) -> None:
        e = sprawl.edges[edge_id]
        t = e.target
        if status.get(t, _UNDISC) in (_TRAV, _ELIM):
            return
        for r in e.negative:
            if not ev.intersects(r, s_current):
                eliminate(t)
                return
        if all(ev.intersects(r, s_current) for r in e.positive):
            discover(t, lower_bound(e))

    def fire_group(g: ShellGroup) -> None:
        if isinstance(query, Ball):
            z = ev.dist_from_focus(g.source)
            s = s_current if knn else query.radius
            miss = (z > g.hi + s + TOL) | (z < g.lo - s - TOL)
            ev.region_evaluations += len(g)
            for t in g.targets[miss]:
                eliminate(int(t))
        else:
            for i in range(len(g)):
                e = g.member_edge(i)
                if status.get(e.target, _UNDISC) in (_TRAV, _ELIM):
                    continue
                if not ev.intersects(e.negative[0], s_current):
                    eliminate(e.target)

    def lazy_blocked(v: int, traversed: set[int]) -> bool:
        for ei in lazy_in.get(v, ()):
            e = sprawl.edges[ei]
            if all(s in traversed for s in e.sources):
                for r in e.negative:
                    if not ev.intersects(r, s_current):
                        return True
        for gi, posn in lazy_group_in.get(v, ()):
            g = sprawl.groups[gi]
            if g.source in traversed:
                z = ev.dist_from_focus(g.source)
                s = (s_current if knn else query.radius) if isinstance(query, Ball) else None
                ev.region_evaluations += 1
                if s is not None:
                    if z > g.hi[posn] + s + TOL or z < g.lo[posn] - s - TOL:
                        return True
                else:
                    if not ev.intersects(g.member_edge(posn).negative[0], s_current):
                        return True
        return False

    traversed: set[int] = set()
    order: list[int] = []
    members: list[int] = []

    for ei in sourceless:
        fire(ei)
    while heap:
        key, v = heapq.heappop(heap)
        if status.get(v) != _AVAIL or prio.get(v) != key:
            continue
        if explicit_pos is not None and v not in explicit_pos:
            break  # explicit order exhausted: stop with a prefix traversal
        if lazy_blocked(v, traversed):
            status[v] = _ELIM
            continue
        status[v] = _TRAV
        traversed.add(v)
        order.append(v)
        if knn:
            d = ev.dist_to_center(v)
            item = (-d, -v)
            if len(worst) < k:
                heapq.heappush(worst, item)
            elif item > worst[0]:
                heapq.heapreplace(worst, item)
            if len(worst) == k:
                s_current = -worst[0][0]
        else:
            if ev.member(v):
                members.append(v)
        for ei in eager_out.get(v, ()):
            rem = remaining.get(ei)
            if rem is None:
                rem = src_sizes[ei]
            rem -= 1
            remaining[ei] = rem
            if rem == 0:
                fire(ei)
        for gi in groups_out.get(v, ()):
            fire_group(sprawl.groups[gi])

    if knn:
        ranked = sorted((-nd, -nr) for nd, nr in worst)
        members = [v for _, v in ranked]
    return SearchResult(
        members=tuple(sorted(members)) if not knn else tuple(members),
        traversed=len(order),
        distance_computations=ev.session.distance_computations,
        region_evaluations=ev.region_evaluations,
        order=tuple(order),
    )


def linear_scan(space: ComparisonSpace, nodes, query) -> tuple[int, ...]:
    """Brute-force oracle. Ball: all members; kNN: k smallest (distance, id)."""
    nodes = tuple(nodes)
    if isinstance(query, Ball):
        dists = space.distances_from(query.center, nodes)
        if query.k is not None:
            ranked = sorted(zip(dists, nodes))[: query.k]
            return tuple(v for _, v in ranked)
        return tuple(v for v, d in zip(nodes, dists) if d <= query.radius)
    ev = _QueryEval(space, query)
    return tuple(v for v in nodes if ev.member(v))


# --- exhaustive correctness -------------------------------------------------


@dataclass
class CorrectnessReport:
    correct: bool
    certificate: tuple | None = None  # (query index, maximal traversal, missing nodes)

    def __bool__(self) -> bool:
        return self.correct


def check_correct_small(sprawl: Sprawl, workload: Workload, cap: int = 8) -> CorrectnessReport:
    """Verify that every maximal traversal covers each query, by enumeration.

    Availability depends only on the traversed *set*, so the repertoire
    is explored as a DAG of bitmask states; the first maximal state
    missing a required node is expanded back into a sequence certificate.
    """
    n = len(sprawl.nodes)
    if n > cap:
        raise SizeLimitError(f"correctness check capped at {cap} nodes, sprawl has {n}")
    for qi, query in enumerate(workload.queries):
        g = reduce_to_signed(sprawl, query)
        pos_edges = [(sum(1 << s for s in e.sources), 1 << e.target) for e in g.edges if e.sign > 0]
        neg_edges = [(sum(1 << s for s in e.sources), 1 << e.target) for e in g.edges if e.sign < 0]
        required = 0
        for i, v in enumerate(sprawl.nodes):
            if member_node(sprawl.space, query, v):
                required |= 1 << i

        def avail(state: int) -> int:
            disc = elim = 0
            for src, tgt in pos_edges:
                if state & src == src:
                    disc |= tgt
            for src, tgt in neg_edges:
                if state & src == src:
                    elim |= tgt
            return disc & ~elim & ~state

        seen = {0}
        parent: dict[int, tuple[int, int]] = {}
        stack = [0]
        while stack:
            state = stack.pop()
            a = avail(state)
            if a == 0:
                if required & ~state:
                    seq: list[int] = []
                    cur = state
                    while cur:
                        prev, bit = parent[cur]
                        seq.append(bit.bit_length() - 1)
                        cur = prev
                    traversal = tuple(sprawl.nodes[i] for i in reversed(seq))
                    missing = tuple(
                        sprawl.nodes[i] for i in range(n) if (required & ~state) >> i & 1
                    )
                    return CorrectnessReport(False, (qi, traversal, missing))
                continue
            rest = a
            while rest:
                bit = rest & -rest
                rest ^= bit
                nxt = state | bit
                if nxt not in seen:
                    seen.add(nxt)
                    parent[nxt] = (state, bit)
                    stack.append(nxt)
    return CorrectnessReport(True, None)


# --- DNF tautology gadget ---------------------------------------------------


Literal = tuple[int, bool]
Clause = frozenset
DnfFormula = tuple


def parse_dnf(text: str) -> tuple[DnfFormula, tuple[str, ...]]:
    """Parse e.g. "(x&y)|(!x)|(!y&x)" into clauses of (variable, polarity)."""
    names: dict[str, int] = {}
    clauses = []
    body = text.replace(" ", "")
    if not body:
        raise ValueError("empty formula")
    for part in body.split("|"):
        part = part.strip()
        if part.startswith("(") and part.endswith(")"):
            part = part[1:-1]
        if not part:
            raise ValueError(f"empty clause in {text!r}")
        clause = set()
        for lit in part.split("&"):
            lit = lit.strip()
            positive = True
            while lit.startswith("!"):
                positive = not positive
                lit = lit[1:]
            if not lit.isidentifier():
                raise ValueError(f"bad literal {lit!r} in {text!r}")
            var = names.setdefault(lit, len(names))
            clause.add((var, positive))
        clauses.append(frozenset(clause))
    return tuple(clauses), tuple(sorted(names, key=names.get))


def is_tautology(formula: DnfFormula, var_count: int) -> bool:
    """Truth-table oracle: true iff some clause holds under every assignment."""
    for bits in range(1 << var_count):
        assignment = [(bits >> i) & 1 == 1 for i in range(var_count)]
        if not any(
            all(assignment[var] == positive for var, positive in clause) for clause in formula
        ):
            return False
    return True


def build_dnf_gadget(formula: DnfFormula, cap: int = 8) -> tuple[Sprawl, Workload]:
    """Encode a DNF formula as a sprawl that is correct iff it is a tautology.

    One root per literal, with mutual unconditional negative edges per
    variable, so the traversed literals form a truth assignment; one edge
    per clause targets the formula node, guarded by an exact point region.
    """
    var_count = max((var for clause in formula for var, _ in clause), default=-1) + 1
    n = 2 * var_count + 1
    if n > cap:
        raise SizeLimitError(f"gadget needs {n} nodes, cap is {cap}")
    phi = n - 1
    space_ = MatrixSpace(np.ones((n, n)) - np.eye(n))

    def lit_node(var: int, positive: bool) -> int:
        return 2 * var + (0 if positive else 1)

    edges = []
    for v in range(var_count):
        a, b = lit_node(v, True), lit_node(v, False)
        edges.append(Edge((), a))
        edges.append(Edge((), b))
        edges.append(Edge((a,), b, (), (EMPTY,)))
        edges.append(Edge((b,), a, (), (EMPTY,)))
    for clause in formula:
        sources = tuple(sorted(lit_node(var, positive) for var, positive in clause))
        edges.append(Edge(sources, phi, (ExplicitRegion(frozenset({phi})),), ()))
    sprawl = Sprawl(space_, range(n), edges)
    return sprawl, Workload((ExplicitSetQuery(frozenset({phi})),), atomistic=False)


# --- responsibility ---------------------------------------------------------


class ResponsibilityAssignment:
    """res(e) per logical edge; unlisted edges carry no responsibilities."""

    def __init__(self, edge_to_nodes: dict[int, frozenset[int]] | None = None):
        self.edge_to_nodes = {
            int(k): frozenset(int(x) for x in v) for k, v in (edge_to_nodes or {}).items()
        }

    def get(self, edge_index: int) -> frozenset[int]:
        return self.edge_to_nodes.get(edge_index, frozenset())

    def enlarged(self) -> "ResponsibilityAssignment":
        return ResponsibilityAssignment(dict(self.edge_to_nodes))


@dataclass
class ResponsibilityReport:
    passed: bool
    violations: list = field(default_factory=list)  # (rule, edge index, node, region repr)

    def __bool__(self) -> bool:
        return self.passed


def _region_member(space: ComparisonSpace, region, ref: int, tol: float = TOL) -> bool:
    if isinstance(region, Universe):
        return True
    if isinstance(region, Empty):
        return False
    if isinstance(region, ExplicitRegion):
        return ref in region.ids
    if isinstance(region, Ambit):
        return ambit_mod.membership(space, region, ref, tol=tol)
    raise TypeError(f"unknown region {region!r}")


def check_responsibility(
    sprawl: Sprawl, res: ResponsibilityAssignment, workload: Workload
) -> ResponsibilityReport:
    """Local responsibility conditions for acyclic sprawls.

    L1: res(e) inside every positive region of e. L2: res(target), in the
    node shorthand, inside every negative region of e. L3: res(v) covered
    by the union of res over v's incoming edges. Point-in-region is
    decided by remoteness <= radius.
    """
    if not workload.atomistic:
        raise ValueError("responsibility is defined against an atomistic workload")
    edges = list(sprawl.iter_logical_edges())
    targeted = {e.target for _, e in edges}
    missing = set(sprawl.nodes) - targeted
    if missing:
        raise StructureError(f"nodes {sorted(missing)} are targeted by no edge")

    # discovery-capable edges must admit a topological node order
    pairs = {
        (s, e.target)
        for _, e in edges
        if not any(isinstance(r, Empty) for r in e.positive)
        for s in e.sources
    }
    succ: dict[int, set[int]] = {v: set() for v in sprawl.nodes}
    indeg = {v: 0 for v in sprawl.nodes}
    for s, t in pairs:
        succ[s].add(t)
        indeg[t] += 1
    queue = [v for v in sprawl.nodes if indeg[v] == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for t in succ[v]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    if seen != len(sprawl.nodes):
        raise StructureError("sprawl discovery edges are cyclic")

    node_res: dict[int, set[int]] = {v: {v} for v in sprawl.nodes}
    for idx, e in edges:
        for s in set(e.sources):
            node_res[s] |= res.get(idx)

    violations = []
    in_union: dict[int, set[int]] = {v: set() for v in sprawl.nodes}
    for idx, e in edges:
        in_union[e.target] |= res.get(idx)
        for r in e.positive:
            for v in sorted(res.get(idx)):
                if not _region_member(sprawl.space, r, v):
                    violations.append(("L1", idx, v, repr(r)))
        for r in e.negative:
            for v in sorted(node_res[e.target]):
                if not _region_member(sprawl.space, r, v):
                    violations.append(("L2", idx, v, repr(r)))
    for v in sprawl.nodes:
        extra = node_res[v] - in_union[v]
        for u in sorted(extra):
            violations.append(("L3", None, v, f"responsibility {u} not covered by in-edges"))
    return ResponsibilityReport(not violations, violations)


# --- classic index builders -------------------------------------------------


def brute_force_sprawl(space: ComparisonSpace, nodes) -> Sprawl:
    """Every node a root, no regions: the exhaustive-scan index."""
    return Sprawl(space, nodes, [Edge((), v) for v in nodes])


def _two_scan_seeds(space: ComparisonSpace, refs: list[int]) -> tuple[int, int]:
    d0 = space.distances_from(refs[0], refs)
    a = refs[int(np.argmax(d0))]
    da = space.distances_from(a, refs)
    b = refs[int(np.argmax(da))]
    return a, b


def _maxmin_pivots(space: ComparisonSpace, refs, count: int) -> list[int]:
    refs = list(refs)
    if count >= len(refs):
        return refs
    d0 = space.distances_from(refs[0], refs)
    chosen = [refs[int(np.argmax(d0))]]
    best = space.distances_from(chosen[0], refs)
    while len(chosen) < count:
        nxt = refs[int(np.argmax(best))]
        if nxt in chosen:
            for candidate in refs:  # all remaining coincide with a pivot
                if candidate not in chosen:
                    nxt = candidate
                    break
        chosen.append(nxt)
        best = np.minimum(best, space.distances_from(nxt, refs))
    return chosen


@dataclass
class _TreeNode:
    point: int
    children: list = field(default_factory=list)
    subtree: tuple[int, ...] = ()


def _build_metric_tree(space: ComparisonSpace, refs: list[int], arity: int) -> _TreeNode:
    def build(members: list[int], rep: int) -> _TreeNode:
        rest = [r for r in members if r != rep]
        node = _TreeNode(rep)
        if rest:
            if len(rest) <= arity:
                seeds, groups = list(rest), [[r] for r in rest]
            else:
                seeds = list(dict.fromkeys(_maxmin_pivots(space, rest, arity)))
                if len(seeds) == 1:  # all remaining points coincide
                    seeds, groups = list(rest), [[r] for r in rest]
                else:
                    assign = np.argmin(space.pairwise(rest, seeds), axis=1)
                    groups = [[] for _ in seeds]
                    for r, gi in zip(rest, assign):
                        groups[int(gi)].append(r)
                    # a seed is at distance 0 from itself, so its group is non-empty
                    seeds, groups = zip(*[(s, g) for s, g in zip(seeds, groups) if g])
                    if len(groups) == 1:  # duplicates collapsed into one group
                        seeds, groups = list(rest), [[r] for r in rest]
            for seed, group in zip(seeds, groups):
                node.children.append(build(group, seed))
        node.subtree = (rep,) + tuple(v for c in node.children for v in c.subtree)
        return node

    return build(list(refs), refs[0])


def _tree_edges(space: ComparisonSpace, root: _TreeNode):
    """Ball-labeled child edges plus responsibilities, by preorder walk."""
    edges: list[Edge] = [Edge((), root.point)]
    res: dict[int, frozenset[int]] = {0: frozenset(root.subtree)}
    stack = [root]
    while stack:
        node = stack.pop()
        for child in node.children:
            cover = float(np.max(space.distances_from(node.point, child.subtree)))
            region = Ambit((node.point,), LinearMap([[1.0]]), (cover,))
            res[len(edges)] = frozenset(child.subtree)
            edges.append(Edge((node.point,), child.point, (region,), ()))
            stack.append(child)
    return edges, res


def build_classic(space: ComparisonSpace, nodes, kind: str, **params):
    """Construct a classic index layout as a sprawl.

    kinds: ball-tree, aesa, laesa (pivots=m), pm-tree (arity, pivots),
    sorted-interval-tree (1-d coordinate-projection spaces only).
    Returns (sprawl, responsibility assignment).
    """
    refs = [int(v) for v in nodes]
    if not refs:
        raise ValueError("dataset must be non-empty")
    if not space.symmetric:
        # every classic layout filters through the symmetric triangle
        # inequality; a quasimetric would make the shells unsound
        raise ValueError(f"{kind} construction requires a symmetric comparison")

    if kind == "ball-tree":
        arity = int(params.get("arity", 2))
        if arity < 2:
            raise ValueError("arity must be at least 2")
        root = _build_metric_tree(space, refs, arity)
        edges, res = _tree_edges(space, root)
        return Sprawl(space, refs, edges), ResponsibilityAssignment(res)

    if kind == "aesa":
        edges = [Edge((), v) for v in refs]
        res = {i: frozenset({v}) for i, v in enumerate(refs)}
        d = space.pairwise(refs, refs)
        groups = []
        for i, u in enumerate(refs):
            others = np.array([j for j in range(len(refs)) if j != i])
            row = d[i, others]
            groups.append(
                ShellGroup(u, np.asarray([refs[j] for j in others]), row, row, lazy=False)
            )
        return Sprawl(space, refs, edges, groups), ResponsibilityAssignment(res)

    if kind == "laesa":
        m = int(params.get("pivots", 8))
        if not 1 <= m <= len(refs):
            raise ValueError("pivot count out of range")
        pivots = _maxmin_pivots(space, refs, m)
        others = [v for v in refs if v not in pivots]
        # pivots first in discovery order, so their shells fire before
        # any unconditionally discovered point gets examined
        ordered = list(pivots) + others
        edges = [Edge((), v) for v in ordered]
        res = {i: frozenset({v}) for i, v in enumerate(ordered)}
        groups = []
        for p in pivots:
            if not others:
                continue
            row = space.distances_from(p, others)
            groups.append(ShellGroup(p, np.asarray(others), row, row, lazy=False))
        return Sprawl(space, refs, edges, groups), ResponsibilityAssignment(res)

    if kind == "pm-tree":
        arity = int(params.get("arity", 2))
        m = int(params.get("pivots", 4))
        if m >= len(refs):
            raise ValueError("need more points than pivots")
        pivots = _maxmin_pivots(space, refs, m)
        tree_refs = [v for v in refs if v not in pivots]
        root = _build_metric_tree(space, tree_refs, arity)
        edges, res = _tree_edges(space, root)
        offset = len(edges)
        for i, p in enumerate(pivots):
            edges.append(Edge((), p))
            res[offset + i] = frozenset({p})
        internal: list[_TreeNode] = []
        stack = [root]
        while stack:
            node = stack.pop()
            stack.extend(node.children)
            if node.children:
                internal.append(node)
        groups = []
        for p in pivots:
            targets, lo, hi = [], [], []
            for node in internal:
                drow = space.distances_from(p, node.subtree)
                targets.append(node.point)
                lo.append(float(np.min(drow)))
                hi.append(float(np.max(drow)))
            if targets:
                groups.append(
                    ShellGroup(p, np.asarray(targets), np.asarray(lo), np.asarray(hi), lazy=True)
                )
        return Sprawl(space, refs, edges, groups), ResponsibilityAssignment(res)

    if kind == "sorted-interval-tree":
        if not isinstance(space, ProjectionSpace) or space.dimension != 1:
            raise ValueError("sorted-interval-tree requires a 1-d coordinate-projection space")
        axis = space.axis_ref(0)
        ordered = sorted(refs, key=lambda v: (float(space.points[v, 0]), v))
        edges: list[Edge] = []
        res: dict[int, frozenset[int]] = {}

        def build(lo_ref, hi_ref, part: list[int]):
            if not part:
                return
            mid = len(part) // 2
            v = part[mid]
            sources = tuple(r for r in (lo_ref, hi_ref) if r is not None)
            rows, radii = [], []
            if hi_ref is not None:
                rows.append([1.0])
                radii.append(float(space.points[hi_ref, 0]))
            if lo_ref is not None:
                rows.append([-1.0])
                radii.append(-float(space.points[lo_ref, 0]))
            if sources:
                region = Ambit((axis,), LinearMap(rows), tuple(radii))
                edges.append(Edge(sources, v, (region,), ()))
            else:
                edges.append(Edge((), v))
            res[len(edges) - 1] = frozenset(part)
            build(lo_ref, v, part[:mid])
            build(v, hi_ref, part[mid + 1 :])

        build(None, None, ordered)
        return Sprawl(space, refs, edges), ResponsibilityAssignment(res)

    raise ValueError(f"unknown index kind {kind!r}")


# --- emulation from point-query traces --------------------------------------


def region_member_mask(space: ComparisonSpace, region, refs) -> np.ndarray:
    """Vectorized exact membership of each ref in the region."""
    refs = list(refs)
    if isinstance(region, Universe):
        return np.ones(len(refs), dtype=bool)
    if isinstance(region, Empty):
        return np.zeros(len(refs), dtype=bool)
    if isinstance(region, ExplicitRegion):
        return np.array([v in region.ids for v in refs], dtype=bool)
    if isinstance(region, Ambit):
        feats = np.vstack([space.distances_from(p, refs) for p in region.foci])
        m = region.map
        radii = np.asarray(region.radii)
        if isinstance(m, LinearMap):
            return np.all(m.matrix @ feats <= radii[:, None], axis=0)
        if isinstance(m, PowerMap):
            return (m.weights @ feats**m.alpha) <= radii[0]
        if isinstance(m, MetaballMap):
            return np.sum(1.0 - m.b[:, None] * np.exp(-m.a[:, None] * feats), axis=0) <= radii[0]
        return np.array([region.contains_features(feats[:, j]) for j in range(feats.shape[1])])
    raise TypeError(f"unknown region {region!r}")


def sprawl_trace_oracle(sprawl: Sprawl):
    """Trace oracle of an existing sprawl, for emulation round-trips.

    Given a traversed set and a singleton query point, reports which
    targets the ready edges would discover or eliminate. Region hits are
    precomputed per ground-set point, so calls are cheap.
    """
    refs = list(sprawl.nodes)
    pos_of = {v: i for i, v in enumerate(refs)}
    table = []  # (source set, target, pos_ok mask, neg_ok mask)
    for _, e in sprawl.iter_logical_edges():
        pos_ok = np.ones(len(refs), dtype=bool)
        for r in e.positive:
            pos_ok &= region_member_mask(sprawl.space, r, refs)
        neg_ok = np.ones(len(refs), dtype=bool)
        for r in e.negative:
            neg_ok &= region_member_mask(sprawl.space, r, refs)
        table.append((set(e.sources), e.target, pos_ok, neg_ok))

    def oracle(traversed, query_ref: int):
        tset = set(int(t) for t in traversed)
        j = pos_of[int(query_ref)]
        discovered, eliminated = set(), set()
        for sources, target, pos_ok, neg_ok in table:
            if not sources <= tset:
                continue
            if not neg_ok[j]:
                eliminated.add(target)
            elif pos_ok[j]:
                discovered.add(target)
        return discovered, eliminated

    return oracle


def emulate_from_traces(
    space: ComparisonSpace,
    nodes,
    trace_oracle,
    max_source_size: int = 3,
) -> Sprawl:
    """Reconstruct a sprawl from observed discovery/elimination behavior.

    Scans source subsets breadth-first by size, keeping minimal sets that
    trigger each behavior; single positive regions grow to contain every
    discovering singleton query, single negative regions every
    non-eliminating one. Scanning stops early once a full size level adds
    no new minimal edge and every node is positively covered.
    """
    refs = [int(v) for v in nodes]
    n = len(refs)
    disc_min: dict[int, list[frozenset]] = {t: [] for t in refs}
    elim_min: dict[int, list[frozenset]] = {t: [] for t in refs}
    disc_votes: dict[tuple[frozenset, int], set[int]] = {}
    elim_votes: dict[tuple[frozenset, int], set[int]] = {}
    results: dict[tuple[frozenset, int], tuple[frozenset, frozenset]] = {}

    def minimal(found: list[frozenset], s: frozenset) -> bool:
        return not any(prev < s for prev in found)

    covered: set[int] = set()
    for size in range(0, max_source_size + 1):
        new_edges = False
        for combo in itertools.combinations(refs, size):
            s = frozenset(combo)
            for v in refs:
                d, e = trace_oracle(s, v)
                d, e = frozenset(int(x) for x in d), frozenset(int(x) for x in e)
                results[(s, v)] = (d, e)
                if size >= 1:
                    for sub in itertools.combinations(sorted(s), size - 1):
                        prev = results.get((frozenset(sub), v))
                        if prev is not None and not prev[0] <= d:
                            raise EmulationError(
                                f"discovery is not monotone: {sorted(sub)} vs {sorted(s)} on query {v}"
                            )
                for t in d:
                    if minimal(disc_min[t], s):
                        if s not in disc_min[t]:
                            disc_min[t].append(s)
                            new_edges = True
                        disc_votes.setdefault((s, t), set()).add(v)
                        covered.add(t)
                for t in e:
                    if minimal(elim_min[t], s):
                        if s not in elim_min[t]:
                            elim_min[t].append(s)
                            new_edges = True
                        elim_votes.setdefault((s, t), set()).add(v)
        if size >= 1 and not new_edges and covered >= set(refs):
            break

    def grown_region(foci: tuple[int, ...], members: set[int]):
        if not members:
            return EMPTY
        if not foci:
            if members >= set(refs):
                return UNIVERSE
            return ExplicitRegion(frozenset(members))
        feats = np.array(
            [[space.compare(p, v) for v in sorted(members)] for p in foci], dtype=float
        )
        lo, hi = np.min(feats, axis=1), np.max(feats, axis=1)
        return table1_region("cut", foci, lo=lo, hi=hi)

    edges: list[Edge] = []
    for t in refs:
        source_sets = set(disc_min[t]) | set(elim_min[t])
        for s in sorted(source_sets, key=lambda x: (len(x), sorted(x))):
            discovers = s in disc_min[t]
            eliminates = s in elim_min[t]
            foci = tuple(sorted(s))
            positive: tuple = ()
            negative: tuple = ()
            if discovers:
                disc_pts = disc_votes.get((s, t), set())
                if not foci and disc_pts >= set(refs):
                    positive = ()  # plain root edge
                else:
                    positive = (grown_region(foci, disc_pts),)
            else:
                positive = (EMPTY,)
            if eliminates:
                keep_pts = {v for v in refs if t not in results[(s, v)][1]}
                negative = (grown_region(foci, keep_pts),) if keep_pts else (EMPTY,)
            edges.append(Edge(foci, t, positive, negative))
    return Sprawl(space, refs, edges)


# --- random small instances (verification battery) --------------------------


def random_small_sprawl(rng: np.random.Generator, max_nodes: int = 6):
    """Seeded random 2-d sprawl with ball/shell labels, for property checks."""
    n = int(rng.integers(2, max_nodes + 1))
    pts = rng.random((n, 2))
    from .comparison import EuclideanSpace

    space = EuclideanSpace(pts)
    refs = list(range(n))
    edges = [Edge((), v) for v in rng.choice(n, size=max(1, n // 3), replace=False)]
    for _ in range(int(rng.integers(1, 2 * n))):
        src = int(rng.integers(0, n))
        tgt = int(rng.integers(0, n))
        radius = float(rng.random() * 1.5)
        if rng.random() < 0.5:
            region = Ambit((src,), LinearMap([[1.0]]), (radius,))
        else:
            lo = float(rng.random() * 0.5)
            region = table1_region("shell", (src,), lo=lo, hi=lo + radius)
        if rng.random() < 0.4:
            edges.append(Edge((src,), tgt, (EMPTY,), (region,)))
        else:
            edges.append(Edge((src,), tgt, (region,), ()))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return Sprawl(space, refs, edges)
