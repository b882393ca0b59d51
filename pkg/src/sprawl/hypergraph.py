"""Signed directed hypergraphs and their traversal.

Positive edges discover their target once all sources are traversed;
negative edges eliminate it. The exhaustive repertoire enumerator and the
traversal-axiom checker below are the verification oracles for the rest
of the package.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import SizeLimitError

UNDISCOVERED, AVAILABLE, TRAVERSED, ELIMINATED = 0, 1, 2, 3


@dataclass(frozen=True)
class HyperEdge:
    sources: frozenset[int]
    target: int
    sign: int

    def __post_init__(self):
        object.__setattr__(self, "sources", frozenset(int(s) for s in self.sources))
        object.__setattr__(self, "target", int(self.target))
        if self.sign not in (-1, 1):
            raise ValueError("edge sign must be +1 or -1")


class SignedHyperdigraph:
    def __init__(self, node_count: int, edges):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = int(node_count)
        self.edges: tuple[HyperEdge, ...] = tuple(
            e if isinstance(e, HyperEdge) else HyperEdge(frozenset(e[0]), e[1], e[2]) for e in edges
        )
        for e in self.edges:
            if not 0 <= e.target < self.node_count or any(not 0 <= s < self.node_count for s in e.sources):
                raise IndexError(f"edge {e} refers to nodes outside [0, {self.node_count})")
            if e.target in e.sources:
                warnings.warn(f"edge into {e.target} lists it as a source and can never fire usefully")

    def roots(self) -> list[int]:
        return sorted({e.target for e in self.edges if not e.sources and e.sign > 0})


@dataclass
class Heuristic:
    """Tie-breaking policy for the choice among available nodes."""

    kind: str
    key: object | None = None
    order: tuple[int, ...] | None = None

    @classmethod
    def fifo(cls) -> "Heuristic":
        return cls("fifo")

    @classmethod
    def lifo(cls) -> "Heuristic":
        return cls("lifo")

    @classmethod
    def priority(cls, key) -> "Heuristic":
        return cls("priority", key=key)

    @classmethod
    def explicit(cls, order) -> "Heuristic":
        order = tuple(int(v) for v in order)
        if len(set(order)) != len(order):
            raise ValueError("explicit order must not repeat nodes")
        return cls("explicit", order=order)


class TraversalState:
    """Reusable per-traversal scratch state.

    All arrays are epoch-stamped: reset() bumps the epoch instead of
    reallocating, so state reuse across many queries is O(1).
    """

    def __init__(self, node_count: int, edge_count: int):
        self.node_count = node_count
        self.edge_count = edge_count
        self.epoch = 0
        self._status = np.zeros(node_count, dtype=np.int8)
        self._status_stamp = np.full(node_count, -1, dtype=np.int64)
        self._remaining = np.zeros(edge_count, dtype=np.int64)
        self._remaining_stamp = np.full(edge_count, -1, dtype=np.int64)
        self._used = np.zeros(edge_count, dtype=bool)
        self._used_stamp = np.full(edge_count, -1, dtype=np.int64)
        self._seq = np.zeros(node_count, dtype=np.int64)

    def reset(self) -> None:
        self.epoch += 1

    def status(self, v: int) -> int:
        return int(self._status[v]) if self._status_stamp[v] == self.epoch else UNDISCOVERED

    def set_status(self, v: int, st: int) -> None:
        self._status[v] = st
        self._status_stamp[v] = self.epoch

    def remaining(self, e: int, initial: int) -> int:
        return int(self._remaining[e]) if self._remaining_stamp[e] == self.epoch else initial

    def set_remaining(self, e: int, value: int) -> None:
        self._remaining[e] = value
        self._remaining_stamp[e] = self.epoch

    def used(self, e: int) -> bool:
        return bool(self._used[e]) if self._used_stamp[e] == self.epoch else False

    def set_used(self, e: int) -> None:
        self._used[e] = True
        self._used_stamp[e] = self.epoch


def _select(available: list[int], h: Heuristic, seq: dict[int, int]):
    """Pick the next node among the available ones, or None to stop."""
    if not available:
        return None
    if h.kind == "fifo":
        return min(available, key=lambda v: (seq[v], v))
    if h.kind == "lifo":
        return max(available, key=lambda v: (seq[v], -v))
    if h.kind == "priority":
        return min(available, key=lambda v: (h.key(v), seq[v], v))
    if h.kind == "explicit":
        pos = {v: i for i, v in enumerate(h.order)}
        ranked = [v for v in available if v in pos]
        if not ranked:
            return None  # order exhausted: stop with a (prefix) traversal
        return min(ranked, key=lambda v: pos[v])
    raise ValueError(f"unknown heuristic kind {h.kind!r}")


def traverse(g: SignedHyperdigraph, h: Heuristic | None = None, state: TraversalState | None = None) -> list[int]:
    """Run one traversal of g under the heuristic h.

    Loop shape: activate every edge whose sources are all traversed, let
    active negative edges eliminate and active positive edges discover
    (elimination is permanent and beats discovery in the same round),
    then traverse one available node. Stops when none are available.
    """
    h = h or Heuristic.fifo()
    if state is None:
        state = TraversalState(g.node_count, len(g.edges))
    state.reset()
    out_edges: dict[int, list[int]] = {}
    initial = [len(e.sources) for e in g.edges]
    pending = []  # edges that just became active
    for i, e in enumerate(g.edges):
        if not e.sources:
            pending.append(i)
        for s in e.sources:
            out_edges.setdefault(s, []).append(i)

    available: set[int] = set()
    seq: dict[int, int] = {}
    counter = 0
    order: list[int] = []

    def fire(edge_ids):
        nonlocal counter
        for i in edge_ids:
            if state.used(i):
                continue
            state.set_used(i)
            e = g.edges[i]
            t = e.target
            if state.status(t) in (TRAVERSED, ELIMINATED):
                continue
            if e.sign < 0:
                state.set_status(t, ELIMINATED)
                available.discard(t)
            else:
                if state.status(t) == UNDISCOVERED:
                    state.set_status(t, AVAILABLE)
                    available.add(t)
                    seq[t] = counter
                    counter += 1

    fire(pending)
    while True:
        v = _select(sorted(available), h, seq)
        if v is None:
            break
        available.discard(v)
        state.set_status(v, TRAVERSED)
        order.append(v)
        ready = []
        for i in out_edges.get(v, ()):
            rem = state.remaining(i, initial[i]) - 1
            state.set_remaining(i, rem)
            if rem == 0:
                ready.append(i)
        fire(ready)
    return order


def feasible_after(g: SignedHyperdigraph, traversed: frozenset[int]) -> frozenset[int]:
    """Nodes traversable next, as a function of the traversed *set* only.

    Discovery and elimination in the traversal depend only on which nodes
    have been traversed (elimination is permanent, and the activation
    gate ignores order), so this quotient is exact.
    """
    discovered = set()
    eliminated = set()
    for e in g.edges:
        if e.sources <= traversed:
            (eliminated if e.sign < 0 else discovered).add(e.target)
    return frozenset((discovered - eliminated) - traversed)


def enumerate_repertoire(g: SignedHyperdigraph, cap: int = 8) -> set[tuple[int, ...]]:
    """All traversals attainable by varying the heuristic, prefixes included."""
    if g.node_count > cap:
        raise SizeLimitError(f"repertoire enumeration capped at {cap} nodes, graph has {g.node_count}")
    cont_cache: dict[frozenset[int], frozenset[int]] = {}

    def cont(s: frozenset[int]) -> frozenset[int]:
        got = cont_cache.get(s)
        if got is None:
            got = cont_cache[s] = feasible_after(g, s)
        return got

    out: set[tuple[int, ...]] = set()
    stack: list[tuple[tuple[int, ...], frozenset[int]]] = [((), frozenset())]
    while stack:
        prefix, s = stack.pop()
        out.add(prefix)
        for x in cont(s):
            stack.append((prefix + (x,), s | {x}))
    return out


@dataclass
class AxiomReport:
    passed: bool
    failures: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def check_traversal_axioms(repertoire, node_count: int) -> AxiomReport:
    """Check T1 (non-emptiness), T2 (simplicity), T3 (heredity), T4 (interval).

    T4 is checked over traversed-set representatives: whenever sets
    A <= T <= W are realized, a continuation witnessed both after A and
    after W must be feasible after every sequence realizing T.
    """
    lang = {tuple(t) for t in repertoire}
    failures = []
    if () not in lang:
        failures.append(("T1", "empty sequence missing"))
    for t in lang:
        if len(set(t)) != len(t):
            failures.append(("T2", t))
        if t and t[:-1] not in lang:
            failures.append(("T3", t))
        if any(not 0 <= v < node_count for v in t):
            failures.append(("T2", f"node out of range in {t}"))
    if failures:
        return AxiomReport(False, failures)

    by_set: dict[frozenset[int], list[tuple[int, ...]]] = {}
    for t in lang:
        by_set.setdefault(frozenset(t), []).append(t)
    # witnessed continuations per realized set
    cont: dict[frozenset[int], set[int]] = {s: set() for s in by_set}
    for t in lang:
        if t:
            cont[frozenset(t[:-1])].add(t[-1])
    sets = sorted(by_set, key=len)
    for a in sets:
        for w in sets:
            if not (a <= w):
                continue
            shared = cont[a] & cont[w]
            if not shared:
                continue
            for t in sets:
                if a <= t <= w:
                    for x in shared - cont[t]:
                        if x not in t:
                            failures.append(("T4", (sorted(a), sorted(t), sorted(w), x)))
                            return AxiomReport(False, failures)
    return AxiomReport(True, [])


def format_graph(g: SignedHyperdigraph) -> str:
    """Line-oriented debug dump: one `sign target <- s1 s2 ...` per edge."""
    lines = [f"nodes {g.node_count}"]
    for e in g.edges:
        sources = " ".join(str(s) for s in sorted(e.sources))
        lines.append(f"{'+' if e.sign > 0 else '-'} {e.target} <-{(' ' + sources) if sources else ''}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> SignedHyperdigraph:
    node_count = None
    edges = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "nodes":
            node_count = int(parts[1])
            continue
        if parts[0] not in ("+", "-") or len(parts) < 3 or parts[2] != "<-":
            raise ValueError(f"line {lineno}: expected `sign target <- sources...`")
        sign = 1 if parts[0] == "+" else -1
        target = int(parts[1])
        sources = frozenset(int(s) for s in parts[3:])
        edges.append(HyperEdge(sources, target, sign))
    if node_count is None:
        node_count = 1 + max(
            [e.target for e in edges] + [s for e in edges for s in e.sources], default=-1
        )
    return SignedHyperdigraph(node_count, edges)


def format_traversal(order) -> str:
    return " ".join(str(v) for v in order) + "\n"


def random_hyperdigraph(
    rng: np.random.Generator,
    max_nodes: int = 6,
    max_edges: int = 10,
    root_bias: float = 0.5,
) -> SignedHyperdigraph:
    """Seeded random instance generator for the axiom test battery."""
    n = int(rng.integers(1, max_nodes + 1))
    edge_count = int(rng.integers(0, max_edges + 1))
    edges = []
    for _ in range(edge_count):
        size = int(rng.integers(0, min(3, n) + 1))
        if size and rng.random() > root_bias:
            sources = frozenset(int(v) for v in rng.choice(n, size=size, replace=False))
        else:
            sources = frozenset()
        target = int(rng.integers(0, n))
        sign = -1 if rng.random() < 0.35 else 1
        edges.append(HyperEdge(sources, target, sign))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return SignedHyperdigraph(n, edges)
