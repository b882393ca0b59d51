"""Point universes, comparison functions, feature maps, queries and workloads.

Every distance used anywhere in the package is computed here, so the
per-query cost metric (number of comparison evaluations) has a single home.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

#: Ordering tolerance for all comparison-valued checks. Comparisons are
#: 64-bit floats; every ">=" test elsewhere gets this much slack on the
#: permissive side so rounding can only create false positives.
TOL = 1e-9


@dataclass
class CostSession:
    """Per-query accumulator of comparison evaluations.

    Spaces are immutable and shared; each search owns one of these, so no
    mutable state is shared between concurrent queries.
    """

    distance_computations: int = 0

    def charge(self, n: int = 1) -> None:
        self.distance_computations += n


class ComparisonSpace:
    """A universe of points plus a comparison function over them.

    Points are addressed by integer refs. `compare` also accepts raw values
    (coordinate tuples / strings) in place of refs, which is how query
    centers that are not dataset members are handled.
    """

    kind: str = "abstract"
    symmetric: bool = True

    def __len__(self) -> int:
        raise NotImplementedError

    def value(self, ref: int):
        """Return the underlying universe element for a ref."""
        raise NotImplementedError

    def _resolve(self, u):
        if isinstance(u, (int, np.integer)):
            return self.value(int(u))
        return self._coerce(u)

    def _coerce(self, raw):
        raise TypeError(f"{self.kind} space cannot compare raw value {raw!r}")

    def _dist(self, a, b) -> float:
        raise NotImplementedError

    def compare(self, u, v, session: CostSession | None = None) -> float:
        """delta(u, v); counts one comparison on the session."""
        d = self._dist(self._resolve(u), self._resolve(v))
        if session is not None:
            session.charge()
        return d

    def distances_from(self, u, refs, session: CostSession | None = None) -> np.ndarray:
        """Vector of delta(u, ref) for each ref; counts len(refs) comparisons."""
        a = self._resolve(u)
        out = np.array([self._dist(a, self.value(int(r))) for r in refs], dtype=float)
        if session is not None:
            session.charge(len(out))
        return out

    def pairwise(self, refs_a, refs_b) -> np.ndarray:
        """Uncounted bulk distance block, for index construction."""
        return np.array(
            [[self._dist(self.value(int(a)), self.value(int(b))) for b in refs_b] for a in refs_a],
            dtype=float,
        )


class EuclideanSpace(ComparisonSpace):
    """R^d under the Lp norm (default L2). Metric for p >= 1."""

    kind = "euclidean-lp"

    def __init__(self, points, p: float = 2.0):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        if not (p >= 1.0 or np.isinf(p)):
            raise ValueError("Lp comparison requires p >= 1")
        self.points = pts
        self.points.setflags(write=False)
        self.p = float(p)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def value(self, ref: int):
        return self.points[ref]

    def _coerce(self, raw):
        a = np.asarray(raw, dtype=float)
        if a.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}")
        return a

    def _dist(self, a, b) -> float:
        diff = np.abs(a - b)
        if self.p == 2.0:
            return float(np.sqrt(np.sum(diff * diff)))
        if self.p == 1.0:
            return float(np.sum(diff))
        if np.isinf(self.p):
            return float(np.max(diff))
        return float(np.sum(diff**self.p) ** (1.0 / self.p))

    def distances_from(self, u, refs, session: CostSession | None = None) -> np.ndarray:
        a = self._resolve(u)
        block = self.points[np.asarray(refs, dtype=int)]
        diff = np.abs(block - a)
        if self.p == 2.0:
            out = np.sqrt(np.sum(diff * diff, axis=1))
        elif self.p == 1.0:
            out = np.sum(diff, axis=1)
        elif np.isinf(self.p):
            out = np.max(diff, axis=1)
        else:
            out = np.sum(diff**self.p, axis=1) ** (1.0 / self.p)
        if session is not None:
            session.charge(len(out))
        return out

    def pairwise(self, refs_a, refs_b) -> np.ndarray:
        a = self.points[np.asarray(refs_a, dtype=int)]
        b = self.points[np.asarray(refs_b, dtype=int)]
        diff = np.abs(a[:, None, :] - b[None, :, :])
        if self.p == 2.0:
            return np.sqrt(np.sum(diff * diff, axis=2))
        if self.p == 1.0:
            return np.sum(diff, axis=2)
        if np.isinf(self.p):
            return np.max(diff, axis=2)
        return np.sum(diff**self.p, axis=2) ** (1.0 / self.p)


class ProjectionSpace(ComparisonSpace):
    """Coordinate projection: delta(axis_i, u) = u_i.

    Provides one pseudo-focus per dimension (refs n..n+d-1 for n data
    points), so polytopes in the indexed space itself can be expressed as
    linear regions. Between two data points the comparison falls back to
    L2 so that ball queries keep their usual meaning.
    """

    kind = "coordinate-projection"

    def __init__(self, points):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        self.points = pts
        self.points.setflags(write=False)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    def axis_ref(self, i: int) -> int:
        if not 0 <= i < self.dimension:
            raise IndexError(f"axis {i} out of range")
        return self.points.shape[0] + i

    def is_axis(self, ref) -> bool:
        return isinstance(ref, (int, np.integer)) and int(ref) >= self.points.shape[0]

    def value(self, ref: int):
        n = self.points.shape[0]
        if ref < n:
            return self.points[ref]
        axis = ref - n
        if axis >= self.dimension:
            raise IndexError(f"ref {ref} out of range")
        return ("axis", axis)

    def _coerce(self, raw):
        a = np.asarray(raw, dtype=float)
        if a.shape != (self.dimension,):
            raise ValueError(f"expected a point of dimension {self.dimension}")
        return a

    def _dist(self, a, b) -> float:
        a_axis = isinstance(a, tuple) and a[0] == "axis"
        b_axis = isinstance(b, tuple) and b[0] == "axis"
        if a_axis and b_axis:
            if a[1] == b[1]:
                return 0.0
            raise ValueError("two distinct axis pseudo-foci are incomparable")
        if a_axis:
            return float(b[a[1]])
        if b_axis:
            return float(a[b[1]])
        diff = a - b
        return float(np.sqrt(np.sum(diff * diff)))


class MatrixSpace(ComparisonSpace):
    """Comparison given by an explicit n x n matrix over abstract ids."""

    kind = "explicit-matrix"

    def __init__(self, matrix, symmetric: bool | None = None):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("matrix must be square")
        if np.any(np.diag(m) != 0.0):
            raise ValueError("matrix diagonal must be zero")
        if np.any(m < 0.0):
            raise ValueError("matrix entries must be non-negative")
        detected = bool(np.array_equal(m, m.T))
        if symmetric is None:
            symmetric = detected
        elif symmetric and not detected:
            raise ValueError("matrix declared symmetric but is not equal to its transpose")
        self.matrix = m
        self.matrix.setflags(write=False)
        self.symmetric = symmetric

    def __len__(self) -> int:
        return self.matrix.shape[0]

    def value(self, ref: int):
        if not 0 <= ref < len(self):
            raise IndexError(f"ref {ref} out of range")
        return ref

    def _coerce(self, raw):
        raise TypeError("explicit-matrix spaces only compare point refs")

    def _dist(self, a, b) -> float:
        return float(self.matrix[a, b])

    def distances_from(self, u, refs, session: CostSession | None = None) -> np.ndarray:
        row = self.matrix[self._resolve(u), np.asarray(refs, dtype=int)].astype(float)
        if session is not None:
            session.charge(len(row))
        return row

    def pairwise(self, refs_a, refs_b) -> np.ndarray:
        return self.matrix[np.ix_(np.asarray(refs_a, int), np.asarray(refs_b, int))].astype(float)


def levenshtein(a: str, b: str) -> int:
    """Classic edit distance (insert/delete/substitute), O(len(a)*len(b))."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


class StringSpace(ComparisonSpace):
    """Strings under Levenshtein distance; metric by construction."""

    kind = "levenshtein-strings"

    def __init__(self, strings):
        self.strings = tuple(str(s) for s in strings)

    def __len__(self) -> int:
        return len(self.strings)

    def value(self, ref: int):
        return self.strings[ref]

    def _coerce(self, raw):
        if not isinstance(raw, str):
            raise TypeError("string spaces only compare strings")
        return raw

    def _dist(self, a, b) -> float:
        return float(levenshtein(a, b))


@dataclass(frozen=True)
class FeatureVector:
    """Forward (and, for asymmetric spaces, backward) focal comparisons."""

    values: tuple[float, ...]
    backward: tuple[float, ...] | None = None

    def __len__(self) -> int:
        return len(self.values)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


def feature_map(space: ComparisonSpace, foci, u, session: CostSession | None = None) -> FeatureVector:
    """Map a point to its comparisons with the given foci.

    The backward tuple is filled only for asymmetric spaces, where
    delta(u, p) need not equal delta(p, u).
    """
    foci = tuple(foci)
    if not foci:
        raise ValueError("feature_map needs at least one focus")
    values = tuple(space.compare(p, u, session) for p in foci)
    backward = None
    if not space.symmetric:
        backward = tuple(space.compare(u, p, session) for p in foci)
    return FeatureVector(values=values, backward=backward)


# --- queries and workloads -------------------------------------------------


@dataclass
class Ball:
    """All points within `radius` of `center`; `k` turns it into a kNN query."""

    center: object
    radius: float = 0.0
    k: int | None = None

    def __post_init__(self):
        if self.k is None and self.radius < 0:
            raise ValueError("ball radius must be non-negative")
        if self.k is not None and self.k < 1:
            raise ValueError("k must be a positive integer")
        if isinstance(self.center, np.ndarray):
            self.center = tuple(float(c) for c in self.center)


@dataclass
class AmbitQuery:
    """A weighted-focal query: points whose combined remoteness is <= radius."""

    foci: tuple[int, ...]
    weights: tuple[float, ...]
    radius: float

    def __post_init__(self):
        self.foci = tuple(int(f) for f in self.foci)
        self.weights = tuple(float(w) for w in self.weights)
        if not self.weights or len(self.weights) != len(self.foci):
            raise ValueError("need one weight per focus, at least one focus")


@dataclass
class ExplicitSetQuery:
    """A query given extensionally by node ids."""

    ids: frozenset[int]

    def __post_init__(self):
        self.ids = frozenset(int(i) for i in self.ids)


Query = Ball | AmbitQuery | ExplicitSetQuery


@dataclass
class Workload:
    queries: tuple
    atomistic: bool = False

    def __post_init__(self):
        self.queries = tuple(self.queries)


# --- gadget and verification helpers ---------------------------------------


def build_hardness_gadget(adjacency, epsilon: float) -> tuple[MatrixSpace, int]:
    """Build the focus-selection test metric from a simple undirected graph.

    Distances over V plus one extra query point q: 0 on the diagonal, 2
    across graph edges, 3 across non-edges, 3+epsilon to q. Returns the
    space and the ref of q (the last point). The metric axioms are checked
    before returning.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    n = len(adjacency)
    adj = [set(int(v) for v in row) for row in adjacency]
    for u, row in enumerate(adj):
        if u in row:
            raise ValueError("graph must be simple (no self-loops)")
        for v in row:
            if not 0 <= v < n:
                raise IndexError(f"adjacency refers to unknown node {v}")
            if u not in adj[v]:
                raise ValueError("graph must be undirected (symmetric adjacency)")
    m = np.full((n + 1, n + 1), 3.0)
    for u in range(n):
        for v in range(n):
            if u == v:
                m[u, v] = 0.0
            elif v in adj[u]:
                m[u, v] = 2.0
    m[n, :] = 3.0 + epsilon
    m[:, n] = 3.0 + epsilon
    m[n, n] = 0.0
    space = MatrixSpace(m, symmetric=True)
    ok, witness = check_triangle(space, exhaustive_limit=max(n + 1, 12))
    if not ok:  # cannot happen: off-diagonal entries lie in [2, 3+eps], eps <= 1
        raise AssertionError(f"gadget metric violates the triangle inequality at {witness}")
    return space, n


def check_triangle(
    space: ComparisonSpace,
    samples: int = 10_000,
    tol: float = TOL,
    rng: np.random.Generator | None = None,
    exhaustive_limit: int = 12,
):
    """Test delta(u,w) <= delta(u,v) + delta(v,w) on triples.

    Exhaustive when the space is small, sampled otherwise. Returns
    (ok, witness) where witness is a violating (u, v, w) triple or None.
    """
    n = len(space)
    if n < 3:
        return True, None
    if n <= exhaustive_limit:
        triples = itertools.product(range(n), repeat=3)
    else:
        rng = rng or np.random.default_rng(0)
        triples = (tuple(int(x) for x in rng.integers(0, n, size=3)) for _ in range(samples))
    for u, v, w in triples:
        if space.compare(u, w) > space.compare(u, v) + space.compare(v, w) + tol:
            return False, (u, v, w)
    return True, None


def oriented_triangle_ok(space: ComparisonSpace, u: int, v: int, w: int, tol: float = TOL) -> bool:
    return space.compare(u, w) <= space.compare(u, v) + space.compare(v, w) + tol
