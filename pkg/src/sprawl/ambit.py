"""Ambit regions: remoteness maps, membership, and overlap checks.

An ambit is the preimage of a ball under a remoteness map applied to the
focal comparisons of a point. All overlap checks here are conservative:
they may report overlap for disjoint sets, but never miss a real overlap
(the +TOL slack is always on the permissive side).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .comparison import TOL, ComparisonSpace, CostSession, feature_map
from .errors import CapabilityError


class RemotenessMap:
    """Combines an m-vector of radients into d remoteness values."""

    arity: int  # m
    rows: int  # d

    def remoteness(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError

    def _key(self):
        def freeze(v):
            return tuple(freeze(x) for x in v) if isinstance(v, list) else v

        return tuple(sorted((k, freeze(v)) for k, v in self.describe().items()))

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


class LinearMap(RemotenessMap):
    def __init__(self, rows):
        a = np.atleast_2d(np.asarray(rows, dtype=float))
        if np.any(np.sum(np.abs(a), axis=1) == 0.0):
            raise ValueError("linear remoteness rows must be non-zero")
        self.matrix = a
        self.matrix.setflags(write=False)

    @property
    def arity(self) -> int:
        return self.matrix.shape[1]

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    def remoteness(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ x

    def describe(self) -> dict:
        return {"kind": "linear", "rows": [[float(v) for v in row] for row in self.matrix]}


class PowerMap(RemotenessMap):
    """f(x) = sum_i a_i * x_i**alpha, alpha in (0, 1].

    Non-decreasing and subadditive for a >= 0, hence metric-preserving.
    """

    rows = 1

    def __init__(self, weights, alpha: float):
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        self.weights = np.asarray(weights, dtype=float)
        self.weights.setflags(write=False)
        self.alpha = float(alpha)

    @property
    def arity(self) -> int:
        return self.weights.shape[0]

    @property
    def nondecreasing(self) -> bool:
        return bool(np.all(self.weights >= 0.0))

    def remoteness(self, x: np.ndarray) -> np.ndarray:
        return np.array([float(np.dot(self.weights, np.asarray(x, dtype=float) ** self.alpha))])

    def describe(self) -> dict:
        return {"kind": "power", "weights": [float(w) for w in self.weights], "alpha": self.alpha}


class MetaballMap(RemotenessMap):
    """f(x) = sum_i (1 - b_i * exp(-a_i * x_i)), a, b > 0.

    With all b_i = 1 (the default) f(0) = 0, which is what the
    metric-preservation guarantee requires; other offsets need the
    explicit `offset` flag and are excluded from that guarantee.
    """

    rows = 1

    def __init__(self, a, b=None, offset: bool = False):
        self.a = np.asarray(a, dtype=float)
        self.b = np.ones_like(self.a) if b is None else np.asarray(b, dtype=float)
        if np.any(self.a <= 0.0) or np.any(self.b <= 0.0):
            raise ValueError("metaball parameters must be positive")
        if not offset and abs(float(np.sum(1.0 - self.b))) > TOL:
            raise ValueError("metaball with f(0) != 0 requires offset=True")
        self.a.setflags(write=False)
        self.b.setflags(write=False)
        self.offset = bool(offset)

    @property
    def arity(self) -> int:
        return self.a.shape[0]

    nondecreasing = True

    def remoteness(self, x: np.ndarray) -> np.ndarray:
        return np.array([float(np.sum(1.0 - self.b * np.exp(-self.a * np.asarray(x, dtype=float))))])

    def describe(self) -> dict:
        return {
            "kind": "metaball",
            "a": [float(v) for v in self.a],
            "b": [float(v) for v in self.b],
            "offset": self.offset,
        }


class HamacherMap(RemotenessMap):
    """f(x1, x2) = x1*x2 / (x1 + x2 - x1*x2), with f(0, 0) = 0.

    Bifocal only, intended for radients in [0, 1]. Non-decreasing there,
    but not subadditive, so only the corner overlap check applies.
    """

    arity = 2
    rows = 1
    nondecreasing = True

    def remoteness(self, x: np.ndarray) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        denom = x1 + x2 - x1 * x2
        if denom <= 0.0:
            return np.array([0.0 if x1 == 0.0 and x2 == 0.0 else np.inf])
        return np.array([x1 * x2 / denom])

    def describe(self) -> dict:
        return {"kind": "hamacher"}


@dataclass(frozen=True)
class Ambit:
    """A region: foci refs, a remoteness map, and one radius per map row."""

    foci: tuple[int, ...]
    map: RemotenessMap
    radii: tuple[float, ...]
    orientation: str = "forward"

    def __post_init__(self):
        object.__setattr__(self, "foci", tuple(int(f) for f in self.foci))
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        if len(self.foci) != self.map.arity:
            raise ValueError("focus count must match the remoteness map arity")
        if len(self.radii) != self.map.rows:
            raise ValueError("need one radius per remoteness row")
        if self.orientation not in ("forward", "backward"):
            raise ValueError("orientation must be forward or backward")

    @property
    def degree(self) -> int:
        return len(self.foci)

    def contains_features(self, x, tol: float = 0.0) -> bool:
        rem = self.map.remoteness(np.asarray(x, dtype=float))
        return bool(np.all(rem <= np.asarray(self.radii) + tol))


def radients(space: ComparisonSpace, ambit: Ambit, u, session: CostSession | None = None) -> np.ndarray:
    """Feature vector of u for the ambit's foci, honoring orientation."""
    fv = feature_map(space, ambit.foci, u, session)
    if ambit.orientation == "backward":
        if fv.backward is None:
            return fv.as_array()
        return np.asarray(fv.backward, dtype=float)
    return fv.as_array()


def membership(space: ComparisonSpace, ambit: Ambit, u, session: CostSession | None = None, tol: float = 0.0) -> bool:
    return ambit.contains_features(radients(space, ambit, u, session), tol=tol)


# --- overlap checks ---------------------------------------------------------


def overlap_ball_rows(rows: np.ndarray, radii: np.ndarray, z: np.ndarray, s: float, tol: float = TOL) -> bool:
    """Facet-wise ball check on raw parameters: r + ||a||_1 * s >= a.z."""
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    radii = np.asarray(radii, dtype=float)
    z = np.asarray(z, dtype=float)
    lhs = radii + np.sum(np.abs(rows), axis=1) * s
    rhs = rows @ z
    return bool(np.all(lhs >= rhs - tol))


def overlap_ball(
    space: ComparisonSpace,
    region: Ambit,
    center,
    s: float,
    session: CostSession | None = None,
    tol: float = TOL,
) -> bool:
    """Does a linear ambit possibly meet the ball B[center, s]?

    Checks every facet of the defining polyhedron; a multiradial region
    overlaps only if every facet does (which may be a false positive but
    never a false negative).
    """
    if not isinstance(region.map, LinearMap):
        raise CapabilityError("overlap_ball requires a linear remoteness map")
    z = radients(space, region, center, session)
    return overlap_ball_rows(region.map.matrix, np.asarray(region.radii), z, s, tol)


def overlap_linear(region: Ambit, query: Ambit, Z, tol: float = TOL, symmetric: bool = True) -> bool:
    """Normalized overlap check between a linear ambit and a linear query.

    Z is the m x k matrix of comparisons from region foci to query foci.
    Each facet row a (and the query row c) is L1-normalized by rescaling
    its radius; the facet passes when r + s >= a Z c^T - tol. Requires a
    or c non-negative per facet; for quasimetrics (symmetric=False) both
    must be, the region forward and the query backward: with mixed signs
    the underlying weighted-triangle bound needs delta(p,u) <= delta(u,q)
    + delta(p,q), which only symmetry provides.
    """
    if not isinstance(region.map, LinearMap) or not isinstance(query.map, LinearMap):
        raise CapabilityError("overlap_linear requires linear remoteness on both sides")
    if query.map.rows != 1:
        raise CapabilityError("query side must be uniradial")
    Z = np.asarray(Z, dtype=float)
    if Z.shape != (region.degree, query.degree):
        raise ValueError("cross-distance matrix has the wrong shape")
    c = query.map.matrix[0]
    c_norm = float(np.sum(np.abs(c)))
    c_hat = c / c_norm
    s_hat = query.radii[0] / c_norm
    c_nonneg = bool(np.all(c >= 0.0))
    for a, r in zip(region.map.matrix, region.radii):
        a_norm = float(np.sum(np.abs(a)))
        a_hat = a / a_norm
        r_hat = r / a_norm
        a_nonneg = bool(np.all(a >= 0.0))
        ok = (a_nonneg and c_nonneg) if not symmetric else (a_nonneg or c_nonneg)
        if not ok:
            raise CapabilityError(
                "weights must be non-negative on one side (both, for asymmetric comparisons)"
            )
        if r_hat + s_hat < float(a_hat @ Z @ c_hat) - tol:
            return False
    return True


def overlap_monotone(
    space: ComparisonSpace,
    region: Ambit,
    center,
    s: float,
    session: CostSession | None = None,
    tol: float = TOL,
    decreasing: bool = False,
) -> bool:
    """Ball check for monotone structure-preserving maps: r +- f(s,..,s) >= f(z).

    The plus branch needs a non-decreasing subadditive map (power with
    non-negative weights, metaball); the minus branch, behind
    `decreasing=True`, needs a non-increasing superadditive one (no
    built-in map qualifies; callers supply their own with a
    `nonincreasing_superadditive` attribute).
    """
    m = region.map
    if decreasing:
        if not getattr(m, "nonincreasing_superadditive", False):
            raise CapabilityError("the minus branch needs a non-increasing superadditive map")
        z = radients(space, region, center, session)
        f_z = m.remoteness(z)
        f_s = m.remoteness(np.full(region.degree, float(s)))
        return bool(np.all(np.asarray(region.radii) - f_s >= f_z - tol))
    subadditive = isinstance(m, MetaballMap) or (isinstance(m, PowerMap) and m.nondecreasing)
    if not subadditive:
        raise CapabilityError("overlap_monotone requires a non-decreasing subadditive map")
    z = radients(space, region, center, session)
    f_z = m.remoteness(z)
    f_s = m.remoteness(np.full(region.degree, float(s)))
    return bool(np.all(np.asarray(region.radii) + f_s >= f_z - tol))


def overlap_corner(
    space: ComparisonSpace,
    region: Ambit,
    center,
    s: float,
    session: CostSession | None = None,
    tol: float = TOL,
) -> bool:
    """Ball check via the near corner of the feature box: f(max(z-s, 0)) <= r.

    Valid for any map that is non-decreasing in each radient, in a
    symmetric (metric) space; this is the only check available for the
    Hamacher product.
    """
    m = region.map
    if isinstance(m, LinearMap):
        if np.any(m.matrix < 0.0):
            raise CapabilityError("corner check requires a non-decreasing map")
    elif not getattr(m, "nondecreasing", False):
        raise CapabilityError("corner check requires a non-decreasing map")
    z = radients(space, region, center, session)
    corner = np.maximum(z - float(s), 0.0)
    return bool(np.all(m.remoteness(corner) <= np.asarray(region.radii) + tol))


# --- classic region shapes --------------------------------------------------


def table1_region(kind: str, foci, **params) -> Ambit:
    """Classic comparison-based region shapes expressed as linear ambits."""
    foci = tuple(int(f) for f in foci)
    m = len(foci)

    def need(n):
        if m != n:
            raise ValueError(f"{kind} region needs exactly {n} focus/foci, got {m}")

    if kind == "ball":
        need(1)
        return Ambit(foci, LinearMap([[1.0]]), (float(params["r"]),))
    if kind == "sphere":
        need(1)
        r = float(params["r"])
        return Ambit(foci, LinearMap([[1.0], [-1.0]]), (r, -r))
    if kind == "shell":
        need(1)
        lo, hi = float(params["lo"]), float(params["hi"])
        if lo > hi:
            raise ValueError("shell needs lo <= hi")
        return Ambit(foci, LinearMap([[1.0], [-1.0]]), (hi, -lo))
    if kind == "plane":
        need(2)
        return Ambit(foci, LinearMap([[1.0, -1.0]]), (0.0,))
    if kind == "ellipse":
        need(2)
        return Ambit(foci, LinearMap([[1.0, 1.0]]), (float(params["r"]),))
    if kind == "hyperbola":
        need(2)
        return Ambit(foci, LinearMap([[1.0, -1.0]]), (float(params["r"]),))
    if kind == "voronoi":
        cell = int(params.get("cell", 0))
        if m < 2:
            raise ValueError("voronoi needs at least 2 foci")
        if not 0 <= cell < m:
            raise IndexError("voronoi cell index out of range")
        rows = []
        for j in range(m):
            if j == cell:
                continue
            row = np.zeros(m)
            row[cell] = 1.0
            row[j] = -1.0
            rows.append(row)
        return Ambit(foci, LinearMap(rows), tuple(0.0 for _ in rows))
    if kind == "cut":
        lo = np.asarray(params["lo"], dtype=float)
        hi = np.asarray(params["hi"], dtype=float)
        if lo.shape != (m,) or hi.shape != (m,):
            raise ValueError("cut region needs per-focus lo and hi radii")
        if np.any(lo > hi):
            raise ValueError("cut region needs lo <= hi per focus")
        rows = np.vstack([np.eye(m), -np.eye(m)])
        radii = tuple(float(v) for v in np.concatenate([hi, -lo]))
        return Ambit(foci, LinearMap(rows), radii)
    raise ValueError(f"unknown region kind {kind!r}")
