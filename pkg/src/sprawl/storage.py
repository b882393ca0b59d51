"""Dataset ingestion and versioned index persistence.

The index file is self-describing JSON: a space descriptor, the ground
set, edges with region parameter blocks as plain numeric arrays, compact
shell groups, and an optional responsibility assignment. Floats survive
the round trip bit-exactly (shortest-repr serialization).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .ambit import Ambit, HamacherMap, LinearMap, MetaballMap, PowerMap
from .comparison import ComparisonSpace, EuclideanSpace, MatrixSpace, ProjectionSpace, StringSpace
from .engine import EMPTY, UNIVERSE, Edge, Empty, ExplicitRegion, ResponsibilityAssignment, ShellGroup, Sprawl, Universe
from .errors import FormatError

FORMAT_NAME = "sprawl-index"
FORMAT_VERSION = 1


# --- datasets ----------------------------------------------------------------


def load_points(path) -> np.ndarray:
    """One point per line, whitespace- or comma-separated decimals."""
    rows = []
    width = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(",", " ").split()
        try:
            row = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from None
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise FormatError(f"{path}:{lineno}: expected {width} coordinates, got {len(row)}")
        rows.append(row)
    if not rows:
        raise FormatError(f"{path}: dataset is empty")
    return np.array(rows, dtype=float)


def load_strings(path) -> list[str]:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln]
    if not lines:
        raise FormatError(f"{path}: dataset is empty")
    return lines


def load_matrix(path) -> np.ndarray:
    m = load_points(path)
    if m.shape[0] != m.shape[1]:
        raise FormatError(f"{path}: matrix must be square, got {m.shape}")
    return m


def save_points(path, points: np.ndarray) -> None:
    lines = [" ".join(repr(float(v)) for v in row) for row in np.atleast_2d(points)]
    Path(path).write_text("\n".join(lines) + "\n")


def gen_points(
    kind: str,
    count: int,
    dims: int,
    seed: int,
    clusters: int = 8,
    spread: float = 0.05,
) -> np.ndarray:
    """Synthetic datasets in [0, 1]^dims: uniform or gaussian-clustered."""
    rng = np.random.default_rng(seed)
    if kind == "uniform":
        return rng.random((count, dims))
    if kind == "clustered":
        centers = rng.random((clusters, dims))
        assign = rng.integers(0, clusters, size=count)
        pts = centers[assign] + rng.normal(scale=spread, size=(count, dims))
        return np.clip(pts, 0.0, 1.0)
    raise ValueError(f"unknown dataset kind {kind!r}")


# --- space and region descriptors --------------------------------------------


def describe_space(space: ComparisonSpace) -> dict:
    if isinstance(space, EuclideanSpace):
        return {"kind": space.kind, "p": space.p, "points": _floats2d(space.points)}
    if isinstance(space, ProjectionSpace):
        return {"kind": space.kind, "points": _floats2d(space.points)}
    if isinstance(space, MatrixSpace):
        return {"kind": space.kind, "symmetric": space.symmetric, "matrix": _floats2d(space.matrix)}
    if isinstance(space, StringSpace):
        return {"kind": space.kind, "strings": list(space.strings)}
    raise TypeError(f"cannot serialize space {space!r}")


def space_from_descriptor(doc: dict) -> ComparisonSpace:
    kind = doc.get("kind")
    if kind == "euclidean-lp":
        return EuclideanSpace(doc["points"], p=doc.get("p", 2.0))
    if kind == "coordinate-projection":
        return ProjectionSpace(doc["points"])
    if kind == "explicit-matrix":
        return MatrixSpace(doc["matrix"], symmetric=doc.get("symmetric"))
    if kind == "levenshtein-strings":
        return StringSpace(doc["strings"])
    raise FormatError(f"unknown space kind {kind!r}")


def _floats(xs) -> list[float]:
    return [float(v) for v in xs]


def _floats2d(xs) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.atleast_2d(xs)]


def describe_region(region) -> dict:
    if isinstance(region, Universe):
        return {"kind": "universe"}
    if isinstance(region, Empty):
        return {"kind": "empty"}
    if isinstance(region, ExplicitRegion):
        return {"kind": "explicit-set", "ids": sorted(region.ids)}
    if isinstance(region, Ambit):
        return {
            "kind": "ambit",
            "foci": list(region.foci),
            "radii": _floats(region.radii),
            "orientation": region.orientation,
            "map": region.map.describe(),
        }
    raise TypeError(f"cannot serialize region {region!r}")


def region_from_descriptor(doc: dict):
    kind = doc.get("kind")
    if kind == "universe":
        return UNIVERSE
    if kind == "empty":
        return EMPTY
    if kind == "explicit-set":
        return ExplicitRegion(frozenset(doc["ids"]))
    if kind == "ambit":
        m = doc["map"]
        mk = m.get("kind")
        if mk == "linear":
            remote = LinearMap(m["rows"])
        elif mk == "power":
            remote = PowerMap(m["weights"], m["alpha"])
        elif mk == "metaball":
            remote = MetaballMap(m["a"], m["b"], offset=m.get("offset", False))
        elif mk == "hamacher":
            remote = HamacherMap()
        else:
            raise FormatError(f"unknown remoteness kind {mk!r}")
        return Ambit(tuple(doc["foci"]), remote, tuple(doc["radii"]), doc.get("orientation", "forward"))
    raise FormatError(f"unknown region kind {kind!r}")


# --- index files --------------------------------------------------------------


def index_document(sprawl: Sprawl, res: ResponsibilityAssignment | None = None) -> dict:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "space": describe_space(sprawl.space),
        "nodes": list(sprawl.nodes),
        "edges": [
            {
                "sources": list(e.sources),
                "target": e.target,
                "positive": [describe_region(r) for r in e.positive],
                "negative": [describe_region(r) for r in e.negative],
                "lazy": e.lazy,
            }
            for e in sprawl.edges
        ],
        "groups": [
            {
                "source": g.source,
                "targets": [int(t) for t in g.targets],
                "lo": _floats(g.lo),
                "hi": _floats(g.hi),
                "lazy": g.lazy,
            }
            for g in sprawl.groups
        ],
    }
    if res is not None:
        doc["responsibility"] = {str(k): sorted(v) for k, v in sorted(res.edge_to_nodes.items())}
    return doc


def save_index(path, sprawl: Sprawl, res: ResponsibilityAssignment | None = None) -> None:
    Path(path).write_text(json.dumps(index_document(sprawl, res), indent=1) + "\n")


def index_from_document(doc: dict) -> tuple[Sprawl, ResponsibilityAssignment | None]:
    if doc.get("format") != FORMAT_NAME:
        raise FormatError(f"not a {FORMAT_NAME} document")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {doc.get('version')!r}")
    space = space_from_descriptor(doc["space"])
    edges = [
        Edge(
            tuple(e["sources"]),
            e["target"],
            tuple(region_from_descriptor(r) for r in e.get("positive", [])),
            tuple(region_from_descriptor(r) for r in e.get("negative", [])),
            lazy=e.get("lazy", False),
        )
        for e in doc.get("edges", [])
    ]
    groups = [
        ShellGroup(
            g["source"],
            np.array(g["targets"], dtype=np.int64),
            np.array(g["lo"], dtype=float),
            np.array(g["hi"], dtype=float),
            lazy=g.get("lazy", False),
        )
        for g in doc.get("groups", [])
    ]
    sprawl = Sprawl(space, doc["nodes"], edges, groups)
    res = None
    if "responsibility" in doc:
        res = ResponsibilityAssignment(
            {int(k): frozenset(v) for k, v in doc["responsibility"].items()}
        )
    return sprawl, res


def load_index(path) -> tuple[Sprawl, ResponsibilityAssignment | None]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return index_from_document(doc)
