"""TSP instances: point sets, metrics, seeded generators and TSPLIB I/O.

All randomness flows through numpy's PCG64 bit generator, seeded explicitly,
so instances are reproducible bit-for-bit across platforms for a given
(parameters, seed) pair.  The TSPLIB support is a deliberately small subset:
EUC_2D (distances rounded half-up to the nearest integer, the TSPLIB
convention) plus a nonstandard EUC_2D_REAL keyword for exact Euclidean
distances.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ParseError

# Full n x n distance matrices are cached only below this node count;
# larger instances compute distance blocks from coordinates on demand.
MATRIX_CACHE_LIMIT = 3200


class MetricKind(Enum):
    EUCLID_REAL = "EUC_2D_REAL"
    EUCLID_ROUNDED_TSPLIB = "EUC_2D"
    EXPLICIT_MATRIX = "EXPLICIT"


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")


@dataclass(frozen=True, eq=False)
class Metric:
    """Distance semantics for an instance.

    ``matrix`` is set only for EXPLICIT_MATRIX and is validated for symmetry,
    zero diagonal and nonnegativity on construction.  The triangle inequality
    of an explicit matrix is checked only on demand (``max_triangle_violation``).
    """

    kind: MetricKind
    matrix: Optional[np.ndarray] = None

    @staticmethod
    def euclid() -> "Metric":
        return Metric(MetricKind.EUCLID_REAL)

    @staticmethod
    def euclid_rounded() -> "Metric":
        return Metric(MetricKind.EUCLID_ROUNDED_TSPLIB)

    @staticmethod
    def explicit(matrix: np.ndarray) -> "Metric":
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("explicit metric requires a square matrix")
        if not np.allclose(m, m.T, rtol=0.0, atol=0.0):
            raise ValueError("explicit metric matrix must be symmetric")
        if np.any(np.diag(m) != 0.0):
            raise ValueError("explicit metric matrix must have a zero diagonal")
        if np.any(m < 0.0) or not np.all(np.isfinite(m)):
            raise ValueError("explicit metric matrix must be finite and nonnegative")
        m = m.copy()
        m.setflags(write=False)
        return Metric(MetricKind.EXPLICIT_MATRIX, m)


@dataclass(frozen=True, eq=False)
class Instance:
    """A Metric TSP instance: n nodes plus a distance function."""

    name: str
    n: int
    points: Optional[tuple[Point, ...]]
    metric: Metric

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("instance needs at least one node")
        if self.points is not None and len(self.points) != self.n:
            raise ValueError(f"n={self.n} but {len(self.points)} points given")
        if self.metric.kind is MetricKind.EXPLICIT_MATRIX:
            if self.metric.matrix is None or self.metric.matrix.shape[0] != self.n:
                raise ValueError("explicit matrix size does not match n")
        elif self.points is None:
            raise ValueError("coordinate metrics require points")

    @cached_property
    def coords(self) -> np.ndarray:
        """(n, 2) float array of coordinates; raises for matrix instances."""
        if self.points is None:
            raise ValueError("instance has no coordinates")
        arr = np.array([(p.x, p.y) for p in self.points], dtype=float)
        arr.setflags(write=False)
        return arr

    def distance(self, a: int, b: int) -> float:
        if not (0 <= a < self.n) or not (0 <= b < self.n):
            raise IndexError(f"node index out of range: ({a}, {b}) for n={self.n}")
        kind = self.metric.kind
        if kind is MetricKind.EXPLICIT_MATRIX:
            return float(self.metric.matrix[a, b])
        pa, pb = self.points[a], self.points[b]
        dx = pa.x - pb.x
        dy = pa.y - pb.y
        # plain sqrt of the squared sum, matching the vectorised block formula
        # bit for bit so scalar and bulk lookups never disagree
        d = math.sqrt(dx * dx + dy * dy)
        if kind is MetricKind.EUCLID_ROUNDED_TSPLIB:
            return float(math.floor(d + 0.5))  # round half up, fixed convention
        return d


def distance(inst: Instance, a: int, b: int) -> float:
    return inst.distance(a, b)


def cycle_weight(inst: Instance, order) -> float:
    """Total weight of the Hamiltonian cycle visiting ``order`` then closing."""
    n = len(order)
    total = 0.0
    for i in range(n):
        total += inst.distance(order[i], order[(i + 1) % n])
    return total


class PairwiseDistances:
    """Vectorised distance lookups for one instance.

    Keeps the full matrix when the instance is small enough, otherwise
    computes rows and blocks from coordinates on the fly.
    """

    def __init__(self, inst: Instance, cache_limit: int = MATRIX_CACHE_LIMIT):
        self.inst = inst
        self.n = inst.n
        self._rounded = inst.metric.kind is MetricKind.EUCLID_ROUNDED_TSPLIB
        if inst.metric.kind is MetricKind.EXPLICIT_MATRIX:
            self._matrix = inst.metric.matrix
            self._xy = None
        else:
            self._xy = inst.coords
            self._matrix = None
            if inst.n <= cache_limit:
                self._matrix = self._compute_block(np.arange(inst.n), np.arange(inst.n))

    def _compute_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        dx = self._xy[rows, 0][:, None] - self._xy[cols, 0][None, :]
        dy = self._xy[rows, 1][:, None] - self._xy[cols, 1][None, :]
        d = np.sqrt(dx * dx + dy * dy)
        if self._rounded:
            d = np.floor(d + 0.5)
        return d

    def row(self, i: int) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[i]
        return self._compute_block(np.array([i]), np.arange(self.n))[0]

    def pairs_from(self, i: int, cols: np.ndarray) -> np.ndarray:
        """Distances from node i to each node in ``cols``."""
        if self._matrix is not None:
            return self._matrix[i, cols]
        return self._compute_block(np.array([i]), np.asarray(cols, dtype=np.intp))[0]

    def block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        if self._matrix is not None:
            return self._matrix[np.asarray(rows, dtype=np.intp)[:, None], cols]
        return self._compute_block(
            np.asarray(rows, dtype=np.intp), np.asarray(cols, dtype=np.intp)
        )

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            raise MemoryError(f"full matrix not cached for n={self.n}")
        return self._matrix


def max_triangle_violation(inst: Instance) -> float:
    """Largest d(a,c) - d(a,b) - d(b,c) over all triples (<= 0 for a metric)."""
    d = PairwiseDistances(inst).matrix()
    worst = -math.inf
    n = inst.n
    for b in range(n):
        # d[a,c] - d[a,b] - d[b,c] maximised over a, c for fixed midpoint b
        slack = d - d[:, b][:, None] - d[b, :][None, :]
        worst = max(worst, float(slack.max()))
    return worst


# ---------------------------------------------------------------------------
# Random generators


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _points_from_array(xy: np.ndarray) -> tuple[Point, ...]:
    return tuple(Point(float(x), float(y)) for x, y in xy)


def generate_uniform(n: int, seed: int, box: float = 1.0, name: Optional[str] = None) -> Instance:
    """n points i.i.d. uniform on [0, box]^2, reproducible in (n, seed, box)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if box <= 0:
        raise ValueError("box must be positive")
    xy = _rng(seed).random((n, 2)) * box
    return Instance(name or f"uniform-n{n}-s{seed}", n, _points_from_array(xy), Metric.euclid())


def generate_clustered(
    n: int,
    seed: int,
    box: float = 1.0,
    clusters: Optional[int] = None,
    sigma: Optional[float] = None,
    name: Optional[str] = None,
) -> Instance:
    """Clustered points: uniform centers, Gaussian offsets around them.

    Defaults: clusters = max(1, n // 100) and sigma = box / (50 * sqrt(clusters)).
    Points may fall slightly outside the box; offsets are not clipped.
    """
    if clusters is None:
        clusters = max(1, n // 100)
    if not (n >= clusters >= 1):
        raise ValueError(f"need n >= clusters >= 1, got n={n}, clusters={clusters}")
    if box <= 0:
        raise ValueError("box must be positive")
    if sigma is None:
        sigma = box / (50.0 * math.sqrt(clusters))
    rng = _rng(seed)
    centers = rng.random((clusters, 2)) * box
    assign = rng.integers(0, clusters, size=n)
    offsets = rng.normal(0.0, sigma, size=(n, 2))
    xy = centers[assign] + offsets
    return Instance(
        name or f"clustered-n{n}-c{clusters}-s{seed}", n, _points_from_array(xy), Metric.euclid()
    )


# ---------------------------------------------------------------------------
# TSPLIB subset I/O

_KEYWORD_RE = re.compile(r"^\s*([A-Za-z_0-9]+)\s*:\s*(.*?)\s*$")
_SUPPORTED_KEYWORDS = {"NAME", "TYPE", "COMMENT", "DIMENSION", "EDGE_WEIGHT_TYPE"}


def parse_tsplib(text: str) -> Instance:
    """Parse the supported TSPLIB subset (EUC_2D / EUC_2D_REAL node coords)."""
    lines = text.splitlines()
    header: dict[str, str] = {}
    coords: list[Optional[Point]] = []
    dim: Optional[int] = None
    seen_coords = False

    i = 0
    while i < len(lines):
        lineno = i + 1
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "EOF":
            break
        if line == "NODE_COORD_SECTION":
            if dim is None:
                raise ParseError("NODE_COORD_SECTION before DIMENSION", lineno)
            coords = [None] * dim
            count = 0
            while count < dim:
                if i >= len(lines):
                    raise ParseError(
                        f"expected {dim} coordinate lines, found {count}", len(lines)
                    )
                lineno = i + 1
                row = lines[i].strip()
                i += 1
                if not row:
                    continue
                if row == "EOF" or _KEYWORD_RE.match(row):
                    raise ParseError(
                        f"expected {dim} coordinate lines, found {count}", lineno
                    )
                parts = row.split()
                if len(parts) != 3:
                    raise ParseError(f"malformed coordinate line: {row!r}", lineno)
                try:
                    idx = int(parts[0])
                    x, y = float(parts[1]), float(parts[2])
                except ValueError as exc:
                    raise ParseError(f"malformed coordinate line: {row!r}", lineno) from exc
                if not (1 <= idx <= dim):
                    raise ParseError(f"node index {idx} outside 1..{dim}", lineno)
                if coords[idx - 1] is not None:
                    raise ParseError(f"duplicate node index {idx}", lineno)
                coords[idx - 1] = Point(x, y)
                count += 1
            seen_coords = True
            continue
        m = _KEYWORD_RE.match(line)
        if not m:
            raise ParseError(f"unrecognised line: {line!r}", lineno)
        key, value = m.group(1).upper(), m.group(2)
        if key not in _SUPPORTED_KEYWORDS:
            raise ParseError(f"unsupported keyword {key!r}", lineno)
        if key == "TYPE" and value.upper() != "TSP":
            raise ParseError(f"unsupported TYPE {value!r} (only TSP)", lineno)
        if key == "DIMENSION":
            try:
                dim = int(value)
            except ValueError as exc:
                raise ParseError(f"bad DIMENSION {value!r}", lineno) from exc
            if dim < 1:
                raise ParseError(f"DIMENSION must be >= 1, got {dim}", lineno)
        header[key] = value

    if dim is None:
        raise ParseError("missing DIMENSION header")
    if not seen_coords:
        raise ParseError("missing NODE_COORD_SECTION")
    ew = header.get("EDGE_WEIGHT_TYPE", "").upper()
    if ew == "EUC_2D":
        metric = Metric.euclid_rounded()
    elif ew == "EUC_2D_REAL":
        metric = Metric.euclid()
    elif not ew:
        raise ParseError("missing EDGE_WEIGHT_TYPE header")
    else:
        raise ParseError(f"unsupported EDGE_WEIGHT_TYPE {ew!r}")
    name = header.get("NAME", "unnamed")
    return Instance(name, dim, tuple(coords), metric)


def write_tsplib(inst: Instance) -> str:
    """Serialise a coordinate instance; parse_tsplib inverts this exactly."""
    if inst.points is None:
        raise ValueError("cannot write an explicit-matrix instance as TSPLIB coordinates")
    if inst.metric.kind is MetricKind.EXPLICIT_MATRIX:
        raise ValueError("cannot write an explicit-matrix instance as TSPLIB coordinates")
    ew = "EUC_2D" if inst.metric.kind is MetricKind.EUCLID_ROUNDED_TSPLIB else "EUC_2D_REAL"
    out = [
        f"NAME : {inst.name}",
        "TYPE : TSP",
        f"DIMENSION : {inst.n}",
        f"EDGE_WEIGHT_TYPE : {ew}",
        "NODE_COORD_SECTION",
    ]
    for i, p in enumerate(inst.points, start=1):
        out.append(f"{i} {p.x!r} {p.y!r}")
    out.append("EOF")
    return "\n".join(out) + "\n"
