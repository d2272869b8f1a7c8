"""Similarity graphs over signature sets and all-pairs shortest paths.

A signature set becomes a complete weighted graph (optionally kNN
sparsified); Floyd-Warshall closes it into a shortest-path metric,
which is the graph approximation of geodesic distance used by the
retrieval code.  Matrices round-trip through CSV (with a label header)
and a compact binary format.
"""

from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np


class NegativeCycle(RuntimeError):
    """Shortest-path closure produced a negative diagonal entry."""


class EdgeWeight(enum.Enum):
    """How a pair of signatures is turned into one edge weight.

    SQRT_TWO_SKLD is the default: per subband sqrt(2 * skld) has length
    units consistent with the Fisher line element, so shortest paths
    over these edges approximate Riemannian lengths.  SKLD keeps the
    raw symmetrised divergence; KLD_DIRECTED keeps the asymmetric
    divergence (row index is the source).
    """

    SKLD = "skld"
    SQRT_TWO_SKLD = "sqrt2skld"
    KLD_DIRECTED = "kld"


@dataclass
class DistanceMatrix:
    """Pairwise weights with a zero diagonal and one label per item.

    Entries may be +inf only when a sparsification dropped the edge;
    NaN and negative values are always rejected.
    """

    d: np.ndarray
    labels: List[str]

    def __post_init__(self):
        self.d = np.asarray(self.d, dtype=np.float64)
        if self.d.ndim != 2 or self.d.shape[0] != self.d.shape[1]:
            raise ValueError("distance matrix must be square")
        n = self.d.shape[0]
        if self.labels is None:
            self.labels = [str(i) for i in range(n)]
        self.labels = [str(l) for l in self.labels]
        if len(self.labels) != n:
            raise ValueError("need exactly one label per row")
        if np.any(np.isnan(self.d)) or np.any(self.d < 0.0):
            raise ValueError("weights must be nonnegative and not NaN")
        if np.any(np.diag(self.d) != 0.0):
            raise ValueError("diagonal must be exactly zero")

    @property
    def n(self) -> int:
        return int(self.d.shape[0])


@dataclass
class ShortestPathResult:
    """Closure of a DistanceMatrix under path relaxation."""

    dist: np.ndarray
    labels: List[str]
    next_hop: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])


def build_distance_matrix(signatures: Sequence, edge_weight: EdgeWeight = EdgeWeight.SQRT_TWO_SKLD,
                          labels: Optional[Sequence[str]] = None,
                          knn: Optional[int] = None) -> DistanceMatrix:
    """Pairwise signature weights as a graph adjacency matrix.

    Each entry aggregates the chosen per-subband measure over all
    subbands of the signature pair (the same summation the direct
    retrieval measures use).  With `knn` set, edges outside the k
    nearest neighbours of both endpoints become +inf, which the
    shortest-path closure treats as absent.
    """
    from .retrieval import Aggregation, Measure, signature_distance

    sigs = list(signatures)
    if len(sigs) < 2:
        raise ValueError("need at least 2 signatures")
    measure = {
        EdgeWeight.SKLD: Measure.SKLD,
        EdgeWeight.SQRT_TWO_SKLD: Measure.GDSKLD,
        EdgeWeight.KLD_DIRECTED: Measure.KLD,
    }[edge_weight]
    n = len(sigs)
    d = np.zeros((n, n))
    symmetric = edge_weight is not EdgeWeight.KLD_DIRECTED
    for i in range(n):
        start = i + 1 if symmetric else 0
        for j in range(start, n):
            if i == j:
                continue
            w = signature_distance(sigs[i], sigs[j], measure, Aggregation.SUM)
            d[i, j] = w
            if symmetric:
                d[j, i] = w
    if knn is not None:
        if not 1 <= knn < n:
            raise ValueError("knn must be in [1, n)")
        keep = np.zeros((n, n), dtype=bool)
        np.fill_diagonal(keep, True)
        for i in range(n):
            order = np.argsort(d[i], kind="stable")
            nearest = [j for j in order if j != i][:knn]
            keep[i, nearest] = True
        keep |= keep.T
        d = np.where(keep, d, np.inf)
    return DistanceMatrix(d=d, labels=list(labels) if labels is not None else None)


def floyd_warshall(D: DistanceMatrix, compute_paths: bool = False) -> ShortestPathResult:
    """All-pairs shortest paths over the weighted graph.

    Standard k-outer relaxation, vectorised over the (i, j) plane and
    updating in place.  Ties keep the first improving k, so the
    optional next-hop matrix is deterministic.
    """
    dist = D.d.copy()
    n = D.n
    nxt = None
    if compute_paths:
        nxt = np.tile(np.arange(n, dtype=np.int64), (n, 1))
        nxt[~np.isfinite(dist)] = -1
        np.fill_diagonal(nxt, np.arange(n))
    via = np.empty_like(dist)
    for k in range(n):
        np.add(dist[:, k, None], dist[None, k, :], out=via)
        if nxt is not None:
            better = via < dist
            nxt = np.where(better, nxt[:, k, None], nxt)
        np.minimum(dist, via, out=dist)
    if np.any(np.diag(dist) < 0.0):
        raise NegativeCycle("negative diagonal after closure")
    return ShortestPathResult(dist=dist, labels=list(D.labels), next_hop=nxt)


def reconstruct_path(result: ShortestPathResult, i: int, j: int) -> List[int]:
    """Vertex sequence of one shortest path from the next-hop matrix."""
    if result.next_hop is None:
        raise ValueError("closure was computed without path tracking")
    if not np.isfinite(result.dist[i, j]):
        raise ValueError("vertices %d and %d are not connected" % (i, j))
    path = [i]
    guard = result.n + 1
    while path[-1] != j:
        path.append(int(result.next_hop[path[-1], j]))
        guard -= 1
        if guard == 0:
            raise RuntimeError("next-hop matrix is inconsistent")
    return path


def insert_query(S: ShortestPathResult, D: DistanceMatrix, query_edges) -> np.ndarray:
    """Shortest-path distances from one extra vertex, without a rerun.

    One relaxation pass dist_q[j] = min_k (query_edges[k] + dist[k][j])
    is exact for a single added vertex: any shortest path from the new
    vertex starts with one of its direct edges and then follows an
    existing shortest path.
    """
    q = np.asarray(query_edges, dtype=np.float64)
    if q.shape != (S.n,) or D.n != S.n:
        raise ValueError("query edge vector must match the graph size")
    if np.any(np.isnan(q)) or np.any(q < 0.0):
        raise ValueError("query edges must be nonnegative")
    return np.min(q[:, None] + S.dist, axis=0)


@dataclass
class MetricityReport:
    max_triangle_violation: float
    symmetry_defect: float
    max_diagonal: float
    zero_offdiagonal_pairs: int

    def is_metric(self, tol: float = 1e-12) -> bool:
        return (self.max_triangle_violation <= tol
                and self.symmetry_defect <= tol
                and self.max_diagonal <= tol
                and self.zero_offdiagonal_pairs == 0)


def validate_metricity(S) -> MetricityReport:
    """Measure how far a matrix is from being a metric.

    Accepts a ShortestPathResult, DistanceMatrix or plain array.
    Reports the worst triangle violation d[i,j] - d[i,k] - d[k,j]
    (nonpositive for a true metric), the symmetry defect, the largest
    diagonal entry and the number of distinct pairs at distance zero.
    """
    if isinstance(S, ShortestPathResult):
        d = S.dist
    elif isinstance(S, DistanceMatrix):
        d = S.d
    else:
        d = np.asarray(S, dtype=np.float64)
    n = d.shape[0]
    worst = -np.inf
    for k in range(n):
        viol = d - (d[:, k, None] + d[None, k, :])
        worst = max(worst, float(np.max(viol[np.isfinite(viol)])))
    off = ~np.eye(n, dtype=bool)
    finite = np.isfinite(d) & np.isfinite(d.T)
    sym = float(np.max(np.abs((d - d.T)[finite]))) if finite.any() else 0.0
    zeros = int(np.count_nonzero((d == 0.0) & off) // 2)
    return MetricityReport(
        max_triangle_violation=worst,
        symmetry_defect=sym,
        max_diagonal=float(np.max(np.abs(np.diag(d)))),
        zero_offdiagonal_pairs=zeros,
    )


def save_matrix_csv(path, D: DistanceMatrix) -> None:
    """CSV with a label header row; floats via repr, so values
    round-trip exactly."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(D.labels) + "\n")
        for row in D.d:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_matrix_csv(path) -> DistanceMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file %s" % path)
    labels = lines[0].split(",")
    rows = [[float(tok) for tok in ln.split(",")] for ln in lines[1:]]
    if len(rows) != len(labels):
        raise ValueError("row count does not match header in %s" % path)
    return DistanceMatrix(d=np.array(rows), labels=labels)


_DMAT_MAGIC = b"DMAT"
_DMAT_VERSION = 1


def save_matrix_binary(path, D: DistanceMatrix) -> None:
    """Compact binary dump: magic, version byte, int64 n, n^2 float64,
    all little-endian row-major.  Labels are not stored."""
    with open(path, "wb") as fh:
        fh.write(_DMAT_MAGIC)
        fh.write(struct.pack("<B", _DMAT_VERSION))
        fh.write(struct.pack("<q", D.n))
        fh.write(D.d.astype("<f8").tobytes(order="C"))


def load_matrix_binary(path) -> DistanceMatrix:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _DMAT_MAGIC:
        raise ValueError("%s is not a binary distance matrix" % path)
    version = blob[4]
    if version != _DMAT_VERSION:
        raise ValueError("unsupported matrix format version %d" % version)
    (n,) = struct.unpack_from("<q", blob, 5)
    expected = 13 + 8 * n * n
    if len(blob) != expected:
        raise ValueError("truncated matrix file %s" % path)
    d = np.frombuffer(blob[13:], dtype="<f8").reshape(n, n).copy()
    return DistanceMatrix(d=d, labels=None)
