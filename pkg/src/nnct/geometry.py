"""Nearest-neighbor digraph over a planar labeled point set.

Every point has exactly one nearest neighbor (NN), so the NN relation is a
digraph with constant out-degree 1.  Two structural statistics of that
digraph drive all the variance formulas downstream:

* ``R`` -- twice the number of reflexive (mutual) NN pairs, equivalently the
  number of ordered pairs (s, t) with nn(s) = t and nn(t) = s.
* ``Q`` -- the number of ordered pairs (s, t), s != t, that share a NN;
  equals 2*(Q2 + 3*Q3 + 6*Q4 + 10*Q5 + 15*Q6) where Qk counts points that
  serve as NN to exactly k others.

Distance ties are broken toward the lowest point index, which makes the
digraph deterministic (ties have probability zero for continuous data but do
occur in gridded or duplicated field records).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InternalConsistencyError, InvalidInputError

# Brute force is faster than a kd-tree up to a few hundred points; above the
# threshold the tree path (with exact tie repair) takes over.
_BRUTE_FORCE_MAX = 512
_BRUTE_BLOCK_ENTRIES = 1 << 21


@dataclass(frozen=True)
class LabeledPointSet:
    """Planar points with class labels in {1, 2}.

    Attributes
    ----------
    points : ndarray, shape (n, 2)
        Cartesian coordinates, finite.
    labels : ndarray, shape (n,)
        Class label of each point, 1 or 2.
    """

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        labs = np.asarray(self.labels, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise InvalidInputError(f"points must have shape (n, 2), got {pts.shape}")
        if pts.shape[0] < 2:
            raise InvalidInputError("need at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("coordinates must be finite")
        if labs.shape != (pts.shape[0],):
            raise InvalidInputError("labels must be one per point")
        if not np.all((labs == 1) | (labs == 2)):
            raise InvalidInputError("labels must be 1 or 2")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def class_sizes(self) -> tuple[int, int]:
        """(n1, n2) member counts of classes 1 and 2."""
        n1 = int(np.count_nonzero(self.labels == 1))
        return n1, self.n - n1

    def has_duplicate_points(self) -> bool:
        """True when two points share exact coordinates."""
        return len(np.unique(self.points, axis=0)) < self.n


@dataclass(frozen=True)
class NNStructure:
    """Summary of the NN digraph: neighbor indices, in-degrees, Q and R."""

    nn_index: np.ndarray
    indegree: np.ndarray
    q_counts: np.ndarray  # points serving as NN exactly k times, k = 2..6
    Q: int
    R: int


def _nn_brute(coords: np.ndarray) -> np.ndarray:
    """O(n^2) nearest neighbor indices; ties resolve to the lowest index."""
    n = coords.shape[0]
    nn = np.empty(n, dtype=np.intp)
    block = max(1, _BRUTE_BLOCK_ENTRIES // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = coords[start:stop, None, :] - coords[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(start, stop)
        d2[rows - start, rows] = np.inf
        # argmin returns the first minimum, i.e. the lowest index on ties
        nn[start:stop] = np.argmin(d2, axis=1)
    return nn


def _nn_kdtree(coords: np.ndarray) -> np.ndarray:
    """kd-tree nearest neighbor indices with exact lowest-index tie repair."""
    n = coords.shape[0]
    tree = cKDTree(coords)
    k = min(n, 3)
    dist, idx = tree.query(coords, k=k)
    rows = np.arange(n)
    nonself = idx != rows[:, None]
    first = nonself.argmax(axis=1)
    nn = idx[rows, first].astype(np.intp)
    if n == 2:
        return nn
    dmin = dist[rows, first]
    # a tie needs repair when several returned neighbors sit at the minimum
    # distance, or when the last returned distance equals it (further tied
    # candidates may have been truncated by k)
    multiple = np.count_nonzero(nonself & (dist == dmin[:, None]), axis=1) > 1
    truncated = dist[:, -1] <= dmin
    for i in np.nonzero(multiple | truncated)[0]:
        # slightly inflated radius so boundary candidates are never lost,
        # then re-rank by the same squared distance the brute path uses
        radius = dmin[i] * (1.0 + 1e-9) + np.finfo(float).tiny
        cand = [j for j in tree.query_ball_point(coords[i], radius) if j != i]
        if not cand:
            cand = [j for j in range(n) if j != i]
        d2 = ((coords[cand] - coords[i]) ** 2).sum(axis=1)
        best = d2.min()
        nn[i] = min(j for j, dd in zip(cand, d2) if dd == best)
    return nn


def _nn_indices(coords: np.ndarray, method: str = "auto") -> np.ndarray:
    if method == "auto":
        method = "brute" if coords.shape[0] <= _BRUTE_FORCE_MAX else "kdtree"
    if method == "brute":
        return _nn_brute(coords)
    if method == "kdtree":
        return _nn_kdtree(coords)
    raise InvalidInputError(f"unknown NN search method {method!r}")


def structure_from_nn_index(nn_index: np.ndarray) -> NNStructure:
    """Derive in-degrees, Q and R from nearest neighbor indices."""
    nn = np.asarray(nn_index, dtype=np.intp)
    n = nn.shape[0]
    indegree = np.bincount(nn, minlength=n)
    q_counts = np.array([np.count_nonzero(indegree == k) for k in range(2, 7)])
    q = int(np.sum(indegree * (indegree - 1)))
    r = int(np.count_nonzero(nn[nn] == np.arange(n)))
    return NNStructure(nn_index=nn, indegree=indegree, q_counts=q_counts, Q=q, R=r)


def compute_nn(pts: LabeledPointSet, method: str = "auto") -> NNStructure:
    """Build the NN digraph of a point set.

    Parameters
    ----------
    pts : LabeledPointSet
    method : {"auto", "brute", "kdtree"}
        "brute" is the quadratic reference implementation, "kdtree" the
        accelerated path; both apply the lowest-index tie rule and agree
        exactly on tie-free inputs.
    """
    if pts.n < 2:
        raise InvalidInputError("need at least 2 points")
    return structure_from_nn_index(_nn_indices(pts.points, method))


def nn_pair_list(pts: LabeledPointSet, nns: NNStructure) -> list[tuple[int, int]]:
    """The n (base label, NN label) pairs, in point order."""
    if nns.nn_index.shape[0] != pts.n:
        raise InternalConsistencyError(
            f"NN structure holds {nns.nn_index.shape[0]} points, point set {pts.n}"
        )
    base = pts.labels
    neigh = pts.labels[nns.nn_index]
    return [(int(b), int(v)) for b, v in zip(base, neigh)]
