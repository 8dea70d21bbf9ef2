"""Pairwise MRF instances and exact Gibbs-energy evaluation.

An instance is a set of N variables over H labels with per-variable unary
costs, a set of weighted undirected edges, and one label distance shared by
every edge.  A labeling's energy is

    sum_a unary[a, f(a)]  +  sum_{(a,b)} w_ab * d(f(a), f(b)).
"""

import numpy as np

from .distances import DistanceFn


class MrfInstance:
    """Validated instance; arrays are stored as float64/int64 copies."""

    def __init__(self, unary, edges, weights, distance: DistanceFn):
        unary = np.array(unary, dtype=np.float64)
        if unary.ndim != 2 or unary.shape[0] < 1 or unary.shape[1] < 1:
            raise ValueError("unary must be an (N, H) array with N, H >= 1")
        if not np.all(np.isfinite(unary)):
            raise ValueError("unary costs must be finite")
        n, h = unary.shape

        edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
        weights = np.array(weights, dtype=np.float64).reshape(-1)
        if edges.shape[0] != weights.shape[0]:
            raise ValueError("edges and weights must have the same length")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must satisfy a < b (no self-loops)")
            if np.unique(edges, axis=0).shape[0] != edges.shape[0]:
                raise ValueError("duplicate edge")
        if weights.size and (not np.all(np.isfinite(weights)) or weights.min() < 0):
            raise ValueError("edge weights must be finite and >= 0")

        if distance.h != h:
            raise ValueError(
                f"distance is over {distance.h} labels, unary has {h} columns")

        self.unary = unary
        self.edges = edges
        self.weights = weights
        self.distance = distance

    @property
    def n_vars(self) -> int:
        return self.unary.shape[0]

    @property
    def n_labels(self) -> int:
        return self.unary.shape[1]

    @property
    def n_edges(self) -> int:
        return self.edges.shape[0]

    def distance_matrix(self) -> np.ndarray:
        return self.distance.matrix()


def check_labeling(instance: MrfInstance, labeling) -> np.ndarray:
    """Validate shape/dtype/range; returns the labeling as an int64 array."""
    f = np.asarray(labeling)
    if f.shape != (instance.n_vars,):
        raise ValueError(f"labeling must have shape ({instance.n_vars},)")
    if not np.issubdtype(f.dtype, np.integer):
        raise ValueError("labeling must be integer-valued")
    f = f.astype(np.int64, copy=False)
    if f.size and (f.min() < 0 or f.max() >= instance.n_labels):
        raise ValueError("label index out of range")
    return f


def energy(instance: MrfInstance, labeling) -> float:
    """Exact Gibbs energy of a labeling."""
    f = check_labeling(instance, labeling)
    total = float(instance.unary[np.arange(instance.n_vars), f].sum())
    if instance.n_edges:
        dm = instance.distance_matrix()
        fa = f[instance.edges[:, 0]]
        fb = f[instance.edges[:, 1]]
        total += float((instance.weights * dm[fa, fb]).sum())
    return total


def grid_edges(rows: int, cols: int) -> np.ndarray:
    """4-connected grid edges over row-major node ids, each with a < b."""
    if rows < 1 or cols < 1:
        raise ValueError("grid sides must be >= 1")
    edges = []
    for r in range(rows):
        for c in range(cols):
            a = r * cols + c
            if c + 1 < cols:
                edges.append((a, a + 1))
            if r + 1 < rows:
                edges.append((a, a + cols))
    return np.array(edges, np.int64).reshape(-1, 2)
