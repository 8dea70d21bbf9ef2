"""Label-distance families.

A distance over H labels is a semi-metric: zero diagonal, symmetric, strictly
positive off the diagonal.  The triangle inequality is *not* assumed; gamma()
measures how badly it fails (1 for true metrics).
"""

from dataclasses import dataclass

import numpy as np

# equality comparisons in semi-metric validation
VALIDATE_TOL = 1e-12


@dataclass
class SemimetricViolation:
    row: int
    col: int
    reason: str
    value: float


class DistanceFn:
    """Base class: a label distance tagged by family ``kind``."""

    kind: str = "?"

    def __init__(self, h: int):
        if int(h) < 1:
            raise ValueError("label count must be >= 1")
        self.h = int(h)
        self._matrix: np.ndarray | None = None

    def eval(self, i: int, j: int) -> float:
        self._check_labels(i, j)
        return float(self._compute_matrix()[i, j])

    def matrix(self) -> np.ndarray:
        """Dense H x H distance matrix (cached; do not mutate)."""
        return self._compute_matrix()

    def _compute_matrix(self) -> np.ndarray:
        if self._matrix is None:
            m = self._build()
            m.setflags(write=False)
            self._matrix = m
        return self._matrix

    def _build(self) -> np.ndarray:
        raise NotImplementedError

    def _check_labels(self, *labels) -> None:
        for k in labels:
            if not (0 <= int(k) < self.h):
                raise ValueError(f"label {k} out of range [0, {self.h})")


class TruncatedLinear(DistanceFn):
    """min(|i - j|, m): a metric for any truncation m > 0."""

    kind = "trunclin"

    def __init__(self, h: int, m: float):
        super().__init__(h)
        if not np.isfinite(m) or m <= 0:
            raise ValueError("truncation must be positive")
        self.m = float(m)

    def eval(self, i, j):
        self._check_labels(i, j)
        return min(abs(float(i) - float(j)), self.m)

    def _build(self):
        idx = np.arange(self.h, dtype=float)
        return np.minimum(np.abs(idx[:, None] - idx[None, :]), self.m)


class TruncatedQuadratic(DistanceFn):
    """min((i - j)^2, m): a semi-metric; violates the triangle inequality."""

    kind = "truncquad"

    def __init__(self, h: int, m: float):
        super().__init__(h)
        if not np.isfinite(m) or m <= 0:
            raise ValueError("truncation must be positive")
        self.m = float(m)

    def eval(self, i, j):
        self._check_labels(i, j)
        return min((float(i) - float(j)) ** 2, self.m)

    def _build(self):
        idx = np.arange(self.h, dtype=float)
        return np.minimum((idx[:, None] - idx[None, :]) ** 2, self.m)


class Uniform(DistanceFn):
    """1 whenever the labels differ (the Potts distance)."""

    kind = "uniform"

    def eval(self, i, j):
        self._check_labels(i, j)
        return 0.0 if i == j else 1.0

    def _build(self):
        return 1.0 - np.eye(self.h)


class MatrixDistance(DistanceFn):
    """Explicit H x H semi-metric, validated at construction."""

    kind = "matrix"

    def __init__(self, matrix):
        m = np.array(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("distance matrix must be square")
        super().__init__(m.shape[0])
        bad = validate_semimetric(m)
        if bad is not None:
            raise ValueError(
                f"not a semi-metric: {bad.reason} at ({bad.row}, {bad.col}),"
                f" value {bad.value!r}")
        self._given = m

    def _build(self):
        return self._given.copy()


class TreeDistance(DistanceFn):
    """Path-length distance between the leaves of a rooted tree.

    ``tree`` must expose ``h`` (leaf/label count) and ``matrix()``; see
    hst.HstTree.
    """

    kind = "tree"

    def __init__(self, tree):
        super().__init__(tree.h)
        self.tree = tree
        bad = validate_semimetric(tree.matrix())
        if bad is not None:
            raise ValueError(
                f"tree distances are not a semi-metric: {bad.reason}"
                f" at ({bad.row}, {bad.col})")

    def _build(self):
        return self.tree.matrix().copy()


def validate_semimetric(matrix) -> SemimetricViolation | None:
    """First violating entry in row-major order, or None when valid.

    Checks zero diagonal, symmetry, and strictly positive off-diagonal
    entries, with equality comparisons at 1e-12.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("distance matrix must be square")
    if m.size and not np.all(np.isfinite(m)):
        i, j = np.argwhere(~np.isfinite(m))[0]
        return SemimetricViolation(int(i), int(j), "non-finite entry", float(m[i, j]))
    h = m.shape[0]
    off = ~np.eye(h, dtype=bool)
    bad = np.eye(h, dtype=bool) & (np.abs(m) > VALIDATE_TOL)
    bad |= np.abs(m - m.T) > VALIDATE_TOL
    bad |= off & (m <= VALIDATE_TOL)
    if not bad.any():
        return None
    i, j = np.argwhere(bad)[0]  # argwhere is row-major
    i, j = int(i), int(j)
    v = float(m[i, j])
    if i == j and abs(v) > VALIDATE_TOL:
        reason = "nonzero diagonal"
    elif v < -VALIDATE_TOL:
        reason = "negative entry"
    elif i != j and v <= VALIDATE_TOL:
        reason = "zero off-diagonal entry"
    else:
        reason = "asymmetric pair"
    return SemimetricViolation(i, j, reason, v)


def metric_closure(matrix) -> np.ndarray:
    """All-pairs shortest-path closure (classic cubic dynamic program).

    Input: square, symmetric, zero-diagonal, non-negative edge lengths of a
    complete graph.  Output satisfies the triangle inequality.
    """
    m = np.array(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)) or (m.size and m.min() < 0):
        raise ValueError("edge lengths must be finite and >= 0")
    if np.abs(np.diag(m)).max(initial=0.0) > VALIDATE_TOL:
        raise ValueError("diagonal must be zero")
    if np.abs(m - m.T).max(initial=0.0) > VALIDATE_TOL:
        raise ValueError("matrix must be symmetric")
    h = m.shape[0]
    for k in range(h):
        np.minimum(m, m[:, k : k + 1] + m[k : k + 1, :], out=m)
    return m


def gamma(d) -> float:
    """Triangle-inequality failure factor.

    max(1, max over label triples (i, j, k) with d(i,k) > 0 of
    (d(i,j) - d(j,k)) / d(i,k)).  Equals 1 exactly when d is a metric.
    """
    m = d.matrix() if isinstance(d, DistanceFn) else np.asarray(d, dtype=float)
    h = m.shape[0]
    if h <= 1:
        return 1.0
    denom_ok = m > 0
    best = 1.0
    for j in range(h):
        num = m[:, j][:, None] - m[j, :][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(denom_ok, num / m, -np.inf)
        hi = ratio.max()
        if hi > best:
            best = float(hi)
    return best
