"""Well-separated tree metrics over label sets, and random embeddings into them.

A tree here is rooted, has labels on its leaves, and gives every child of a
node the same edge length; edge lengths shrink by at least the separation
factor ``r`` along any root-to-leaf path.  The induced label distance is the
path length between leaves, and a sampled tree always *dominates* the distance
it was built from (tree distance >= source distance for every pair).

Sampling follows the classic randomized low-diameter decomposition of
Fakcharoenphol, Rao and Talwar: one uniform label permutation and one radius
scale ``beta = r**U`` are drawn up front, then each level partitions every
cluster by assigning labels to the first permutation entry within the level
radius.  Distances without the triangle inequality are embedded in two stages
(sample a tree on the raw distance, then re-sample on that tree's own metric).
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .distances import DistanceFn, MatrixDistance, gamma, validate_semimetric

DOMINATION_TOL = 1e-9
RATIO_TOL = 1e-9
# cap on the exponent inside mixture reweighting, so exp() cannot overflow
EXP_CLAMP = 500.0


# ---------------------------------------------------------------------------
# tree structure


@dataclass
class HstNode:
    edge_len: float
    children: list["HstNode"] = field(default_factory=list)
    label: int | None = None

    @property
    def is_leaf(self) -> bool:
        return not self.children


class HstTree:
    """Validated rooted tree with labeled leaves and separated edge lengths."""

    def __init__(self, root: HstNode, r: float = 2.0):
        if r < 1.0:
            raise ValueError("separation factor must be >= 1")
        self.root = root
        self.r = float(r)
        self._matrix: np.ndarray | None = None
        labels = []
        self._validate(root, labels, parent_len=None)
        if sorted(labels) != list(range(len(labels))):
            raise ValueError("leaf labels must biject with 0..H-1")
        self.h = len(labels)

    def _validate(self, node: HstNode, labels: list[int], parent_len: float | None):
        if node.is_leaf:
            if node.label is None:
                raise ValueError("leaf without a label")
            labels.append(int(node.label))
            return
        if node.label is not None:
            raise ValueError("internal node carries a label")
        e = node.edge_len
        if not np.isfinite(e) or e < 0:
            raise ValueError("edge lengths must be finite and >= 0")
        if parent_len is not None:
            # lengths must drop by >= r between consecutive internal levels
            if parent_len < self.r * e * (1.0 - RATIO_TOL) - 1e-12:
                raise ValueError(
                    f"edge lengths not {self.r}-separated: parent {parent_len!r}"
                    f" vs child {e!r}")
        for c in node.children:
            self._validate(c, labels, e)

    def distance(self, i: int, j: int) -> float:
        """Exact path length between leaves i and j."""
        m = self.matrix()
        if not (0 <= i < self.h and 0 <= j < self.h):
            raise ValueError("label out of range")
        return float(m[i, j])

    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            dm = np.zeros((self.h, self.h))
            self._collect(self.root, dm)
            dm.setflags(write=False)
            self._matrix = dm
        return self._matrix

    def _collect(self, node: HstNode, dm: np.ndarray):
        """Post-order fill of dm; returns (leaf labels, depths below node)."""
        if node.is_leaf:
            return np.array([node.label], np.int64), np.zeros(1)
        parts = [self._collect(c, dm) for c in node.children]
        e = node.edge_len
        for x in range(len(parts)):
            lx, dx = parts[x]
            for y in range(x + 1, len(parts)):
                ly, dy = parts[y]
                cross = (dx + e)[:, None] + (dy + e)[None, :]
                dm[np.ix_(lx, ly)] = cross
                dm[np.ix_(ly, lx)] = cross.T
        labels = np.concatenate([p[0] for p in parts])
        depths = np.concatenate([p[1] + e for p in parts])
        return labels, depths

    def to_text(self) -> str:
        """Parenthesized text form: ``(edge child child ...)``, leaves ``L<k>``."""
        return _format_node(self.root)

    @classmethod
    def from_text(cls, text: str, r: float = 2.0) -> "HstTree":
        return cls(parse_tree(text), r=r)


def _format_node(node: HstNode) -> str:
    if node.is_leaf:
        return f"L{node.label}"
    inner = " ".join(_format_node(c) for c in node.children)
    return f"({float(node.edge_len)!r} {inner})"


_LEAF_RE = re.compile(r"L(\d+)$")


def parse_tree(text: str) -> HstNode:
    """Parse the parenthesized tree form; raises ValueError on bad syntax."""
    tokens = re.findall(r"[()]|[^\s()]+", text)
    if not tokens:
        raise ValueError("empty tree")
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of tree text")
        tok = tokens[pos]
        pos += 1
        return tok

    def node():
        tok = take()
        if tok == "(":
            raw = take()
            try:
                e = float(raw)
            except ValueError:
                raise ValueError(f"expected edge length, got {raw!r}") from None
            children = []
            while True:
                if pos >= len(tokens):
                    raise ValueError("missing ')' in tree text")
                if tokens[pos] == ")":
                    take()
                    break
                children.append(node())
            if not children:
                raise ValueError("internal node needs at least one child")
            return HstNode(e, children)
        if tok == ")":
            raise ValueError("unexpected ')'")
        m = _LEAF_RE.match(tok)
        if not m:
            raise ValueError(f"expected leaf 'L<k>' or '(', got {tok!r}")
        return HstNode(0.0, [], int(m.group(1)))

    root = node()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens after tree: {tokens[pos]!r}")
    return root


def tree_distance(tree: HstTree, i: int, j: int) -> float:
    return tree.distance(i, j)


def dominates(tree: HstTree, dmat: np.ndarray, tol: float = DOMINATION_TOL) -> bool:
    """True iff every tree distance is >= the source distance (within tol)."""
    return bool(np.all(tree.matrix() >= np.asarray(dmat) - tol))


# ---------------------------------------------------------------------------
# random embeddings


def _as_seed_entropy(seed) -> tuple[int, ...]:
    if isinstance(seed, np.random.SeedSequence):
        e = seed.entropy
        if e is None:
            return (0,)
        if isinstance(e, (int, np.integer)):
            return (int(e),)
        return tuple(int(x) for x in e)
    return (int(seed) % (1 << 63),)


def _rng_from(seed) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(list(_as_seed_entropy(seed))))


def _subseed(seed, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([*_as_seed_entropy(seed), *key])


def _dmat_of(d) -> np.ndarray:
    return d.matrix() if isinstance(d, DistanceFn) else np.asarray(d, dtype=float)


def _sample_decomposition(dm: np.ndarray, rng: np.random.Generator, r: float) -> HstTree:
    """One random hierarchical decomposition of the rows of dm.

    dm only needs to be a semi-metric.  Child edge lengths are half the
    cluster diameter, raised where necessary so consecutive lengths keep the
    factor-r separation (raising only ever increases tree distances, so
    domination of dm is preserved).
    """
    h = dm.shape[0]
    if h == 1:
        return HstTree(HstNode(0.0, [], 0), r=r)
    offdiag = dm[~np.eye(h, dtype=bool)]
    dmin = offdiag.min()
    s = r / dmin  # scaled minimum distance becomes exactly r
    ds = dm * s
    dmax = ds.max()
    if r == 2.0:
        delta = max(1, math.ceil(math.log2(dmax)))
    else:
        delta = max(1, math.ceil(math.log(dmax) / math.log(r) - 1e-12))

    pi = rng.permutation(h)
    beta = float(r) ** rng.random()
    ds_pi = ds[:, pi]
    rank_cache: dict[int, np.ndarray] = {}

    def ranks(level: int) -> np.ndarray:
        # first permutation rank within the level radius, for every label
        got = rank_cache.get(level)
        if got is None:
            radius = beta * float(r) ** (delta - level)
            got = np.argmax(ds_pi <= radius, axis=1)
            rank_cache[level] = got
        return got

    def build(members: np.ndarray, level: int) -> HstNode:
        if members.size == 1:
            return HstNode(0.0, [], int(members[0]))
        while True:
            if level > delta + 2:  # cannot happen: singletons by delta + 1
                raise RuntimeError("decomposition failed to separate labels")
            rk = ranks(level)[members]
            uniq = np.unique(rk)
            if uniq.size > 1:
                break
            level += 1  # cluster did not split; skip the level entirely
        children = [build(members[rk == rv], level + 1) for rv in uniq]
        e = ds[np.ix_(members, members)].max() / 2.0
        for c in children:
            if c.children and r * c.edge_len > e:
                e = r * c.edge_len
        return HstNode(float(e), children)

    root = build(np.arange(h), 1)
    _divide_edges(root, s)
    return HstTree(root, r=r)


def _divide_edges(node: HstNode, s: float) -> None:
    node.edge_len /= s
    for c in node.children:
        _divide_edges(c, s)


def frt_sample(d, seed, r: float = 2.0) -> HstTree:
    """Sample one dominating tree for a *metric* distance.

    Rejects distances that violate the triangle inequality (those need the
    two-stage embed_semimetric) and single-label inputs.
    """
    dm = _dmat_of(d)
    bad = validate_semimetric(dm)
    if bad is not None:
        raise ValueError(f"not a semi-metric: {bad.reason} at ({bad.row}, {bad.col})")
    if dm.shape[0] < 2:
        raise ValueError("need at least two labels")
    if gamma(dm) > 1.0 + 1e-9:
        raise ValueError(
            "distance violates the triangle inequality; use embed_semimetric")
    return _sample_decomposition(dm, _rng_from(seed), r)


def embed_semimetric(d, seed, r: float = 2.0) -> HstTree:
    """Sample one dominating tree for a general semi-metric.

    Stage one decomposes the raw distance (its radius-based clustering needs
    no triangle inequality for domination); stage two re-samples on the first
    tree's own metric, which restores the separation guarantees.  Domination
    composes, so the result dominates the original distance.
    """
    dm = _dmat_of(d)
    bad = validate_semimetric(dm)
    if bad is not None:
        raise ValueError(f"not a semi-metric: {bad.reason} at ({bad.row}, {bad.col})")
    rng = _rng_from(seed)
    stage1 = _sample_decomposition(dm, rng, r)
    if dm.shape[0] == 1:
        return stage1
    return _sample_decomposition(stage1.matrix(), rng, r)


def dp_solve(y, d, samples: int = 64, seed=0, r: float = 2.0) -> HstTree:
    """Best dominating tree for the weighted objective sum_ij y_ij * d^t(i, j).

    Draws ``samples`` candidate trees (single-stage when d is a metric,
    two-stage otherwise) and keeps the cheapest; ties go to the earliest
    candidate.  Candidate k is seeded by (seed, k), so a fixed seed fixes the
    whole candidate set.
    """
    dm = _dmat_of(d)
    h = dm.shape[0]
    y = np.asarray(y, dtype=float)
    if y.shape != (h, h):
        raise ValueError("y must be H x H")
    if not np.all(np.isfinite(y)) or y.min() < 0:
        raise ValueError("y must be finite and >= 0")
    if np.abs(np.diag(y)).max(initial=0.0) > 1e-9 or np.abs(y - y.T).max(initial=0.0) > 1e-9:
        raise ValueError("y must be symmetric with zero diagonal")
    if samples < 1:
        raise ValueError("need at least one sample")
    metric = gamma(dm) <= 1.0 + 1e-9
    best_tree = None
    best_obj = np.inf
    for k in range(samples):
        sub = _subseed(seed, k)
        t = frt_sample(dm, sub, r) if metric and h > 1 else embed_semimetric(dm, sub, r)
        obj = float((y * t.matrix()).sum())
        if obj < best_obj:
            best_tree, best_obj = t, obj
    return best_tree


# ---------------------------------------------------------------------------
# mixtures


@dataclass
class HstMixture:
    """Convex combination of dominating trees over one label set.

    When ``source`` is given, every tree is checked to dominate it.
    """

    trees: list[HstTree]
    rho: np.ndarray
    source: np.ndarray | None = None

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        if len(self.trees) == 0 or self.rho.shape != (len(self.trees),):
            raise ValueError("need one weight per tree")
        if self.rho.min() < 0 or abs(self.rho.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be >= 0 and sum to 1")
        hs = {t.h for t in self.trees}
        if len(hs) != 1:
            raise ValueError("trees cover different label sets")
        self.h = hs.pop()
        if self.source is not None:
            src = np.asarray(self.source, dtype=float)
            for k, t in enumerate(self.trees):
                if not dominates(t, src):
                    raise ValueError(f"tree {k} does not dominate the source distance")
            self.source = src

    def expected_matrix(self) -> np.ndarray:
        mix = np.zeros((self.h, self.h))
        for w, t in zip(self.rho, self.trees):
            mix += w * t.matrix()
        return mix


def learn_mixture(d, trees: int = 50, lam: float = 0.1, samples: int = 64,
                  seed=0, r: float = 2.0) -> HstMixture:
    """Learn a mixture of dominating trees with low worst-case stretch.

    The first tree minimizes the unweighted objective; each later round
    reweights pairs by an exponential of their current expected stretch
    (so badly-stretched pairs dominate the next tree's objective), then
    shrinks old weights by (1 - lam) and gives the new tree weight lam.
    """
    if trees < 1:
        raise ValueError("need at least one tree")
    if not 0 < lam < 1:
        raise ValueError("lam must be in (0, 1)")
    dm = _dmat_of(d)
    bad = validate_semimetric(dm)
    if bad is not None:
        raise ValueError(f"not a semi-metric: {bad.reason} at ({bad.row}, {bad.col})")
    h = dm.shape[0]
    if h == 1:
        return HstMixture([HstTree(HstNode(0.0, [], 0), r=r)], np.ones(1), source=dm)

    off = ~np.eye(h, dtype=bool)
    y = np.where(off, 1.0, 0.0)
    first = dp_solve(y, dm, samples, _subseed(seed, 0), r)
    picked = [first]
    rho = np.ones(1)
    expected = first.matrix().copy()

    for n in range(1, trees):
        arg = np.zeros((h, h))
        np.divide(expected, lam * dm, out=arg, where=off)
        np.clip(arg, None, EXP_CLAMP, out=arg)
        y = np.where(off, np.exp(arg) / np.where(off, dm, 1.0), 0.0)
        t = dp_solve(y, dm, samples, _subseed(seed, n), r)
        picked.append(t)
        rho = np.append(rho * (1.0 - lam), lam)
        expected = expected * (1.0 - lam) + lam * t.matrix()

    return HstMixture(picked, rho, source=dm)


def distortion(mixture: HstMixture, d) -> float:
    """Worst pair stretch of the mixture: max over i != j of E[d^t] / d."""
    dm = _dmat_of(d)
    h = dm.shape[0]
    if h <= 1:
        return 1.0
    off = ~np.eye(h, dtype=bool)
    mix = mixture.expected_matrix()
    return float((mix[off] / dm[off]).max())
