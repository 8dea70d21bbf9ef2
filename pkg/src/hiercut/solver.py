"""Hierarchical MAP inference over tree metrics and mixtures of trees.

The pipeline: embed the pairwise distance into a mixture of dominating
hierarchical trees, solve the labeling problem bottom-up on each tree with
fusion moves, combine the per-tree labelings with one more fusion, and
optionally refine by re-fitting a single tree to the current labeling's
pair statistics.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .distances import TreeDistance
from .hst import _subseed, distortion, dp_solve, learn_mixture
from .moves import DECREASE_TOL, MoveStats, fuse
from .mrf import check_labeling, energy


@dataclass
class SolveConfig:
    trees: int = 50
    lam: float = 0.1
    dp_samples: int = 64
    seed: int = 0
    use_original_distance_in_subproblems: bool = True
    refine: bool = False
    max_refine_iters: int = 20
    workers: int = 1

    def __post_init__(self):
        if self.trees < 1:
            raise ValueError("trees must be >= 1")
        if not 0.0 < self.lam < 1.0:
            raise ValueError("lam must lie in (0, 1)")
        if self.dp_samples < 1:
            raise ValueError("dp_samples must be >= 1")
        if self.max_refine_iters < 0:
            raise ValueError("max_refine_iters must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class SolveReport:
    labeling: np.ndarray
    energy: float
    per_tree_energies: list
    distortion: float
    phase_seconds: dict
    refine_trace: list = field(default_factory=list)
    refine_capped: bool = False


def solve_hst(instance, tree, config=None, stats_sink=None):
    """Label the instance bottom-up along one hierarchical tree.

    Each leaf proposes its constant labeling; every internal node fuses its
    children's labelings.  The fusion distance is the instance's own d by
    default (this usually lands on better labelings) or the tree metric when
    config.use_original_distance_in_subproblems is off, in which case every
    fusion subproblem is submodular and solved exactly.
    """
    cfg = config if config is not None else SolveConfig()
    if tree.h != instance.n_labels:
        raise ValueError(f"tree has {tree.h} leaves, instance has "
                         f"{instance.n_labels} labels")
    override = None if cfg.use_original_distance_in_subproblems else tree.matrix()
    n = instance.n_vars

    def rec(node):
        if node.is_leaf:
            return np.full(n, node.label, np.int64)
        proposals = [rec(c) for c in node.children]
        st = MoveStats()
        out = fuse(instance, proposals, pairwise_distance=override, stats=st)
        if stats_sink is not None:
            stats_sink.append(st)
        return out

    return rec(tree.root)


def solve_semimetric(instance, mixture, config=None, stats_sink=None):
    """Solve on every tree of the mixture, then fuse the tree labelings.

    Returns (labeling, per_tree_energies).  Tree subproblems are independent
    and run on a thread pool when config.workers > 1; results are collected
    in tree order so the outcome does not depend on scheduling.
    """
    cfg = config if config is not None else SolveConfig()
    for t in mixture.trees:
        if t.h != instance.n_labels:
            raise ValueError("mixture labels do not match instance labels")

    def one(i):
        sink = [] if stats_sink is not None else None
        lab = solve_hst(instance, mixture.trees[i], cfg, stats_sink=sink)
        return lab, sink

    n_trees = len(mixture.trees)
    if cfg.workers > 1 and n_trees > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(one, range(n_trees)))
    else:
        results = [one(i) for i in range(n_trees)]

    proposals = []
    for lab, sink in results:
        proposals.append(lab)
        if stats_sink is not None:
            stats_sink.extend(sink)

    per_tree = [float(energy(instance, lab)) for lab in proposals]
    st = MoveStats()
    combined = fuse(instance, proposals, stats=st)
    if stats_sink is not None:
        stats_sink.append(st)
    return combined, per_tree


def refine(instance, f, config=None, stats_sink=None):
    """Alternate tree re-fitting and tree solving from the current labeling.

    Each round accumulates y_ij = total weight of edges whose endpoints
    currently take labels i and j, finds a dominating tree minimizing the
    y-weighted tree distances, re-solves, and keeps the result only if the
    energy strictly decreases.  Returns (labeling, trace); the iteration cap
    was hit iff len(trace) - 1 == config.max_refine_iters.
    """
    cfg = config if config is not None else SolveConfig()
    f = check_labeling(instance, f)
    dm = instance.distance_matrix()
    h = instance.n_labels
    ea = instance.edges[:, 0]
    eb = instance.edges[:, 1]
    trace = [float(energy(instance, f))]
    for it in range(cfg.max_refine_iters):
        y = np.zeros((h, h))
        np.add.at(y, (f[ea], f[eb]), instance.weights)
        y = y + y.T
        np.fill_diagonal(y, 0.0)
        t = dp_solve(y, dm, samples=cfg.dp_samples,
                     seed=_subseed(cfg.seed, cfg.trees + it))
        cand = solve_hst(instance, t, cfg, stats_sink=stats_sink)
        e_new = float(energy(instance, cand))
        if e_new < trace[-1] - DECREASE_TOL:
            f = cand
            trace.append(e_new)
        else:
            break
    return f, trace


def solve(instance, config=None, stats_sink=None):
    """Full pipeline; returns a SolveReport.

    Instances whose distance already is a tree skip the embedding and run a
    single tree solve with distortion 1.  Everything downstream of the seed
    is deterministic, including under worker threads.
    """
    cfg = config if config is not None else SolveConfig()
    phases = {}

    dist = instance.distance
    direct_tree = getattr(dist, "tree", None) if isinstance(dist, TreeDistance) else None
    if direct_tree is not None and hasattr(direct_tree, "root"):
        t0 = time.perf_counter()
        labeling = solve_hst(instance, direct_tree, cfg, stats_sink=stats_sink)
        phases["embed"] = 0.0
        phases["solve"] = time.perf_counter() - t0
        per_tree = [float(energy(instance, labeling))]
        dist_value = 1.0
    else:
        dm = instance.distance_matrix()
        t0 = time.perf_counter()
        mixture = learn_mixture(dm, trees=cfg.trees, lam=cfg.lam,
                                samples=cfg.dp_samples, seed=cfg.seed)
        phases["embed"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        labeling, per_tree = solve_semimetric(instance, mixture, cfg,
                                              stats_sink=stats_sink)
        phases["solve"] = time.perf_counter() - t0
        dist_value = float(distortion(mixture, dm))

    trace = [float(energy(instance, labeling))]
    capped = False
    if cfg.refine:
        t0 = time.perf_counter()
        labeling, trace = refine(instance, labeling, cfg, stats_sink=stats_sink)
        phases["refine"] = time.perf_counter() - t0
        capped = cfg.max_refine_iters > 0 and len(trace) - 1 == cfg.max_refine_iters
    else:
        phases["refine"] = 0.0

    return SolveReport(
        labeling=labeling,
        energy=float(energy(instance, labeling)),
        per_tree_energies=per_tree,
        distortion=dist_value,
        phase_seconds=phases,
        refine_trace=trace,
        refine_capped=capped,
    )
