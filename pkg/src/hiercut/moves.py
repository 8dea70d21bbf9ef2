"""Move-making primitives built on st-mincut.

All movers share one binary step: each variable chooses between two options
(keep/take, alpha/beta, or current-proposal/new-proposal), the pairwise cost
table is reparameterized into terminal and arc capacities, any negative arc
capacity left over (possible only for non-metric distances) is truncated to
zero and counted, and a candidate labeling is accepted only when the exact
objective drops by more than DECREASE_TOL.
"""

from dataclasses import dataclass, field

import numpy as np

from .maxflow import FlowGraph, max_flow
from .mrf import check_labeling, energy

# a move must beat the incumbent by this margin to be accepted; keeps the
# sweep loops terminating with real-valued potentials
DECREASE_TOL = 1e-9
# arc capacities below -TRUNC_TOL count as genuine submodularity violations;
# anything in (-TRUNC_TOL, 0) is treated as float noise
TRUNC_TOL = 1e-9


@dataclass
class MoveStats:
    """Counters accumulated across binary moves."""

    passes: int = 0
    accepted_moves: int = 0
    truncated_edges: int = 0
    energy_trace: list = field(default_factory=list)


def _binary_min_cut(cost0, cost1, ea, eb, A, B, C, D, n):
    """Solve min over x in {0,1}^n of sum cost_x + sum theta(x_a, x_b).

    Per-edge tables are given as A=theta(0,0), B=theta(0,1), C=theta(1,0),
    D=theta(1,1).  Returns (take, truncated) where take[a] is True iff x_a=1
    (the node ends on the sink side) and truncated counts edges whose
    reparameterized capacity B+C-A-D fell below -TRUNC_TOL.
    """
    cap = B + C - A - D
    truncated = int(np.count_nonzero(cap < -TRUNC_TOL))
    np.clip(cap, 0.0, None, out=cap)

    c0 = np.ascontiguousarray(cost0, np.float64).copy()
    c1 = np.ascontiguousarray(cost1, np.float64).copy()
    if len(ea):
        c1 += np.bincount(ea, weights=C - A, minlength=n)
        c1 += np.bincount(eb, weights=D - C, minlength=n)
    shift = np.minimum(c0, c1)
    src = c1 - shift  # paid when x=1: the s->a arc is cut for sink-side nodes
    snk = c0 - shift  # paid when x=0

    keep = cap > 0.0
    g = FlowGraph.from_arrays(n, ea[keep], eb[keep], cap[keep], src, snk)
    _, side = max_flow(g)
    return ~side, truncated


def _distance_matrix(instance, override):
    if override is None:
        return instance.distance_matrix()
    m = override if isinstance(override, np.ndarray) else override.matrix()
    m = np.ascontiguousarray(m, np.float64)
    h = instance.n_labels
    if m.shape != (h, h):
        raise ValueError(f"override distance is {m.shape}, expected {(h, h)}")
    return m


def expansion_move(instance, f, alpha, stats=None):
    """One alpha-expansion step: every variable keeps its label or takes alpha.

    Returns (labeling, stats).  The cut candidate is adopted only if its true
    energy is lower than the current one by more than DECREASE_TOL; otherwise
    the input labeling is returned.
    """
    f = check_labeling(instance, f)
    alpha = int(alpha)
    if not 0 <= alpha < instance.n_labels:
        raise ValueError("alpha out of label range")
    st = stats if stats is not None else MoveStats()

    dm = instance.distance_matrix()
    ea = instance.edges[:, 0]
    eb = instance.edges[:, 1]
    w = instance.weights
    la, lb = f[ea], f[eb]

    A = w * dm[la, lb]
    B = w * dm[la, alpha]
    C = w * dm[alpha, lb]
    D = np.zeros_like(A)  # d(alpha, alpha) = 0

    n = instance.n_vars
    cost0 = instance.unary[np.arange(n), f]
    cost1 = instance.unary[:, alpha]

    take, truncated = _binary_min_cut(cost0, cost1, ea, eb, A, B, C, D, n)
    st.truncated_edges += truncated

    e_old = float(energy(instance, f))
    if not st.energy_trace:
        st.energy_trace.append(e_old)
    cand = np.where(take, alpha, f)
    if np.array_equal(cand, f):
        return f, st
    e_new = float(energy(instance, cand))
    if e_new < e_old - DECREASE_TOL:
        st.accepted_moves += 1
        st.energy_trace.append(e_new)
        return cand, st
    return f, st


def alpha_expansion(instance, f0, stats=None):
    """Sweep expansion moves over labels 0..H-1 until a pass accepts nothing."""
    f = check_labeling(instance, f0)
    st = stats if stats is not None else MoveStats()
    st.energy_trace.append(float(energy(instance, f)))
    improved = True
    while improved:
        improved = False
        st.passes += 1
        for alpha in range(instance.n_labels):
            delta = MoveStats()
            f2, _ = expansion_move(instance, f, alpha, stats=delta)
            st.truncated_edges += delta.truncated_edges
            if delta.accepted_moves:
                st.accepted_moves += 1
                st.energy_trace.append(delta.energy_trace[-1])
                f = f2
                improved = True
    return f, st


def _swap_move(instance, f, a_lab, b_lab, dm):
    """Exact binary solve over variables labeled a_lab/b_lab; x=1 takes b_lab."""
    members = (f == a_lab) | (f == b_lab)
    ids = np.flatnonzero(members)
    k = ids.size
    if k == 0:
        return f, 0
    loc = np.full(instance.n_vars, -1, np.int64)
    loc[ids] = np.arange(k)

    ea = instance.edges[:, 0]
    eb = instance.edges[:, 1]
    w = instance.weights
    ma, mb = members[ea], members[eb]

    cost0 = instance.unary[ids, a_lab].copy()
    cost1 = instance.unary[ids, b_lab].copy()
    # boundary edges contribute fixed-neighbour unary-like terms
    only_a = ma & ~mb
    if only_a.any():
        tgt, other = loc[ea[only_a]], f[eb[only_a]]
        ww = w[only_a]
        cost0 += np.bincount(tgt, weights=ww * dm[a_lab, other], minlength=k)
        cost1 += np.bincount(tgt, weights=ww * dm[b_lab, other], minlength=k)
    only_b = mb & ~ma
    if only_b.any():
        tgt, other = loc[eb[only_b]], f[ea[only_b]]
        ww = w[only_b]
        cost0 += np.bincount(tgt, weights=ww * dm[other, a_lab], minlength=k)
        cost1 += np.bincount(tgt, weights=ww * dm[other, b_lab], minlength=k)

    both = ma & mb
    sa, sb = loc[ea[both]], loc[eb[both]]
    ww = w[both]
    A = np.zeros(ww.size)  # d(a_lab, a_lab)
    B = ww * dm[a_lab, b_lab]
    C = ww * dm[b_lab, a_lab]
    D = np.zeros(ww.size)

    take, truncated = _binary_min_cut(cost0, cost1, sa, sb, A, B, C, D, k)
    g = f.copy()
    g[ids] = np.where(take, b_lab, a_lab)
    return g, truncated


def ab_swap(instance, f0, stats=None):
    """Sweep swap moves over all unordered label pairs until no improvement."""
    f = check_labeling(instance, f0)
    st = stats if stats is not None else MoveStats()
    e_cur = float(energy(instance, f))
    st.energy_trace.append(e_cur)
    dm = instance.distance_matrix()
    h = instance.n_labels
    improved = True
    while improved:
        improved = False
        st.passes += 1
        for a_lab in range(h):
            for b_lab in range(a_lab + 1, h):
                cand, truncated = _swap_move(instance, f, a_lab, b_lab, dm)
                st.truncated_edges += truncated
                if cand is f or np.array_equal(cand, f):
                    continue
                e_new = float(energy(instance, cand))
                if e_new < e_cur - DECREASE_TOL:
                    f, e_cur = cand, e_new
                    st.accepted_moves += 1
                    st.energy_trace.append(e_cur)
                    improved = True
    return f, st


def fuse(instance, proposals, pairwise_distance=None, stats=None):
    """Combine candidate labelings by expansion over proposal indices.

    The meta-problem has one label per proposal: variable a under meta-label i
    costs unary[a, f_i(a)], and an edge (a,b) under (i,j) costs
    w_ab * D(f_i(a), f_j(b)) with D taken from pairwise_distance (the
    instance's own distance when omitted).  The sweep starts at the proposal
    whose fused objective is lowest (smallest index on ties) and therefore
    never returns anything worse than the best input.
    """
    P = np.stack([check_labeling(instance, p) for p in proposals])
    n_prop = P.shape[0]
    if n_prop == 1:
        return P[0].copy()
    dmat = _distance_matrix(instance, pairwise_distance)
    st = stats if stats is not None else MoveStats()

    ea = instance.edges[:, 0]
    eb = instance.edges[:, 1]
    w = instance.weights
    n = instance.n_vars
    rows = np.arange(n)
    meta_unary = instance.unary[rows[:, None], P.T]  # (n, n_prop)
    Pa, Pb = P[:, ea], P[:, eb]

    def fused_objective(idx):
        pair = (w * dmat[P[idx[ea], ea], P[idx[eb], eb]]).sum()
        return float(meta_unary[rows, idx].sum() + pair)

    base = [fused_objective(np.full(n, i, np.int64)) for i in range(n_prop)]
    start = int(np.argmin(base))
    idx = np.full(n, start, np.int64)
    e_cur = base[start]
    st.energy_trace.append(e_cur)

    improved = True
    while improved:
        improved = False
        st.passes += 1
        for c in range(n_prop):
            la, lb = P[idx[ea], ea], P[idx[eb], eb]
            A = w * dmat[la, lb]
            B = w * dmat[la, Pb[c]]
            C = w * dmat[Pa[c], lb]
            D = w * dmat[Pa[c], Pb[c]]
            cost0 = meta_unary[rows, idx]
            cost1 = meta_unary[:, c]
            take, truncated = _binary_min_cut(cost0, cost1, ea, eb, A, B, C, D, n)
            st.truncated_edges += truncated
            if not take.any():
                continue
            cand = np.where(take, c, idx)
            if np.array_equal(cand, idx):
                continue
            e_new = fused_objective(cand)
            if e_new < e_cur - DECREASE_TOL:
                idx, e_cur = cand, e_new
                st.accepted_moves += 1
                st.energy_trace.append(e_cur)
                improved = True
    return P[idx, rows]
