"""Max-flow / min-cut on directed graphs with real-valued capacities.

Augmenting-path solver in the Boykov-Kolmogorov style: two search trees grown
from the terminals with the usual grow / augment / adopt phases.  Terminal
arcs are implicit (per-node source and sink capacities).  The returned
partition is canonical: a node is on the source side iff it is reachable from
the source in the final residual graph, so ties between minimum cuts are
broken the same way on every run.
"""

import numpy as np
from numba import njit

# Residuals at or below this are treated as saturated.  Far below the 1e-9
# tolerance of the public contract, but nonzero so float drift cannot spawn
# vanishing augmentations.
CAP_EPS = 1e-12

_FREE, _SRC, _SNK = 0, 1, 2
_NONE = -1
_TERMINAL = -2


class FlowGraph:
    """Flow network over ``node_count`` plain nodes plus implicit terminals.

    Arcs are directed with non-negative real capacities; every arc gets a
    zero-capacity reverse companion internally.  Source/sink capacities
    attach nodes to the implicit terminals.
    """

    def __init__(self, node_count: int):
        if node_count < 0:
            raise ValueError("node_count must be >= 0")
        self.node_count = int(node_count)
        self.source_caps = np.zeros(self.node_count)
        self.sink_caps = np.zeros(self.node_count)
        self._tails: list[int] = []
        self._heads: list[int] = []
        self._caps: list[float] = []
        self._bulk: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    @classmethod
    def from_arrays(cls, node_count, tails, heads, caps, source_caps, sink_caps):
        """Build a graph from prepared arrays (bulk path used by the movers)."""
        g = cls(node_count)
        tails = np.ascontiguousarray(tails, np.int64)
        heads = np.ascontiguousarray(heads, np.int64)
        caps = np.ascontiguousarray(caps, np.float64)
        if not (tails.shape == heads.shape == caps.shape) or tails.ndim != 1:
            raise ValueError("tails/heads/caps must be 1-d arrays of equal length")
        if tails.size and (tails.min() < 0 or tails.max() >= node_count
                           or heads.min() < 0 or heads.max() >= node_count):
            raise ValueError("arc endpoint out of range")
        _check_caps(caps)
        source_caps = np.ascontiguousarray(source_caps, np.float64)
        sink_caps = np.ascontiguousarray(sink_caps, np.float64)
        if source_caps.shape != (node_count,) or sink_caps.shape != (node_count,):
            raise ValueError("terminal capacity arrays must have length node_count")
        _check_caps(source_caps)
        _check_caps(sink_caps)
        g.source_caps = source_caps.copy()
        g.sink_caps = sink_caps.copy()
        g._bulk = (tails, heads, caps)
        return g

    def add_arc(self, tail: int, head: int, cap: float) -> None:
        if not (0 <= tail < self.node_count and 0 <= head < self.node_count):
            raise ValueError("arc endpoint out of range")
        if not np.isfinite(cap) or cap < 0:
            raise ValueError("arc capacity must be finite and >= 0")
        self._tails.append(int(tail))
        self._heads.append(int(head))
        self._caps.append(float(cap))

    def add_terminal(self, node: int, source_cap: float = 0.0, sink_cap: float = 0.0) -> None:
        if not (0 <= node < self.node_count):
            raise ValueError("node out of range")
        if not (np.isfinite(source_cap) and np.isfinite(sink_cap)):
            raise ValueError("terminal capacity must be finite")
        if source_cap < 0 or sink_cap < 0:
            raise ValueError("terminal capacity must be >= 0")
        self.source_caps[node] += source_cap
        self.sink_caps[node] += sink_cap

    @property
    def arcs(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(tails, heads, capacities) over all arcs added so far."""
        t = np.asarray(self._tails, np.int64)
        h = np.asarray(self._heads, np.int64)
        c = np.asarray(self._caps, np.float64)
        if self._bulk is not None:
            bt, bh, bc = self._bulk
            t = np.concatenate([bt, t])
            h = np.concatenate([bh, h])
            c = np.concatenate([bc, c])
        return t, h, c


def _check_caps(caps: np.ndarray) -> None:
    if caps.size and (not np.all(np.isfinite(caps)) or caps.min() < 0):
        raise ValueError("capacities must be finite and >= 0")


def max_flow(graph: FlowGraph) -> tuple[float, np.ndarray]:
    """Maximum s-t flow value and the canonical minimum-cut partition.

    Returns ``(flow_value, side)`` where ``side[v]`` is True iff node v sits
    on the source side (reachable from the source in the residual graph).
    """
    n = graph.node_count
    tails, heads, caps = graph.arcs
    # flow routed source -> v -> sink directly never touches any arc
    pre = float(np.minimum(graph.source_caps, graph.sink_caps).sum())
    tcap = graph.source_caps - graph.sink_caps

    m = tails.size
    atails = np.empty(2 * m, np.int64)
    aheads = np.empty(2 * m, np.int64)
    res = np.zeros(2 * m)
    atails[0::2] = tails
    atails[1::2] = heads
    aheads[0::2] = heads
    aheads[1::2] = tails
    res[0::2] = caps

    first, nxt = _build_adjacency(atails, n)
    fl, side = _bk_kernel(first, nxt, atails, aheads, res, tcap)
    return float(fl) + pre, side.astype(bool)


@njit(cache=True, nogil=True)
def _build_adjacency(tails, n):
    m = tails.size
    first = np.full(n, -1, np.int64)
    nxt = np.full(m, -1, np.int64)
    for a in range(m - 1, -1, -1):  # reversed, so lists run in insertion order
        t = tails[a]
        nxt[a] = first[t]
        first[t] = a
    return first, nxt


@njit(cache=True, nogil=True)
def _root_check(v, tree, parent, dist, stamp, tails, heads, time):
    # Walk v's parent chain; valid iff it ends at a terminal.  Chains checked
    # earlier in the same adoption phase are recognised by their stamp.  On
    # success the walked chain is re-stamped with corrected distances.
    q = v
    steps = 0
    while True:
        if stamp[q] == time:
            base = dist[q]
            break
        pa = parent[q]
        if pa == _TERMINAL:
            base = 0
            break
        if pa == _NONE:
            return False, 0
        q = tails[pa] if tree[q] == _SRC else heads[pa]
        steps += 1
    q = v
    for k in range(steps):
        dist[q] = base + steps - k
        stamp[q] = time
        pa = parent[q]
        q = tails[pa] if tree[q] == _SRC else heads[pa]
    dist[q] = base
    stamp[q] = time
    return True, base + steps


@njit(cache=True, nogil=True)
def _bk_kernel(first, nxt, tails, heads, res, tcap):
    n = tcap.size
    tree = np.zeros(n, np.int8)
    parent = np.full(n, _NONE, np.int64)  # arc id; _TERMINAL marks roots
    dist = np.zeros(n, np.int64)
    stamp = np.zeros(n, np.int64)
    time = 1

    qcap = n + 2
    active = np.empty(qcap, np.int64)
    a_head = 0
    a_count = 0
    in_active = np.zeros(n, np.uint8)
    orphans = np.empty(qcap, np.int64)
    o_head = 0
    o_count = 0

    for v in range(n):
        if tcap[v] > CAP_EPS:
            tree[v] = _SRC
        elif tcap[v] < -CAP_EPS:
            tree[v] = _SNK
        else:
            continue
        parent[v] = _TERMINAL
        stamp[v] = time
        active[(a_head + a_count) % qcap] = v
        a_count += 1
        in_active[v] = 1

    flow = 0.0
    while True:
        # -------- grow --------
        conn = -1
        while a_count > 0:
            u = active[a_head]
            tu = tree[u]
            if tu == _FREE:  # stale entry left behind by adoption
                a_head = (a_head + 1) % qcap
                a_count -= 1
                in_active[u] = 0
                continue
            a = first[u]
            while a != -1:
                r = res[a] if tu == _SRC else res[a ^ 1]
                if r > CAP_EPS:
                    v = heads[a]
                    tv = tree[v]
                    if tv == _FREE:
                        tree[v] = tu
                        parent[v] = a if tu == _SRC else a ^ 1
                        dist[v] = dist[u] + 1
                        stamp[v] = stamp[u]
                        if in_active[v] == 0:
                            active[(a_head + a_count) % qcap] = v
                            a_count += 1
                            in_active[v] = 1
                    elif tv != tu:
                        # trees touch: arc oriented source tree -> sink tree
                        conn = a if tu == _SRC else a ^ 1
                        break
                    elif stamp[v] <= stamp[u] and dist[v] > dist[u] + 1:
                        parent[v] = a if tu == _SRC else a ^ 1
                        dist[v] = dist[u] + 1
                        stamp[v] = stamp[u]
                a = nxt[a]
            if conn != -1:
                break  # u stays active: it may connect again later
            a_head = (a_head + 1) % qcap
            a_count -= 1
            in_active[u] = 0
        if conn == -1:
            break

        time += 1

        # -------- augment --------
        bn = res[conn]
        x = tails[conn]
        while parent[x] != _TERMINAL:
            pa = parent[x]
            if res[pa] < bn:
                bn = res[pa]
            x = tails[pa]
        if tcap[x] < bn:
            bn = tcap[x]
        y = heads[conn]
        while parent[y] != _TERMINAL:
            pa = parent[y]
            if res[pa] < bn:
                bn = res[pa]
            y = heads[pa]
        if -tcap[y] < bn:
            bn = -tcap[y]

        flow += bn
        res[conn] -= bn
        res[conn ^ 1] += bn
        x = tails[conn]
        while parent[x] != _TERMINAL:
            pa = parent[x]
            res[pa] -= bn
            res[pa ^ 1] += bn
            px = tails[pa]
            if res[pa] <= CAP_EPS:
                parent[x] = _NONE
                orphans[(o_head + o_count) % qcap] = x
                o_count += 1
            x = px
        tcap[x] -= bn
        if tcap[x] <= CAP_EPS:
            parent[x] = _NONE
            orphans[(o_head + o_count) % qcap] = x
            o_count += 1
        y = heads[conn]
        while parent[y] != _TERMINAL:
            pa = parent[y]
            res[pa] -= bn
            res[pa ^ 1] += bn
            py = heads[pa]
            if res[pa] <= CAP_EPS:
                parent[y] = _NONE
                orphans[(o_head + o_count) % qcap] = y
                o_count += 1
            y = py
        tcap[y] += bn
        if tcap[y] >= -CAP_EPS:
            parent[y] = _NONE
            orphans[(o_head + o_count) % qcap] = y
            o_count += 1

        # -------- adopt --------
        while o_count > 0:
            u = orphans[o_head]
            o_head = (o_head + 1) % qcap
            o_count -= 1
            tu = tree[u]
            adopted = False
            a = first[u]
            while a != -1:
                v = heads[a]
                if tree[v] == tu:
                    r = res[a ^ 1] if tu == _SRC else res[a]
                    if r > CAP_EPS:
                        ok, dv = _root_check(v, tree, parent, dist, stamp,
                                             tails, heads, time)
                        if ok:
                            parent[u] = a ^ 1 if tu == _SRC else a
                            dist[u] = dv + 1
                            stamp[u] = time
                            adopted = True
                            break
                a = nxt[a]
            if not adopted:
                # u leaves the tree: wake neighbours that could re-grow
                # toward it, orphan its children
                a = first[u]
                while a != -1:
                    v = heads[a]
                    if tree[v] == tu:
                        r = res[a ^ 1] if tu == _SRC else res[a]
                        if r > CAP_EPS and in_active[v] == 0:
                            active[(a_head + a_count) % qcap] = v
                            a_count += 1
                            in_active[v] = 1
                        pv = parent[v]
                        if pv >= 0:
                            pnode = tails[pv] if tu == _SRC else heads[pv]
                            if pnode == u:
                                parent[v] = _NONE
                                orphans[(o_head + o_count) % qcap] = v
                                o_count += 1
                    a = nxt[a]
                tree[u] = _FREE

    # canonical cut: everything reachable from the source in the residual
    side = np.zeros(n, np.uint8)
    stack = np.empty(n, np.int64)
    top = 0
    for v in range(n):
        if tcap[v] > CAP_EPS:
            side[v] = 1
            stack[top] = v
            top += 1
    while top > 0:
        top -= 1
        u = stack[top]
        a = first[u]
        while a != -1:
            v = heads[a]
            if side[v] == 0 and res[a] > CAP_EPS:
                side[v] = 1
                stack[top] = v
                top += 1
            a = nxt[a]
    return flow, side
