import numpy as np
import pytest

from hiercut.maxflow import FlowGraph, max_flow


def _cut_capacity(n, arcs, src, snk, side):
    """Capacity of the cut induced by a source-side indicator array."""
    cap = 0.0
    for v in range(n):
        cap += snk[v] if side[v] else src[v]
    for t, h, c in arcs:
        if side[t] and not side[h]:
            cap += c
    return cap


def _exhaustive_min_cut(n, arcs, src, snk):
    """Brute-force minimum cut by enumerating all 2^n partitions."""
    best = np.inf
    for mask in range(1 << n):
        side = [(mask >> v) & 1 for v in range(n)]
        best = min(best, _cut_capacity(n, arcs, src, snk, side))
    return best


def _random_graph(rng, n, max_arcs, cap_sampler):
    g = FlowGraph(n)
    arcs = []
    for _ in range(rng.integers(0, max_arcs + 1)):
        t, h = rng.integers(0, n, size=2)
        if t == h:
            continue
        c = cap_sampler(rng)
        g.add_arc(int(t), int(h), c)
        arcs.append((int(t), int(h), c))
    src = np.zeros(n)
    snk = np.zeros(n)
    for v in range(n):
        src[v] = cap_sampler(rng)
        snk[v] = cap_sampler(rng)
        g.add_terminal(v, src[v], snk[v])
    return g, arcs, src, snk


def test_two_node_frozen_example():
    # src caps (3, 2), sink caps (2, 3), one arc 0->1 of capacity 1.
    # All four cuts enumerate to capacities 5, 5, 6, 5 -> min is 5.
    g = FlowGraph(2)
    g.add_terminal(0, 3.0, 2.0)
    g.add_terminal(1, 2.0, 3.0)
    g.add_arc(0, 1, 1.0)
    flow, side = max_flow(g)
    assert flow == 5.0
    assert _exhaustive_min_cut(2, [(0, 1, 1.0)], [3, 2], [2, 3]) == 5.0


def test_single_node_source_side():
    g = FlowGraph(1)
    g.add_terminal(0, 5.0, 3.0)
    flow, side = max_flow(g)
    assert flow == 3.0
    # residual from the source remains, so the node is on the source side
    assert side[0]


def test_empty_graph():
    g = FlowGraph(0)
    flow, side = max_flow(g)
    assert flow == 0.0
    assert side.size == 0


def test_no_arcs_isolated_nodes():
    g = FlowGraph(3)
    flow, side = max_flow(g)
    assert flow == 0.0
    assert not side.any()  # nothing reachable from the source


def test_validation_errors():
    g = FlowGraph(2)
    with pytest.raises(ValueError):
        g.add_arc(0, 1, -2.0)
    with pytest.raises(ValueError):
        g.add_arc(0, 5, 1.0)
    with pytest.raises(ValueError):
        g.add_terminal(0, -1.0, 0.0)
    with pytest.raises(ValueError):
        g.add_terminal(7, 1.0, 0.0)
    with pytest.raises(ValueError):
        FlowGraph(-1)
    with pytest.raises(ValueError):
        FlowGraph.from_arrays(2, [0], [1], [-1.0], np.zeros(2), np.zeros(2))


def test_random_integer_graphs_match_oracle():
    rng = np.random.default_rng(7)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        g, arcs, src, snk = _random_graph(
            rng, n, 3 * n, lambda r: float(r.integers(0, 10)))
        flow, side = max_flow(g)
        want = _exhaustive_min_cut(n, arcs, src, snk)
        assert flow == want  # integer capacities: exact arithmetic
        assert _cut_capacity(n, arcs, src, snk, side) == want


def test_random_real_graphs_cut_consistency():
    rng = np.random.default_rng(11)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        g, arcs, src, snk = _random_graph(
            rng, n, 3 * n, lambda r: float(r.uniform(0, 10)))
        flow, side = max_flow(g)
        want = _exhaustive_min_cut(n, arcs, src, snk)
        assert abs(flow - want) <= 1e-9
        # the returned partition itself is a minimum cut
        assert abs(_cut_capacity(n, arcs, src, snk, side) - flow) <= 1e-9


def test_parallel_and_antiparallel_arcs():
    g = FlowGraph(2)
    g.add_terminal(0, 10.0, 0.0)
    g.add_terminal(1, 0.0, 10.0)
    g.add_arc(0, 1, 2.0)
    g.add_arc(0, 1, 3.0)
    g.add_arc(1, 0, 4.0)
    flow, side = max_flow(g)
    assert flow == 5.0


def test_chain_graph():
    n = 6
    g = FlowGraph(n)
    g.add_terminal(0, 7.0, 0.0)
    g.add_terminal(n - 1, 0.0, 7.0)
    for v in range(n - 1):
        g.add_arc(v, v + 1, float(v + 1))
    flow, side = max_flow(g)
    assert flow == 1.0  # bottleneck is the first chain arc
    assert side[0] and not side[1:].any()


def test_determinism_identical_partition():
    rng = np.random.default_rng(3)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        g, arcs, src, snk = _random_graph(
            rng, n, 3 * n, lambda r: float(r.uniform(0, 10)))
        f1, s1 = max_flow(g)
        f2, s2 = max_flow(g)
        assert f1 == f2
        assert np.array_equal(s1, s2)


def test_from_arrays_bulk_matches_incremental():
    rng = np.random.default_rng(5)
    n = 6
    g, arcs, src, snk = _random_graph(rng, n, 15, lambda r: float(r.uniform(0, 9)))
    t = np.array([a[0] for a in arcs], np.int64)
    h = np.array([a[1] for a in arcs], np.int64)
    c = np.array([a[2] for a in arcs])
    gb = FlowGraph.from_arrays(n, t, h, c, src, snk)
    f1, s1 = max_flow(g)
    f2, s2 = max_flow(gb)
    assert f1 == f2
    assert np.array_equal(s1, s2)
