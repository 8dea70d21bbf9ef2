import numpy as np
import pytest

from hiercut.distances import TruncatedLinear, Uniform
from hiercut.mrf import MrfInstance, energy


def _energy_oracle(instance, f):
    """Independent re-summation with plain Python loops."""
    total = 0.0
    for a in range(instance.n_vars):
        total += instance.unary[a, f[a]]
    for (a, b), w in zip(instance.edges, instance.weights):
        total += w * instance.distance.eval(int(f[a]), int(f[b]))
    return total


def _random_instance(rng, n, h):
    unary = rng.uniform(0, 10, size=(n, h))
    edges = []
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < 0.4:
                edges.append((a, b))
    if not edges:
        edges = [(0, n - 1)]
    weights = rng.uniform(0, 2, size=len(edges))
    return MrfInstance(unary, edges, weights, TruncatedLinear(h, float(rng.uniform(1, 5))))


def test_energy_matches_oracle():
    rng = np.random.default_rng(0)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        h = int(rng.integers(2, 6))
        inst = _random_instance(rng, n, h)
        f = rng.integers(0, h, size=n)
        assert energy(inst, f) == pytest.approx(_energy_oracle(inst, f), rel=1e-12)


def test_energy_unary_only():
    inst = MrfInstance([[1.0, 2.0], [5.0, 0.5]], np.zeros((0, 2)), [], Uniform(2))
    assert energy(inst, [0, 1]) == 1.5
    assert energy(inst, np.array([1, 0])) == 7.0


def test_energy_label_range_rejected():
    inst = MrfInstance([[0.0, 0.0]], np.zeros((0, 2)), [], Uniform(2))
    with pytest.raises(ValueError):
        energy(inst, [2])
    with pytest.raises(ValueError):
        energy(inst, [-1])
    with pytest.raises(ValueError):
        energy(inst, [0, 1])


def test_instance_validation():
    u = np.zeros((3, 2))
    d = Uniform(2)
    with pytest.raises(ValueError):
        MrfInstance(u, [(0, 0)], [1.0], d)  # self loop
    with pytest.raises(ValueError):
        MrfInstance(u, [(1, 0)], [1.0], d)  # a >= b
    with pytest.raises(ValueError):
        MrfInstance(u, [(0, 1), (0, 1)], [1.0, 1.0], d)  # duplicate
    with pytest.raises(ValueError):
        MrfInstance(u, [(0, 3)], [1.0], d)  # endpoint range
    with pytest.raises(ValueError):
        MrfInstance(u, [(0, 1)], [-1.0], d)  # negative weight
    with pytest.raises(ValueError):
        MrfInstance(u, [(0, 1)], [1.0], Uniform(3))  # H mismatch
    with pytest.raises(ValueError):
        MrfInstance(np.full((2, 2), np.nan), [], [], d)


def test_single_label_instance():
    inst = MrfInstance([[2.0], [3.0]], [(0, 1)], [1.0], Uniform(1))
    assert energy(inst, [0, 0]) == 5.0
