import numpy as np
import pytest

from quditqite.problem import MinDCutInstance, PenaltyConfig, WeightedGraph
from quditqite.qudit import ProductState

ACCEPTANCE_LINES = []


def random_instance(rng, n, d, edge_prob=0.7, max_weight=5, penalty=True):
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < edge_prob]
    weights = rng.integers(1, max_weight + 1, len(pairs))
    graph = WeightedGraph(n, np.array(pairs, dtype=np.int64).reshape(-1, 2), weights)
    c_max = int(rng.integers(1, n + 1))
    if penalty:
        pen = PenaltyConfig(float(rng.uniform(0, 5)), float(rng.uniform(0, 2)), c_max)
    else:
        pen = PenaltyConfig.disabled(c_max)
    return MinDCutInstance(graph, d, pen)


def random_state(rng, n, d):
    a = rng.standard_normal((n, d))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    return ProductState(a)


def single_edge(weight=1, d=3, c_max=2, lambda1=0.0, lambda2=0.0):
    graph = WeightedGraph(2, [[0, 1]], [weight])
    return MinDCutInstance(graph, d, PenaltyConfig(lambda1, lambda2, c_max))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def report():
    def _report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
