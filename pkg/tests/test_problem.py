import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance, single_edge
from quditqite.problem import (
    InstanceError,
    MinDCutInstance,
    PenaltyConfig,
    WeightedGraph,
    classical_cut_cost,
    generate_instance,
    instance_to_dict,
    is_feasible,
    load_instance,
    penalty_cost,
    penalty_from_counts,
    save_instance,
    total_cost,
)


def triangle(d=3, c_max=1, pen=None):
    g = WeightedGraph(3, [[0, 1], [1, 2], [0, 2]], [1, 2, 3])
    return MinDCutInstance(g, d, pen or PenaltyConfig.disabled(c_max))


def test_single_edge_cut_costs():
    inst = single_edge(weight=5)
    assert classical_cut_cost(inst, [1, 1]) == 0
    assert classical_cut_cost(inst, [0, 2]) == 5


def test_triangle_uncut():
    assert classical_cut_cost(triangle(), [2, 2, 2]) == 0
    assert classical_cut_cost(triangle(), [0, 1, 2]) == 6


def test_assignment_validation():
    inst = single_edge(d=3)
    with pytest.raises(InstanceError):
        classical_cut_cost(inst, [0])
    with pytest.raises(InstanceError):
        classical_cut_cost(inst, [0, 3])
    with pytest.raises(InstanceError):
        penalty_cost(inst, [-1, 0])


def test_full_partition_penalty_term_vanishes():
    assert penalty_from_counts(PenaltyConfig(4.0, 1.0, 5), [5]) == 0.0


def test_empty_partition_is_parabola_minimum():
    c = 7
    pen = PenaltyConfig.from_ratio(3.0, c)
    assert penalty_from_counts(pen, [0]) == pytest.approx(-pen.lambda2 * c * c, rel=1e-14)
    # stationary point of lambda2 u^2 - lambda1 u sits at u = lambda1 / (2 lambda2) = c
    assert pen.lambda1 / (2 * pen.lambda2) == pytest.approx(c, rel=1e-15)


def test_default_ratio_for_d7():
    inst = generate_instance(50, d=7, seed=0)
    assert inst.penalty.lambda1 == 30.0
    assert inst.penalty.lambda2 == 30.0 / (2 * inst.c_max)


def test_half_parabola_monotone():
    pen = PenaltyConfig.from_ratio(5.0, 34)
    vals = [penalty_from_counts(pen, [n]) for n in range(0, 101)]
    assert np.argmin(vals) == 0
    assert np.all(np.diff(vals) > 0)


def test_total_cost_single_edge_hand_value():
    # n_0 = 2: -l1 (1 - 2) + l2 (1 - 2)^2 = l1 + l2 ; n_1 = 0: -l1 + l2 ; sum = 2 l2
    inst = single_edge(weight=4, d=2, c_max=1, lambda1=2.0, lambda2=1.0)
    assert total_cost(inst, [0, 0]) == 2.0


def test_total_cost_empty_graph_is_penalty_only():
    inst = MinDCutInstance(WeightedGraph(3, np.zeros((0, 2)), []), 2, PenaltyConfig(1.0, 0.5, 2))
    for x in itertools.product(range(2), repeat=3):
        assert total_cost(inst, list(x)) == penalty_cost(inst, list(x))


def test_feasibility():
    g = WeightedGraph(4, [[0, 1], [2, 3]], [1, 1])
    inst = MinDCutInstance(g, 2, PenaltyConfig.disabled(2))
    ok, counts = is_feasible(inst, [0, 0, 1, 1])
    assert ok and counts.tolist() == [2, 2]
    ok, counts = is_feasible(inst, [0, 0, 0, 1])
    assert not ok and counts.tolist() == [3, 1]
    assert counts.sum() == 4


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=60, deadline=None)
def test_costs_invariant_under_label_permutation(seed):
    r = np.random.default_rng(seed)
    d = int(r.integers(2, 6))
    inst = random_instance(r, int(r.integers(2, 7)), d)
    x = r.integers(0, d, inst.num_vertices)
    perm = r.permutation(d)
    assert classical_cut_cost(inst, perm[x]) == classical_cut_cost(inst, x)
    assert penalty_cost(inst, perm[x]) == pytest.approx(penalty_cost(inst, x), abs=1e-12)


def test_graph_canonicalisation_and_validation():
    g = WeightedGraph(3, [[2, 0], [1, 0]], [4, 5])
    assert g.edges.tolist() == [[0, 1], [0, 2]]
    assert g.weights.tolist() == [5, 4]
    with pytest.raises(InstanceError):
        WeightedGraph(2, [[1, 1]], [1])
    with pytest.raises(InstanceError):
        WeightedGraph(2, [[0, 1], [1, 0]], [1, 1])
    with pytest.raises(InstanceError):
        WeightedGraph(2, [[0, 1]], [0])


def test_generated_c_max_and_lambdas():
    inst = generate_instance(50, d=3, seed=1)
    assert inst.c_max == 34 == math.ceil(100 / 3)
    assert inst.penalty.lambda1 == 5.0
    assert inst.penalty.lambda2 == 5.0 / 68
    assert generate_instance(50, d=5, seed=1).penalty.lambda1 == 20.0
    assert generate_instance(50, d=4, seed=1).penalty.lambda1 == 30.0
    assert generate_instance(50, d=4, seed=1, lambda1=7.0).penalty.lambda1 == 7.0


def test_generated_graph_properties():
    inst = generate_instance(120, neighbors=10, d=5, seed=3)
    g = inst.graph
    assert g.degrees().min() >= 10
    assert np.all(g.weights >= 1)
    assert np.all(g.edges[:, 0] < g.edges[:, 1])
    assert np.all(np.abs(g.coordinates) <= 1)
    # weight is the rounded reciprocal distance, clamped at 1
    dist = np.linalg.norm(g.coordinates[g.edges[:, 0]] - g.coordinates[g.edges[:, 1]], axis=1)
    np.testing.assert_array_equal(g.weights, np.maximum(np.rint(1 / dist), 1))


def test_weight_of_half_distance_is_two():
    assert np.rint(1 / 0.5) == 2


def test_generation_is_deterministic():
    a = instance_to_dict(generate_instance(60, d=3, seed=11))
    b = instance_to_dict(generate_instance(60, d=3, seed=11))
    assert a == b
    assert a != instance_to_dict(generate_instance(60, d=3, seed=12))


def test_generate_requires_enough_vertices():
    with pytest.raises(InstanceError):
        generate_instance(10, neighbors=10, d=3, seed=0)


def test_instance_round_trip(tmp_path):
    inst = generate_instance(30, neighbors=5, d=5, seed=4)
    path = tmp_path / "inst.json"
    save_instance(inst, path)
    back = load_instance(path)
    assert instance_to_dict(back) == instance_to_dict(inst)
    np.testing.assert_array_equal(back.graph.coordinates, inst.graph.coordinates)
    save_instance(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_load_rejects_garbage(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(InstanceError):
        load_instance(p)
