"""Capacity-constrained Min-d-Cut instances.

The integer cost is ``sum_edges W_ij [x_i != x_j]`` and each partition k
carries the unbalanced-penalization parabola
``-lambda1 (C - n_k) + lambda2 (C - n_k)^2``.
"""
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

INSTANCE_SCHEMA_VERSION = 1

# Linear penalty scalar per number of partitions; other d fall back to 30.
DEFAULT_LAMBDA1 = {3: 5.0, 5: 20.0, 7: 30.0}
FALLBACK_LAMBDA1 = 30.0

MIN_SEPARATION = 1e-6


class InstanceError(ValueError):
    pass


@dataclass
class WeightedGraph:
    num_vertices: int
    edges: np.ndarray  # (E, 2) int64, rows (i, j) with i < j, lexicographically sorted
    weights: np.ndarray  # (E,) int64, all >= 1
    coordinates: np.ndarray | None = None

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.int64).reshape(-1)
        if len(edges) != len(weights):
            raise InstanceError("edges and weights differ in length")
        if len(edges):
            if np.any(edges[:, 0] == edges[:, 1]):
                raise InstanceError("self-loops are not allowed")
            if edges.min() < 0 or edges.max() >= self.num_vertices:
                raise InstanceError("edge endpoint out of range")
            if np.any(weights < 1):
                raise InstanceError("edge weights must be positive integers")
        # canonical orientation and order
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((hi, lo))
        edges = np.stack([lo[order], hi[order]], axis=1)
        weights = weights[order]
        if len(edges) > 1 and np.any(np.all(edges[1:] == edges[:-1], axis=1)):
            raise InstanceError("duplicate edge")
        self.edges = edges
        self.weights = weights
        if self.coordinates is not None:
            self.coordinates = np.asarray(self.coordinates, dtype=np.float64).reshape(-1, 2)

    @property
    def num_edges(self):
        return len(self.edges)

    def degrees(self):
        return np.bincount(self.edges.ravel(), minlength=self.num_vertices)

    def adjacency(self):
        """Per-vertex list of (neighbor, weight) in ascending edge order."""
        adj = [[] for _ in range(self.num_vertices)]
        for (i, j), w in zip(self.edges.tolist(), self.weights.tolist()):
            adj[i].append((j, w))
            adj[j].append((i, w))
        return adj


@dataclass(frozen=True)
class PenaltyConfig:
    lambda1: float
    lambda2: float
    c_max: int

    @classmethod
    def from_ratio(cls, lambda1, c_max):
        """lambda2 chosen so the parabola's minimum sits at an empty partition."""
        return cls(float(lambda1), float(lambda1) / (2 * c_max), int(c_max))

    @classmethod
    def disabled(cls, c_max):
        return cls(0.0, 0.0, int(c_max))


@dataclass
class MinDCutInstance:
    graph: WeightedGraph
    num_partitions: int
    penalty: PenaltyConfig
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_partitions < 2:
            raise InstanceError("need at least two partitions")
        if self.penalty.c_max < 1:
            raise InstanceError("c_max must be >= 1")

    @property
    def num_vertices(self):
        return self.graph.num_vertices

    @property
    def d(self):
        return self.num_partitions

    @property
    def c_max(self):
        return self.penalty.c_max


def default_c_max(num_vertices, d):
    return math.ceil(2 * num_vertices / d)


def default_lambda1(d):
    return DEFAULT_LAMBDA1.get(d, FALLBACK_LAMBDA1)


def _check_assignment(instance, assignment):
    x = np.asarray(assignment)
    if x.shape != (instance.num_vertices,):
        raise InstanceError(f"assignment must have length {instance.num_vertices}, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.integer):
        if not np.all(x == np.round(x)):
            raise InstanceError("assignment labels must be integers")
        x = x.astype(np.int64)
    if len(x) and (x.min() < 0 or x.max() >= instance.num_partitions):
        raise InstanceError(f"labels must lie in 0..{instance.num_partitions - 1}")
    return x.astype(np.int64)


def partition_counts(instance, assignment):
    x = _check_assignment(instance, assignment)
    return np.bincount(x, minlength=instance.num_partitions)


def classical_cut_cost(instance, assignment):
    x = _check_assignment(instance, assignment)
    e = instance.graph.edges
    if not len(e):
        return 0.0
    cut = x[e[:, 0]] != x[e[:, 1]]
    return float(instance.graph.weights[cut].sum())


def penalty_from_counts(penalty, counts):
    slack = penalty.c_max - np.asarray(counts, dtype=np.float64)
    return float(np.sum(-penalty.lambda1 * slack + penalty.lambda2 * slack**2))


def penalty_cost(instance, assignment):
    return penalty_from_counts(instance.penalty, partition_counts(instance, assignment))


def total_cost(instance, assignment):
    return classical_cut_cost(instance, assignment) + penalty_cost(instance, assignment)


def is_feasible(instance, assignment):
    """Return ``(feasible, counts)`` for the capacity constraint n_k <= C_max."""
    counts = partition_counts(instance, assignment)
    return bool(np.all(counts <= instance.c_max)), counts


def _knn_edges(coords, neighbors):
    tree = cKDTree(coords)
    dist, idx = tree.query(coords, k=neighbors + 1)
    pairs = {}
    n = len(coords)
    for i in range(n):
        for dd, j in zip(dist[i], idx[i]):
            j = int(j)
            if j == i:
                continue
            key = (i, j) if i < j else (j, i)
            pairs[key] = float(dd)
    keys = sorted(pairs)
    edges = np.array(keys, dtype=np.int64).reshape(-1, 2)
    dists = np.array([pairs[k] for k in keys])
    return edges, dists


def generate_instance(num_vertices, neighbors=10, d=3, seed=0, lambda1=None, c_max=None):
    """Random geometric k-nearest-neighbour instance in [-1, 1]^2.

    Edge set is the union of each vertex's ``neighbors`` nearest vertices;
    weights are ``round(1 / distance)`` clamped to at least 1.
    """
    if num_vertices <= neighbors:
        raise InstanceError(f"num_vertices ({num_vertices}) must exceed neighbors ({neighbors})")
    if neighbors < 1:
        raise InstanceError("neighbors must be >= 1")
    rng = np.random.default_rng(seed)
    coords = rng.uniform(-1.0, 1.0, size=(num_vertices, 2))
    # re-sample points that (nearly) coincide with an earlier point
    while True:
        tree = cKDTree(coords)
        close = tree.query_pairs(MIN_SEPARATION, output_type="ndarray")
        if not len(close):
            break
        for j in np.unique(close.max(axis=1)):
            coords[j] = rng.uniform(-1.0, 1.0, size=2)
    edges, dists = _knn_edges(coords, neighbors)
    weights = np.maximum(np.rint(1.0 / dists), 1).astype(np.int64)
    graph = WeightedGraph(num_vertices, edges, weights, coords)
    if c_max is None:
        c_max = default_c_max(num_vertices, d)
    if lambda1 is None:
        lambda1 = default_lambda1(d)
    penalty = PenaltyConfig.from_ratio(lambda1, c_max)
    return MinDCutInstance(graph, d, penalty, seed=seed, meta={"neighbors": neighbors})


def instance_to_dict(instance):
    g = instance.graph
    return {
        "version": INSTANCE_SCHEMA_VERSION,
        "seed": instance.seed,
        "num_vertices": g.num_vertices,
        "d": instance.num_partitions,
        "c_max": instance.c_max,
        "lambda1": instance.penalty.lambda1,
        "lambda2": instance.penalty.lambda2,
        "coordinates": None if g.coordinates is None else g.coordinates.tolist(),
        "edges": [[int(i), int(j), int(w)] for (i, j), w in zip(g.edges, g.weights)],
        "meta": dict(instance.meta),
    }


def instance_from_dict(data):
    if not isinstance(data, dict):
        raise InstanceError("instance file must hold a JSON object")
    version = data.get("version")
    if version != INSTANCE_SCHEMA_VERSION:
        raise InstanceError(f"unsupported instance schema version {version!r}")
    try:
        edges = np.array(data["edges"], dtype=np.int64).reshape(-1, 3)
        coords = data.get("coordinates")
        graph = WeightedGraph(
            int(data["num_vertices"]),
            edges[:, :2],
            edges[:, 2],
            None if coords is None else np.array(coords, dtype=np.float64),
        )
        penalty = PenaltyConfig(float(data["lambda1"]), float(data["lambda2"]), int(data["c_max"]))
        return MinDCutInstance(graph, int(data["d"]), penalty, seed=data.get("seed"), meta=data.get("meta", {}))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed instance: {exc!r}") from exc


def save_instance(instance, path):
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1) + "\n")


def load_instance(path):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InstanceError(f"cannot read instance {path}: {exc}") from exc
    return instance_from_dict(data)
