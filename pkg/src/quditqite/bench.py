"""Per-step timing: edge-count and d scaling, numba versus numpy kernels."""
import time

import numpy as np

from . import kernels
from .problem import generate_instance
from .qudit import perturbed_initial_state


def _prepared(instance, warm_steps=20, seed=0):
    n, d = instance.num_vertices, instance.num_partitions
    amps = perturbed_initial_state(n, d, 1e-3, seed).amplitudes.copy()
    ei, ej, w = kernels.edge_arrays(instance)
    pen = instance.penalty
    args = (ei, ej, w, float(pen.lambda1), float(pen.lambda2), float(pen.c_max), 5e-3)
    sel = np.zeros(n, dtype=np.int64)
    coef = np.zeros(n)
    for _ in range(warm_steps):
        kernels.NUMPY_KERNELS["step"](amps, *args, sel, coef)
    return amps, args, sel, coef


def time_step(instance, kernel="active", repeats=15, inner=None, min_time=0.05):
    """Best-of-``repeats`` seconds per solver step for the chosen kernel family.

    ``kernel`` is ``"loops"`` (numba when available), ``"numpy"`` or ``"active"``.
    """
    step = {"loops": kernels.LOOP_KERNELS, "numpy": kernels.NUMPY_KERNELS,
            "active": kernels.ACTIVE}[kernel]["step"]
    amps0, args, sel, coef = _prepared(instance)
    step(amps0.copy(), *args, sel, coef)  # compile / warm caches
    if inner is None:
        inner = 1
        while True:
            amps = amps0.copy()
            t0 = time.perf_counter()
            for _ in range(inner):
                step(amps, *args, sel, coef)
            if time.perf_counter() - t0 >= min_time or inner >= 1 << 16:
                break
            inner *= 2
    samples = []
    for _ in range(repeats):
        amps = amps0.copy()
        t0 = time.perf_counter()
        for _ in range(inner):
            step(amps, *args, sel, coef)
        samples.append((time.perf_counter() - t0) / inner)
    return float(np.min(samples))


def neighbors_for_edge_ratio(num_vertices, base_neighbors, ratio=2.0, seed=0):
    """Smallest neighbour count whose edge count reaches ``ratio`` x the base graph's."""
    base = generate_instance(num_vertices, base_neighbors, d=2, seed=seed).graph.num_edges
    k = base_neighbors + 1
    while k < num_vertices - 1:
        if generate_instance(num_vertices, k, d=2, seed=seed).graph.num_edges >= ratio * base:
            return k
        k += 1
    raise ValueError("cannot reach the requested edge ratio")


def edge_scaling(num_vertices=1000, base_neighbors=30, d=8, seed=0, kernel="active"):
    k2 = neighbors_for_edge_ratio(num_vertices, base_neighbors, 2.0, seed)
    rows = []
    for k in (base_neighbors, k2):
        inst = generate_instance(num_vertices, k, d=d, seed=seed)
        rows.append({"neighbors": k, "d": d, "num_vertices": num_vertices,
                     "num_edges": inst.graph.num_edges, "sec_per_step": time_step(inst, kernel)})
    return rows


def dim_scaling(num_vertices=1000, neighbors=30, dims=(8, 16), seed=0, kernel="active"):
    rows = []
    for d in dims:
        inst = generate_instance(num_vertices, neighbors, d=d, seed=seed)
        rows.append({"neighbors": neighbors, "d": d, "num_vertices": num_vertices,
                     "num_edges": inst.graph.num_edges, "sec_per_step": time_step(inst, kernel)})
    return rows


def backend_comparison(sizes=((200, 10, 3), (1000, 10, 5), (2000, 20, 7)), seed=0):
    rows = []
    for n, k, d in sizes:
        inst = generate_instance(n, k, d=d, seed=seed)
        loops = time_step(inst, "loops")
        vec = time_step(inst, "numpy")
        rows.append({"num_vertices": n, "neighbors": k, "d": d, "num_edges": inst.graph.num_edges,
                     "loops_sec": loops, "numpy_sec": vec, "speedup": vec / loops})
    return rows
