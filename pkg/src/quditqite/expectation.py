"""Closed-form expectation values on real product states.

The Hamiltonian is diagonal in the computational basis, so the only
quantities needed are the marginals ``p_ik = c_ik^2`` and their column sums.
Cut terms factorise, ``<P_ik P_jk> = p_ik p_jk``, and the quadratic penalty
uses ``<(sum_i P_ik)^2> = S_k + S_k^2 - sum_i p_ik^2``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .qudit import InvalidDimensionError


@dataclass
class HamiltonianSpec:
    """Instance plus cached edge arrays and adjacency lists."""

    instance: object

    def __post_init__(self):
        self.ei, self.ej, self.w = kernels.edge_arrays(self.instance)
        self.adjacency = self.instance.graph.adjacency()
        pen = self.instance.penalty
        self.lam1 = float(pen.lambda1)
        self.lam2 = float(pen.lambda2)
        self.cmax = float(pen.c_max)

    @property
    def num_qudits(self):
        return self.instance.num_vertices

    @property
    def dim(self):
        return self.instance.num_partitions

    def check(self, state):
        if state.num_qudits != self.num_qudits or state.dim != self.dim:
            raise InvalidDimensionError(
                f"state is ({state.num_qudits}, {state.dim}), instance needs ({self.num_qudits}, {self.dim})"
            )


@dataclass
class MarginalTable:
    probs: np.ndarray
    partition_sums: np.ndarray
    square_sums: np.ndarray


def marginals(state):
    p = state.amplitudes**2
    return MarginalTable(p, p.sum(axis=0), (p * p).sum(axis=0))


def expected_energy(spec, state):
    spec.check(state)
    return float(kernels.energy(state.amplitudes, spec.ei, spec.ej, spec.w, spec.lam1, spec.lam2, spec.cmax))


def local_field(spec, table, qudit):
    """Energy as a function of the level of ``qudit``, up to a level-independent constant."""
    p = table.probs
    f = 2.0 * spec.lam2 * (table.partition_sums - p[qudit])
    for j, wt in spec.adjacency[qudit]:
        f = f - wt * p[j]
    return f


def commutator_expectation(spec, state, qudit, op, table=None):
    """Real ``m`` with ``<Psi|[G, H]|Psi> = i m`` for pool operator ``op`` on ``qudit``."""
    spec.check(state)
    if not 0 <= qudit < state.num_qudits:
        raise IndexError(f"qudit {qudit} out of range")
    if op.dim != state.dim:
        raise InvalidDimensionError("operator and state dimensions differ")
    if table is None:
        table = marginals(state)
    c = state.amplitudes[qudit]
    f = local_field(spec, table, qudit)
    # <[G, diag(f)]> = -2i sum_k f_k c_k (A c)_k
    return float(-2.0 * np.dot(f * c, op.antisym @ c))


def generator_second_moment(state, qudit, op):
    """``<G^2> = |A c|^2 = (d-1) c_l^2 + (sum_{j != l} c_j)^2``."""
    c = state.amplitudes[qudit]
    l = op.pivot_level
    rest = c.sum() - c[l]
    return float((op.dim - 1) * c[l] ** 2 + rest**2)


def gradient_table(spec, state):
    """All ``(m, <G^2>)`` pairs as two (N, d) arrays, indexed by qudit and pool level."""
    spec.check(state)
    amps = state.amplitudes
    f = kernels.fields(amps, spec.ei, spec.ej, spec.w, spec.lam2)
    return kernels.gradient_table(amps, f)
