"""Slow, exact reference computations on the full d^N Hilbert space.

Nothing here shares code with the fast path beyond the instance and state
containers: Hamiltonians are assembled from Kronecker-lifted projectors,
generators from Kronecker-lifted pool matrices, and costs by enumeration.
"""
import itertools
from functools import reduce

import numpy as np

from .problem import MinDCutInstance

MAX_STATE_DIM = 2**20
MAX_OPERATOR_DIM = 4096
MAX_BRUTE_FORCE = 10**7


class OracleSizeError(ValueError):
    pass


def _guard(dim, limit, what):
    if dim > limit:
        raise OracleSizeError(f"{what} dimension {dim} exceeds oracle limit {limit}")


def lift_product_state(state):
    amps = state.amplitudes
    _guard(amps.shape[1] ** amps.shape[0], MAX_STATE_DIM, "state")
    return reduce(np.kron, [v.astype(np.complex128) for v in amps])


def lift_operator(mat, qudit, num_qudits, dim):
    """``I x ... x mat x ... x I`` with ``mat`` on ``qudit`` (qudit 0 is most significant)."""
    _guard(dim**num_qudits, MAX_OPERATOR_DIM, "operator")
    eye = np.eye(dim, dtype=np.complex128)
    factors = [np.asarray(mat, dtype=np.complex128) if q == qudit else eye for q in range(num_qudits)]
    return reduce(np.kron, factors)


def projector(dim, level):
    p = np.zeros((dim, dim), dtype=np.complex128)
    p[level, level] = 1.0
    return p


def dense_hamiltonian(instance: MinDCutInstance):
    """Cut Hamiltonian plus unbalanced-penalization terms as a dense matrix."""
    n, d = instance.num_vertices, instance.num_partitions
    big = d**n
    _guard(big, MAX_OPERATOR_DIM, "operator")
    eye = np.eye(big, dtype=np.complex128)
    proj = [[lift_operator(projector(d, k), i, n, d) for k in range(d)] for i in range(n)]
    h = np.zeros((big, big), dtype=np.complex128)
    for (i, j), wt in zip(instance.graph.edges.tolist(), instance.graph.weights.tolist()):
        same = sum(proj[i][k] @ proj[j][k] for k in range(d))
        h += wt * (eye - same)
    pen = instance.penalty
    for k in range(d):
        slack = pen.c_max * eye - sum(proj[i][k] for i in range(n))
        h += -pen.lambda1 * slack + pen.lambda2 * (slack @ slack)
    return h


def hamiltonian_diagonal(instance: MinDCutInstance):
    """Diagonal of the Hamiltonian from Kronecker products of projector diagonals."""
    n, d = instance.num_vertices, instance.num_partitions
    _guard(d**n, MAX_STATE_DIM, "state")
    ones = np.ones(d)

    def lifted(qudit, level):
        e = np.zeros(d)
        e[level] = 1.0
        return reduce(np.kron, [e if q == qudit else ones for q in range(n)])

    proj = [[lifted(i, k) for k in range(d)] for i in range(n)]
    diag = np.zeros(d**n)
    for (i, j), wt in zip(instance.graph.edges.tolist(), instance.graph.weights.tolist()):
        diag += wt * (1.0 - sum(proj[i][k] * proj[j][k] for k in range(d)))
    pen = instance.penalty
    for k in range(d):
        slack = pen.c_max - sum(proj[i][k] for i in range(n))
        diag += -pen.lambda1 * slack + pen.lambda2 * slack**2
    return diag


def expectation(psi, op):
    return np.vdot(psi, op @ psi)


def exact_ite(h, psi0, tau):
    """Normalised ``exp(-tau H) psi0`` through the eigendecomposition of H."""
    evals, evecs = np.linalg.eigh(h)
    coeffs = evecs.conj().T @ psi0
    # shift by the ground energy so large tau does not underflow
    coeffs = coeffs * np.exp(-tau * (evals - evals[0]))
    psi = evecs @ coeffs
    return psi / np.linalg.norm(psi)


def linear_system(psi, generators, h):
    """Return ``(S, b)`` with ``S_ij = Re<G_i G_j>`` and ``b_j = -(i/2)<[G_j, H]>``."""
    n = len(generators)
    s = np.empty((n, n), dtype=np.complex128)
    b = np.empty(n, dtype=np.complex128)
    hpsi = h @ psi
    gpsi = [g @ psi for g in generators]
    for i in range(n):
        for j in range(n):
            s[i, j] = np.vdot(gpsi[i], gpsi[j])  # <G_i G_j> since G_i is Hermitian
        comm = np.vdot(psi, generators[i] @ hpsi) - np.vdot(hpsi, gpsi[i])
        b[i] = -0.5j * comm
    return s, b


def solve_linear_system(psi, generators, h):
    """Least-squares coefficients minimising the first-order residual."""
    s, b = linear_system(psi, generators, h)
    sol, *_ = np.linalg.lstsq(s.real, b.real, rcond=None)
    return sol


def residual_delta(psi, g, h, delta_tau):
    """``|| (1 - i dtau G) psi - (1 - dtau H) psi ||``."""
    lhs = psi - 1j * delta_tau * (g @ psi)
    rhs = psi - delta_tau * (h @ psi)
    return float(np.linalg.norm(lhs - rhs))


def _all_costs(instance, labels):
    """Cut and penalised costs for a block of assignments (rows)."""
    e = instance.graph.edges
    w = instance.graph.weights.astype(np.float64)
    if len(e):
        cut = ((labels[:, e[:, 0]] != labels[:, e[:, 1]]) * w).sum(axis=1)
    else:
        cut = np.zeros(len(labels))
    pen = instance.penalty
    counts = np.stack([(labels == k).sum(axis=1) for k in range(instance.num_partitions)], axis=1)
    slack = pen.c_max - counts
    penalty = (-pen.lambda1 * slack + pen.lambda2 * slack**2).sum(axis=1)
    return cut, cut + penalty, counts


def brute_force_optimum(instance, mode="penalized", chunk=1 << 16):
    """Exhaustive minimum over all d^N assignments.

    ``mode="penalized"`` minimises the penalised total cost;
    ``mode="feasible"`` minimises the cut cost over assignments with every
    ``n_k <= C_max``. Returns ``(assignment, cost)``; the first minimiser in
    lexicographic order wins. ``cost`` is the total cost in penalised mode
    and the cut cost in feasible mode.
    """
    if mode not in ("penalized", "feasible"):
        raise ValueError("mode must be 'penalized' or 'feasible'")
    n, d = instance.num_vertices, instance.num_partitions
    total = d**n
    if total > MAX_BRUTE_FORCE:
        raise OracleSizeError(f"{total} assignments exceed brute-force limit {MAX_BRUTE_FORCE}")
    powers = d ** np.arange(n - 1, -1, -1)
    best_cost, best_x = np.inf, None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        labels = (idx[:, None] // powers[None, :]) % d
        cut, pen_total, counts = _all_costs(instance, labels)
        if mode == "penalized":
            vals = pen_total
        else:
            vals = np.where(np.all(counts <= instance.c_max, axis=1), cut, np.inf)
        j = int(np.argmin(vals))
        if vals[j] < best_cost:
            best_cost, best_x = float(vals[j]), labels[j].copy()
    if best_x is None:
        raise ValueError("no feasible assignment exists")
    return best_x.astype(np.int64), best_cost


def enumerate_assignments(n, d):
    return itertools.product(range(d), repeat=n)
