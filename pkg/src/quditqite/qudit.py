"""Product states of d-level qudits, the single-qudit operator pool and
exact rotations generated by pool operators.

Amplitudes are stored as real numbers only. The initial state is real and
every pool generator ``G_l = i A_l`` has purely imaginary entries, so
``exp(-i a G_l) = exp(a A_l)`` is a real orthogonal matrix.
"""
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

NORM_TOL = 1e-12


class InvalidDimensionError(ValueError):
    pass


@dataclass
class ProductState:
    """N real unit vectors of length d, one per qudit."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.float64)
        if amps.ndim != 2:
            raise InvalidDimensionError("amplitudes must be an (N, d) array")
        n, d = amps.shape
        if n < 1 or d < 2:
            raise InvalidDimensionError(f"need N >= 1 and d >= 2, got N={n}, d={d}")
        norms = np.linalg.norm(amps, axis=1)
        if not np.all(np.abs(norms - 1.0) <= NORM_TOL):
            raise ValueError("every qudit vector must have unit norm")
        self.amplitudes = amps

    @property
    def num_qudits(self):
        return self.amplitudes.shape[0]

    @property
    def dim(self):
        return self.amplitudes.shape[1]

    def copy(self):
        return ProductState(self.amplitudes.copy())

    def probabilities(self):
        return self.amplitudes**2


@dataclass(frozen=True)
class PoolOperator:
    """Pool generator ``G_l = i * antisym`` coupling level ``l`` to all others."""

    dim: int
    pivot_level: int
    antisym: np.ndarray

    @property
    def generator(self):
        return 1j * self.antisym


def init_uniform_state(num_qudits, dim):
    """Qudit 0 in ``|0>``, every other qudit in the uniform superposition."""
    if num_qudits < 1 or dim < 2:
        raise InvalidDimensionError(f"need N >= 1 and d >= 2, got N={num_qudits}, d={dim}")
    amps = np.full((num_qudits, dim), 1.0 / np.sqrt(dim))
    amps[0] = 0.0
    amps[0, 0] = 1.0
    return ProductState(amps)


def perturbed_initial_state(num_qudits, dim, noise, seed):
    """``init_uniform_state`` with seeded Gaussian noise on qudits 1..N-1.

    Levels 1..d-1 of the uniform qudits are exactly exchangeable, and the
    exact rotations keep them so; a small perturbation lets the dynamics
    leave that symmetric fixed point. Qudit 0 stays pinned to ``|0>``.
    """
    state = init_uniform_state(num_qudits, dim)
    if noise == 0.0 or num_qudits == 1:
        return state
    rng = np.random.default_rng(seed)
    amps = state.amplitudes
    amps[1:] += noise * rng.standard_normal(amps[1:].shape)
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)
    return ProductState(amps)


def pool_matrix(dim, level):
    a = np.zeros((dim, dim))
    a[:, level] = 1.0
    a[level, :] = -1.0
    a[level, level] = 0.0
    return a


def build_pool(dim):
    if dim < 2:
        raise InvalidDimensionError(f"d must be >= 2, got {dim}")
    pool = []
    for level in range(dim):
        a = pool_matrix(dim, level)
        a.setflags(write=False)
        pool.append(PoolOperator(dim, level, a))
    return pool


def rotate_vector(vec, level, angle):
    """Return ``exp(angle * A_level) @ vec`` for the rank-2 pool generator.

    ``A_l = w e_l^T - e_l w^T`` with ``w`` the indicator of all levels except
    ``l``; the exponential is a plane rotation in span{e_l, w} at rate
    ``sqrt(d - 1)``.
    """
    vec = np.asarray(vec, dtype=np.float64)
    d = vec.shape[0]
    omega = np.sqrt(d - 1.0)
    alpha = vec[level]
    beta = (vec.sum() - alpha) / omega
    cs, sn = np.cos(omega * angle), np.sin(omega * angle)
    new_alpha = alpha * cs - beta * sn
    new_beta = alpha * sn + beta * cs
    out = vec + (new_beta - beta) / omega
    out[level] = new_alpha
    return out


def dense_rotation(op, angle):
    """Dense ``exp(angle * A_l)`` via scaled Pade; reference for the closed form."""
    return expm(angle * op.antisym)


def apply_generator_rotation(state, qudit, op, angle):
    """Apply ``exp(-i angle G) = exp(angle A)`` to one qudit, returning a new state."""
    if not 0 <= qudit < state.num_qudits:
        raise IndexError(f"qudit {qudit} out of range for N={state.num_qudits}")
    if op.dim != state.dim:
        raise InvalidDimensionError(f"operator dim {op.dim} != state dim {state.dim}")
    if not np.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle}")
    amps = state.amplitudes.copy()
    amps[qudit] = rotate_vector(amps[qudit], op.pivot_level, angle)
    return ProductState(amps)


def round_state(state):
    """Relaxed rounding: most probable level per qudit, lowest index on ties."""
    amps = state.amplitudes if isinstance(state, ProductState) else np.asarray(state)
    return np.argmax(amps * amps, axis=1).astype(np.int64)
