import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quditqite.qudit import (
    InvalidDimensionError,
    ProductState,
    apply_generator_rotation,
    build_pool,
    dense_rotation,
    init_uniform_state,
    perturbed_initial_state,
    rotate_vector,
    round_state,
)


def taylor_expm(mat, terms=60):
    """Truncated power series, used only as an independent check."""
    out = np.eye(len(mat))
    term = np.eye(len(mat))
    for k in range(1, terms):
        term = term @ mat / k
        out = out + term
    return out


def test_init_single_qutrit():
    np.testing.assert_array_equal(init_uniform_state(1, 3).amplitudes, [[1.0, 0.0, 0.0]])


def test_init_two_qubits():
    s = init_uniform_state(2, 2)
    np.testing.assert_allclose(s.amplitudes, [[1, 0], [2**-0.5, 2**-0.5]], atol=1e-15)


def test_init_uniform_rows():
    s = init_uniform_state(3, 3)
    np.testing.assert_allclose(s.amplitudes[1:], np.full((2, 3), 1 / np.sqrt(3)), atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(s.amplitudes, axis=1), 1.0, atol=1e-12)


@pytest.mark.parametrize("n,d", [(0, 3), (2, 1), (3, 0)])
def test_init_rejects_bad_sizes(n, d):
    with pytest.raises(InvalidDimensionError):
        init_uniform_state(n, d)


def test_perturbed_state_keeps_first_qudit_pinned():
    s = perturbed_initial_state(5, 4, 1e-3, seed=7)
    np.testing.assert_array_equal(s.amplitudes[0], [1, 0, 0, 0])
    assert np.max(np.abs(s.amplitudes[1:] - 0.5)) < 1e-2
    np.testing.assert_array_equal(s.amplitudes, perturbed_initial_state(5, 4, 1e-3, seed=7).amplitudes)
    np.testing.assert_array_equal(perturbed_initial_state(5, 4, 0.0, 7).amplitudes, init_uniform_state(5, 4).amplitudes)


def test_qutrit_pool_matches_printed_matrices():
    pool = build_pool(3)
    expected = [
        [[0, -1, -1], [1, 0, 0], [1, 0, 0]],
        [[0, 1, 0], [-1, 0, -1], [0, 1, 0]],
        [[0, 0, 1], [0, 0, 1], [-1, -1, 0]],
    ]
    for op, mat in zip(pool, expected):
        np.testing.assert_array_equal(op.antisym, mat)


def test_qutrit_pool_ket_bra_form():
    # G_0 = i(|1><0| + |2><0|) + h.c.
    ket = np.eye(3)
    g0 = 1j * (np.outer(ket[1], ket[0]) + np.outer(ket[2], ket[0]))
    g0 = g0 + g0.conj().T
    np.testing.assert_array_equal(build_pool(3)[0].generator, g0)


def test_qubit_pool_is_pauli_y():
    y = np.array([[0, -1j], [1j, 0]])
    pool = build_pool(2)
    np.testing.assert_array_equal(pool[0].generator, y)
    np.testing.assert_array_equal(pool[1].generator, -y)


@pytest.mark.parametrize("d", [2, 3, 4, 7])
def test_pool_structure(d):
    pool = build_pool(d)
    assert len(pool) == d
    for op in pool:
        a = op.antisym
        np.testing.assert_array_equal(a + a.T, 0)
        g = op.generator
        np.testing.assert_array_equal(g, g.conj().T)
        assert np.all(g.real == 0)
        for j in range(d):
            if j != op.pivot_level:
                assert a[j, op.pivot_level] == 1 and a[op.pivot_level, j] == -1


def test_build_pool_rejects_d1():
    with pytest.raises(InvalidDimensionError):
        build_pool(1)


def test_zero_angle_is_identity(rng):
    s = perturbed_initial_state(2, 4, 0.2, 1)
    out = apply_generator_rotation(s, 1, build_pool(4)[2], 0.0)
    np.testing.assert_array_equal(out.amplitudes, s.amplitudes)


def test_qubit_rotation_pi_over_4():
    s = ProductState([[1.0, 0.0]])
    out = apply_generator_rotation(s, 0, build_pool(2)[0], np.pi / 4)
    series = taylor_expm(np.pi / 4 * build_pool(2)[0].antisym) @ np.array([1.0, 0.0])
    np.testing.assert_allclose(out.amplitudes[0], series, atol=1e-12)
    np.testing.assert_allclose(out.amplitudes[0], [np.cos(np.pi / 4), np.sin(np.pi / 4)], atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_closed_form_matches_dense_and_series(d, rng):
    for op in build_pool(d):
        for _ in range(5):
            v = rng.standard_normal(d)
            v /= np.linalg.norm(v)
            theta = rng.uniform(-3, 3)
            closed = rotate_vector(v, op.pivot_level, theta)
            np.testing.assert_allclose(closed, dense_rotation(op, theta) @ v, atol=1e-12)
            np.testing.assert_allclose(closed, taylor_expm(theta * op.antisym) @ v, atol=1e-12)


def test_rotation_preserves_norm_random_qutrit(rng):
    v = rng.standard_normal(3)
    s = ProductState([v / np.linalg.norm(v)])
    out = apply_generator_rotation(s, 0, build_pool(3)[1], rng.uniform(-5, 5))
    assert abs(np.linalg.norm(out.amplitudes[0]) - 1) < 1e-12


def test_rotation_touches_only_target(rng):
    s = perturbed_initial_state(4, 3, 0.1, 3)
    out = apply_generator_rotation(s, 2, build_pool(3)[0], 0.3)
    np.testing.assert_array_equal(np.delete(out.amplitudes, 2, 0), np.delete(s.amplitudes, 2, 0))


def test_rotation_errors():
    s = init_uniform_state(2, 3)
    op = build_pool(3)[0]
    with pytest.raises(IndexError):
        apply_generator_rotation(s, 2, op, 0.1)
    with pytest.raises(ValueError):
        apply_generator_rotation(s, 0, op, np.nan)
    with pytest.raises(InvalidDimensionError):
        apply_generator_rotation(s, 0, build_pool(4)[0], 0.1)


@given(d=st.integers(2, 8), level=st.integers(0, 7), theta=st.floats(-10, 10))
@settings(max_examples=100, deadline=None)
def test_forward_backward_rotation_is_identity(d, level, theta):
    op = build_pool(d)[level % d]
    prod = dense_rotation(op, theta) @ dense_rotation(op, -theta)
    np.testing.assert_allclose(prod, np.eye(d), atol=1e-12)


def test_norm_survives_many_rotations(rng):
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    levels = rng.integers(0, 5, 100_000)
    angles = rng.uniform(-0.05, 0.05, 100_000)
    for level, theta in zip(levels, angles):
        v = rotate_vector(v, level, theta)
    assert abs(np.linalg.norm(v) - 1) < 1e-12


def test_round_basis_and_ties():
    assert round_state(ProductState([[1.0, 0, 0]])).tolist() == [0]
    assert round_state(init_uniform_state(2, 3)).tolist() == [0, 0]


def test_round_picks_largest_probability():
    row = np.array([0.3, 0.9, np.sqrt(1 - 0.09 - 0.81)])
    s = ProductState([row, [0.0, 0.6, -0.8]])
    assert round_state(s).tolist() == [1, 2]


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_round_invariant_under_sign_flip(seed):
    r = np.random.default_rng(seed)
    a = r.standard_normal((4, 3))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    flips = r.choice([-1.0, 1.0], size=(4, 1))
    assert round_state(ProductState(a)).tolist() == round_state(ProductState(a * flips)).tolist()
