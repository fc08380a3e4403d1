import numpy as np
import pytest

from afloat.operators import BranchCutError, as_matrix, as_hermitian, \
    as_unitary, hermitian_check, unitary_check, spin_half_operators, \
    spin_vector_operator, decompose_spin, commutator, hermitian_eigensystem, \
    evolve, principal_log, expectation, normalized_state, bloch_vector, \
    aligned_spinor


sx, sy, sz = spin_half_operators()


def test_spin_algebra():
    assert np.allclose(commutator(sx, sy), 1j*sz)
    assert np.allclose(commutator(sy, sz), 1j*sx)
    assert np.allclose(commutator(sz, sx), 1j*sy)
    assert np.allclose(sx @ sx + sy @ sy + sz @ sz, 0.75*np.eye(2))
    for op in (sx, sy, sz):
        eigenvalues, _ = hermitian_eigensystem(op)
        assert np.allclose(eigenvalues, [-0.5, 0.5])


def test_decompose_spin():
    vector = np.array([0.3, -1.2, 2.5])
    m = spin_vector_operator(vector) + 0.7*np.eye(2)
    assert np.allclose(decompose_spin(m), vector)


def test_decompose_spin_wrong_dimension():
    with pytest.raises(ValueError):
        decompose_spin(np.eye(3))


def test_matrix_validation():
    with pytest.raises(ValueError):
        as_matrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan], [0.0, 1.0]])
    with pytest.raises(ValueError):
        as_hermitian([[0, 1], [0, 0]])
    with pytest.raises(ValueError):
        as_unitary(2*np.eye(2))
    assert hermitian_check(sy)
    assert not hermitian_check(sx @ sy)
    assert unitary_check(2*sx)
    assert not hermitian_check(np.ones(3))


def test_commutator_dimension_mismatch():
    with pytest.raises(ValueError):
        commutator(np.eye(2), np.eye(3))


def test_evolve_and_log():
    rng = np.random.RandomState(1729)
    a = rng.normal(size=(3, 3)) + 1j*rng.normal(size=(3, 3))
    _, vectors = np.linalg.eigh(a + a.conj().T)
    h = vectors @ np.diag([-2.0, 0.4, 1.5]) @ vectors.conj().T
    u = evolve(h, 1.0)
    assert unitary_check(u)
    assert np.allclose(principal_log(u, 1.0), h)
    assert np.allclose(principal_log(evolve(h, 0.5), 0.5), h)


def test_evolve_rotation():
    # exp(-i pi sigma_x / 2) = -i sigma_x
    u = evolve(sx, np.pi)
    assert np.allclose(u, -2j*sx)


def test_principal_log_branch_cut():
    with pytest.raises(BranchCutError) as excinfo:
        principal_log(np.diag([-1.0, 1.0]), 1.0)
    assert abs(abs(excinfo.value.phase) - np.pi) < 1e-12


def test_principal_log_bad_step():
    with pytest.raises(ValueError):
        principal_log(np.eye(2), 0.0)


def test_states():
    up = np.array([1.0, 0.0])
    assert expectation(up, sz) == pytest.approx(0.5)
    assert np.allclose(bloch_vector(up), [0, 0, 1])
    with pytest.raises(ValueError):
        normalized_state([1.0, 1.0])
    with pytest.raises(ValueError):
        bloch_vector(np.ones(3) / np.sqrt(3))


def test_aligned_spinor():
    rng = np.random.RandomState(0)
    directions = rng.normal(size=(20, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    for direction in np.vstack([directions, [[0, 0, 1], [0, 0, -1]]]):
        spinor = aligned_spinor(direction)
        assert np.allclose(bloch_vector(spinor), direction)
        operator = spin_vector_operator(direction)
        assert np.allclose(operator @ spinor, 0.5*spinor)


def test_evolve_full_turn():
    assert np.allclose(evolve(sz, 2*np.pi), -np.eye(2), atol=1e-12)


def test_evolve_inverse():
    rng = np.random.RandomState(11)
    for dim in (2, 3, 5):
        a = rng.normal(size=(dim, dim)) + 1j*rng.normal(size=(dim, dim))
        h = (a + a.conj().T) / 2
        for dt in (0.01, 1.0, 37.5):
            product = evolve(h, dt) @ evolve(h, -dt)
            assert np.allclose(product, np.eye(dim), atol=1e-10)


def test_principal_log_of_quarter_turn():
    u = np.diag([np.exp(-0.5j*np.pi), np.exp(0.5j*np.pi)])
    h = principal_log(u, 1.0)
    assert np.allclose(h, np.diag([np.pi/2, -np.pi/2]), atol=1e-12)
    assert np.allclose(h, np.pi*sz, atol=1e-12)


def test_eigenvalue_sum_is_trace():
    rng = np.random.RandomState(12)
    for dim in (2, 4, 6):
        a = rng.normal(size=(dim, dim)) + 1j*rng.normal(size=(dim, dim))
        h = (a + a.conj().T) / 2
        eigenvalues, _ = hermitian_eigensystem(h)
        assert abs(np.sum(eigenvalues) - np.trace(h).real) < 1e-12
