"""Dense complex linear algebra for small quantum systems.

Operators are represented as square complex numpy arrays. The functions in
this module validate their inputs and never modify them, so arrays may be
shared freely between threads.
"""

import logging
import numpy as np
from scipy import linalg


logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
BRANCH_TOL = 1e-9
NORM_TOL = 1e-10


class BranchCutError(ValueError):
    """Raised when a unitary has an eigenphase on the branch cut at -pi

    Parameters
    ----------
    phase : float
        The offending eigenphase.
    """
    def __init__(self, phase):
        self.phase = phase
        super(BranchCutError, self).__init__(
            'Eigenphase %.12g lies within %g of the branch cut at -pi. '
            'Increase the driving frequency.' % (phase, BRANCH_TOL))


def as_matrix(m):
    """Return m as a finite square complex array

    Parameters
    ----------
    m : array_like
        Candidate matrix.

    Returns
    -------
    numpy.ndarray
        Complex array of shape (dim, dim).

    Raises
    ------
    ValueError
        If m is not square or contains NaN or Inf entries.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ValueError('Expected a square matrix, got shape %s'
                         % (m.shape,))
    if not np.all(np.isfinite(m)):
        raise ValueError('Matrix contains non-finite entries.')
    return m


def hermitian_check(m, tol=HERMITIAN_TOL):
    """Return True if m equals its conjugate transpose within tol

    The comparison uses the largest absolute entry of m - m^dagger.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) <= tol)


def unitary_check(m, tol=UNITARY_TOL):
    """Return True if m^dagger m equals the identity within tol

    The comparison uses the Frobenius norm.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    identity = np.eye(m.shape[0])
    return bool(np.linalg.norm(m.conj().T @ m - identity) <= tol)


def as_hermitian(m, tol=HERMITIAN_TOL):
    """Return m as a validated Hermitian operator

    Parameters
    ----------
    m : array_like
        Candidate operator.
    tol : Optional[float]
        Largest tolerated entry of m - m^dagger. Default: 1e-12

    Returns
    -------
    numpy.ndarray
        Complex square array equal to m.

    Raises
    ------
    ValueError
        If m is not square, not finite or not Hermitian.
    """
    m = as_matrix(m)
    if not hermitian_check(m, tol):
        raise ValueError('Operator is not Hermitian within %g.' % tol)
    return m


def as_unitary(m, tol=UNITARY_TOL):
    """Return m as a validated unitary operator"""
    m = as_matrix(m)
    if not unitary_check(m, tol):
        raise ValueError('Operator is not unitary within %g.' % tol)
    return m


def spin_half_operators():
    """Return the spin-1/2 operators S_x, S_y and S_z

    The half-Pauli convention is used, so each operator has eigenvalues
    -1/2 and 1/2 and S_x^2 + S_y^2 + S_z^2 = 3/4.

    Returns
    -------
    tuple of numpy.ndarray
        The three 2x2 operators (S_x, S_y, S_z).
    """
    sx = 0.5 * np.array([[0, 1], [1, 0]], dtype=complex)
    sy = 0.5 * np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = 0.5 * np.array([[1, 0], [0, -1]], dtype=complex)
    return sx, sy, sz


def spin_vector_operator(vector):
    """Return n . S for a real three-vector n"""
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (3,):
        raise ValueError('Expected a three-vector, got shape %s'
                         % (vector.shape,))
    return sum(component * op for component, op
               in zip(vector, spin_half_operators()))


def decompose_spin(m):
    """Return the coefficients of a 2x2 operator on (S_x, S_y, S_z)

    Parameters
    ----------
    m : array_like
        A 2x2 Hermitian operator. Its trace part is ignored.

    Returns
    -------
    numpy.ndarray
        Real array (b_x, b_y, b_z) with m = b . S + (tr m / 2) identity.
    """
    m = as_hermitian(m)
    if m.shape != (2, 2):
        raise ValueError('Spin decomposition requires a 2x2 operator.')
    return np.array([2*np.trace(m @ op).real
                     for op in spin_half_operators()])


def commutator(a, b):
    """Return the commutator ab - ba

    Parameters
    ----------
    a, b : array_like
        Square operators of equal dimension.

    Returns
    -------
    numpy.ndarray
        The commutator. It is anti-Hermitian whenever a and b are Hermitian.

    Raises
    ------
    ValueError
        If the dimensions differ.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError('Dimension mismatch: %s and %s'
                         % (a.shape, b.shape))
    return a @ b - b @ a


def hermitian_eigensystem(h):
    """Return ascending eigenvalues and orthonormal eigenvectors of h

    Parameters
    ----------
    h : array_like
        Hermitian operator.

    Returns
    -------
    eigenvalues : numpy.ndarray
        Real eigenvalues in ascending order.
    eigenvectors : numpy.ndarray
        Columns are the corresponding orthonormal eigenvectors. Within a
        degenerate eigenspace any orthonormal basis may be returned.
    """
    h = as_hermitian(h)
    eigenvalues, eigenvectors = linalg.eigh(h)
    return eigenvalues, eigenvectors


def evolve(h, dt):
    """Return the propagator exp(-i h dt)

    The exponential is computed exactly from the Hermitian eigensystem.

    Parameters
    ----------
    h : array_like
        Hermitian operator.
    dt : float
        Evolution time.

    Returns
    -------
    numpy.ndarray
        Unitary propagator.

    Raises
    ------
    ValueError
        If dt is not finite.
    """
    if not np.isfinite(dt):
        raise ValueError('Evolution time must be finite, got %r' % dt)
    eigenvalues, eigenvectors = hermitian_eigensystem(h)
    phases = np.exp(-1j * eigenvalues * dt)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def principal_log(u, dt):
    """Return the Hermitian h with exp(-i h dt) = u on the principal branch

    Eigenphases of u are taken in (-pi, pi]. The result is (i/dt) log u.

    Parameters
    ----------
    u : array_like
        Unitary operator.
    dt : float
        Positive time step.

    Returns
    -------
    numpy.ndarray
        Hermitian generator of u.

    Raises
    ------
    ValueError
        If dt is not positive or u is not unitary.
    BranchCutError
        If an eigenphase of u lies within 1e-9 of -pi.
    """
    if not dt > 0 or not np.isfinite(dt):
        raise ValueError('Time step must be positive and finite, got %r'
                         % dt)
    u = as_unitary(u)
    # Unitaries are normal, so the complex Schur form is diagonal
    triangular, vectors = linalg.schur(u, output='complex')
    phases = np.angle(np.diag(triangular))
    distance = np.pi - np.abs(phases)
    if np.any(distance < BRANCH_TOL):
        raise BranchCutError(float(phases[np.argmin(distance)]))
    logger.debug('Largest eigenphase magnitude %.3g' % np.max(np.abs(phases)))
    h = (vectors * (-phases / dt)) @ vectors.conj().T
    return 0.5 * (h + h.conj().T)


def expectation(state, operator):
    """Return the real expectation value <state|operator|state>"""
    state = normalized_state(state)
    return float(np.vdot(state, as_matrix(operator) @ state).real)


def normalized_state(state, tol=NORM_TOL):
    """Return state as a complex vector after checking its norm

    Raises
    ------
    ValueError
        If the norm of state differs from one by more than tol.
    """
    state = np.asarray(state, dtype=complex)
    if state.ndim != 1:
        raise ValueError('A state must be a vector.')
    norm = np.linalg.norm(state)
    if abs(norm - 1) > tol:
        raise ValueError('State is not normalized (norm %.12g).' % norm)
    return state


def bloch_vector(state):
    """Return the Bloch vector 2<S> of a normalized spinor"""
    state = normalized_state(state)
    if state.shape != (2,):
        raise ValueError('Bloch vectors are defined for spinors only.')
    return np.array([2*np.vdot(state, op @ state).real
                     for op in spin_half_operators()])


def aligned_spinor(direction):
    """Return the spinor whose spin points along a unit vector

    Uses the gauge (cos(theta/2), exp(i phi) sin(theta/2)), which is the
    +1/2 eigenvector of n . S.
    """
    nx, ny, nz = direction
    theta = np.arccos(np.clip(nz, -1.0, 1.0))
    phi = np.arctan2(ny, nx)
    return np.array([np.cos(theta/2), np.exp(1j*phi) * np.sin(theta/2)])
