"""Energy costs of the fast drive and of the slow parameter sweep.

The fast cost is the expectation of the period averaged potential S . B_f at
fixed parameters. The slow cost integrates the change of the first order
Hamiltonian along a path,

    <psi| S . (B_1 alpha' + B_2 beta') |psi> dtau,

with B_1 = -(pi / 8 omega) dB/dalpha and B_2 = -(pi / 8 omega) dB/dbeta.
"""

import logging
import numpy as np

from afloat.operators import normalized_state, bloch_vector, aligned_spinor
from afloat.spin import DIABOLICAL_GUARD, NearDiabolicalError, \
    average_field, drive_constants, field_gradient, field_vector
from afloat.adiabatic.paths import cosine_quadrature, segment_nodes


logger = logging.getLogger(__name__)

STATE_MODES = ('fixed', 'ground')
SEPARATION_RATIO = 10.0
RATIO_FLOOR = 1e-12


def _spin_expectation(state):
    """Return <S> = <sigma> / 2 of a normalized spinor"""
    return bloch_vector(state) / 2


def delta_e_fast(state, alpha0, beta0, c):
    """Return <psi| S . B_f |psi> for the drive frozen at (alpha0, beta0)

    The constant rotor energy 3 / 8I is not included.

    Parameters
    ----------
    state : array_like
        Normalized spinor.
    alpha0, beta0 : float
        Fixed partition parameters.
    c : array_like
        Drive constants.

    Returns
    -------
    float

    Raises
    ------
    ValueError
        If the state is not normalized.
    """
    spin = _spin_expectation(normalized_state(state))
    return float(spin @ average_field(alpha0, beta0, c).vector)


def slow_fields(alpha, beta, c, omega):
    """Return the fields B_1 and B_2 driving the slow energy change

    Parameters
    ----------
    alpha, beta : float or array_like
    c : array_like
        Drive constants.
    omega : float
        Driving frequency.

    Returns
    -------
    tuple of numpy.ndarray
        -(pi / 8 omega) dB/dalpha and -(pi / 8 omega) dB/dbeta.
    """
    if not np.isfinite(omega) or omega <= 0:
        raise ValueError('omega must be positive, got %r' % omega)
    d_alpha, d_beta = field_gradient(alpha, beta, c)
    scale = -np.pi / (8 * omega)
    return scale * d_alpha, scale * d_beta


def _path_nodes(path, n):
    taus, weights = [], []
    for segment, count in zip(path.segments, segment_nodes(path, n)):
        nodes, node_weights = cosine_quadrature(segment.tau_start,
                                                segment.tau_end, count)
        taus.append(nodes)
        weights.append(node_weights)
    return np.concatenate(taus), np.concatenate(weights)


def slow_integrand(path, c, omega, taus, state_mode='fixed', state=None,
                   guard=DIABOLICAL_GUARD):
    """Return the slow energy integrand at the given path parameters"""
    if state_mode not in STATE_MODES:
        raise ValueError('Unknown state mode %r. Expected one of %s'
                         % (state_mode, ', '.join(STATE_MODES)))
    c = drive_constants(c)
    alpha, beta = path.evaluate(taus)
    d_alpha, d_beta = path.derivative(taus)
    field_1, field_2 = slow_fields(alpha, beta, c, omega)
    rate = field_1 * d_alpha[:, None] + field_2 * d_beta[:, None]
    if state_mode == 'fixed':
        if state is None:
            raise ValueError('A fixed state is required in fixed mode.')
        spin = _spin_expectation(normalized_state(state))
        return rate @ spin
    field = field_vector(alpha, beta, c)
    magnitudes = np.linalg.norm(field, axis=1)
    weak = np.flatnonzero(magnitudes < guard)
    if weak.size:
        k = weak[0]
        raise NearDiabolicalError(float(taus[k]), float(magnitudes[k]), guard)
    return np.sum(rate * field, axis=1) / (2 * magnitudes)


def delta_e_slow(path, c, omega, state_mode='fixed', state=None, n=10**4,
                 absolute=False, guard=DIABOLICAL_GUARD):
    """Return the energy cost of sweeping the parameters along a path

    Each segment is integrated with Gauss-Legendre nodes clustered at its
    ends, which keeps square root endpoints of the catalog paths exact.
    In 'ground' mode the state is the instantaneous ground state, aligned
    with B, and the signed result reduces to E_g(end) - E_g(start).

    Parameters
    ----------
    path : ParameterPath
    c : array_like
        Drive constants.
    omega : float
        Driving frequency.
    state_mode : Optional[str]
        'fixed' or 'ground'. Default: 'fixed'
    state : Optional[array_like]
        The fixed spinor. Required in 'fixed' mode.
    n : Optional[int]
        Total number of nodes, shared by segment length and clipped to
        [16, 512] per segment. Default: 10000
    absolute : Optional[bool]
        If True, integrate the absolute value of the integrand.
        Default: False

    Returns
    -------
    float

    Raises
    ------
    NearDiabolicalError
        In 'ground' mode, if |B| falls below guard at a node.
    """
    taus, weights = _path_nodes(path, n)
    integrand = slow_integrand(path, c, omega, taus, state_mode=state_mode,
                               state=state, guard=guard)
    if absolute:
        integrand = np.abs(integrand)
    value = float(np.dot(weights, integrand))
    logger.debug('Slow energy %.6g on path %s in %s mode'
                 % (value, path.name, state_mode))
    return value


def ground_spinor(alpha, beta, c, guard=DIABOLICAL_GUARD, tau=None):
    """Return the spinor aligned with B(alpha, beta)

    Raises
    ------
    NearDiabolicalError
        If |B| is below guard there. tau, when given, is the path parameter
        of (alpha, beta) and is carried by the error.
    """
    field = field_vector(alpha, beta, c)
    magnitude = float(np.linalg.norm(field))
    if magnitude < guard:
        raise NearDiabolicalError(tau, magnitude, guard, point=(alpha, beta))
    return aligned_spinor(field / magnitude)


def adiabatic_check(report, measure='signed'):
    """Return |dE_slow| / max(|dE_fast|, 1e-12) for a report

    Parameters
    ----------
    report : AdiabaticReport
    measure : Optional[str]
        'signed' uses delta_e_slow, 'absolute' uses delta_e_slow_absolute.
        Default: 'signed'

    Returns
    -------
    float
        Ratios below 10 mean the time scales are not separated.
    """
    if measure == 'signed':
        slow = report.delta_e_slow
    elif measure == 'absolute':
        slow = report.delta_e_slow_absolute
    else:
        raise ValueError('Unknown measure %r' % measure)
    return energy_ratio(slow, report.delta_e_fast)


def energy_ratio(slow, fast):
    return abs(slow) / max(abs(fast), RATIO_FLOOR)


def is_separated(ratio):
    return bool(ratio >= SEPARATION_RATIO)
