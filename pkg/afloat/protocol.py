"""Piecewise constant periodic driving protocols.

The driving period is normalized to one. A protocol with N steps is given by
potentials V_1, ..., V_N and fractions 0 = f_0 <= f_1 <= ... <= f_N = 1, the
step r being switched on during [f_{r-1}, f_r).
"""

import logging
import itertools
import numpy as np
from scipy import integrate

from afloat.operators import as_hermitian


logger = logging.getLogger(__name__)

ZERO_SUM_TOL = 1e-12
FRACTION_TOL = 1e-12


class StepProtocol(object):
    """A piecewise constant drive over one normalized period

    Parameters
    ----------
    potentials : list of array_like
        Hermitian potentials V_1, ..., V_N sharing one dimension.
    fractions : list of float
        Switching fractions f_0, ..., f_N. Must start at 0, end at 1 and be
        non-decreasing. Zero width steps are allowed and contribute nothing.

    Attributes
    ----------
    potentials : tuple of numpy.ndarray
        Read-only copies of the potentials.
    fractions : numpy.ndarray
        Read-only array of switching fractions.
    """
    def __init__(self, potentials, fractions):
        potentials = [np.array(as_hermitian(v)) for v in potentials]
        if not potentials:
            raise ValueError('A protocol needs at least one step.')
        dims = set(v.shape for v in potentials)
        if len(dims) > 1:
            raise ValueError('Potentials have differing dimensions %s'
                             % sorted(dims))
        fractions = np.array(fractions, dtype=float)
        if fractions.shape != (len(potentials) + 1,):
            raise ValueError('Expected %d fractions for %d steps, got %d'
                             % (len(potentials) + 1, len(potentials),
                                fractions.size))
        if not np.all(np.isfinite(fractions)):
            raise ValueError('Fractions must be finite.')
        if (abs(fractions[0]) > FRACTION_TOL or
                abs(fractions[-1] - 1) > FRACTION_TOL):
            raise ValueError('Fractions must start at 0 and end at 1.')
        fractions[0], fractions[-1] = 0.0, 1.0
        if np.any(np.diff(fractions) < 0):
            raise ValueError('Fractions must be non-decreasing.')
        for v in potentials:
            v.setflags(write=False)
        fractions.setflags(write=False)
        self.potentials = tuple(potentials)
        self.fractions = fractions

    @property
    def n_steps(self):
        return len(self.potentials)

    @property
    def dim(self):
        return self.potentials[0].shape[0]

    @property
    def widths(self):
        """Durations f_r - f_{r-1} of the steps"""
        return np.diff(self.fractions)

    def stacked_potentials(self):
        """Return the potentials as an array of shape (N, dim, dim)"""
        return np.stack(self.potentials)

    def __len__(self):
        return self.n_steps

    def __repr__(self):
        return 'StepProtocol(n_steps=%d, fractions=%s)' % \
            (self.n_steps, np.array2string(self.fractions, precision=6))


def _check_unit_interval(name, value):
    if not np.isfinite(value) or not 0 <= value <= 1:
        raise ValueError('%s must lie in [0, 1], got %r' % (name, value))


def four_step_protocol(alpha, beta, v1, v2, v3, v4):
    """Return the four-step protocol with parameters alpha and beta

    V_1 acts on [0, alpha/2), V_2 on [alpha/2, 1/2), V_3 on
    [1/2, (1 + beta)/2) and V_4 on [(1 + beta)/2, 1).

    Parameters
    ----------
    alpha, beta : float
        Partition parameters in [0, 1].
    v1, v2, v3, v4 : array_like
        The four Hermitian potentials.

    Returns
    -------
    StepProtocol
    """
    _check_unit_interval('alpha', alpha)
    _check_unit_interval('beta', beta)
    fractions = [0.0, alpha/2, 0.5, (1 + beta)/2, 1.0]
    return StepProtocol([v1, v2, v3, v4], fractions)


def partition_fractions(alphas):
    """Return the fractions of the generalized protocol

    The n-th fraction is f_n = 1 - prod_{i <= n} (1 - alpha_i), which is the
    inclusion-exclusion sum over the nested parameter ranges written in
    product form.

    Parameters
    ----------
    alphas : list of float
        Parameters alpha_1, ..., alpha_{N-1}, each in [0, 1].

    Returns
    -------
    numpy.ndarray
        Fractions f_0, ..., f_N.
    """
    for index, alpha in enumerate(alphas):
        _check_unit_interval('alpha_%d' % (index + 1), alpha)
    fractions = [0.0]
    remaining = 1.0
    for alpha in alphas:
        remaining *= (1 - alpha)
        fractions.append(1 - remaining)
    fractions.append(1.0)
    return np.array(fractions)


def inclusion_exclusion_fractions(alphas):
    """Return the fractions from the expanded alternating sum

    f_n = sum_k (-1)^(k+1) sum_{i_1 < ... < i_k <= n} alpha_i1 ... alpha_ik.
    This is the unsimplified form of partition_fractions.
    """
    fractions = [0.0]
    for n in range(1, len(alphas) + 1):
        total = 0.0
        for k in range(1, n + 1):
            sign = 1 if k % 2 else -1
            total += sign * sum(np.prod(combination) for combination
                                in itertools.combinations(alphas[:n], k))
        fractions.append(total)
    fractions.append(1.0)
    return np.array(fractions)


def alphas_from_fractions(fractions):
    """Return the parameters alpha_n generating the given fractions

    alpha_n = (f_n - f_{n-1}) / (1 - f_{n-1}), with alpha_n = 0 once all of
    the period has been used up.
    """
    fractions = np.asarray(fractions, dtype=float)
    alphas = []
    for previous, current in zip(fractions[:-2], fractions[1:-1]):
        if previous >= 1:
            alphas.append(0.0)
        else:
            alphas.append(min(1.0, (current - previous) / (1 - previous)))
    return alphas


def generalized_protocol(alphas, potentials):
    """Return the N-step protocol with parameters alpha_1, ..., alpha_{N-1}

    Parameters
    ----------
    alphas : list of float
        Partition parameters in [0, 1]. An alpha equal to 1 collapses every
        later step to zero width.
    potentials : list of array_like
        Exactly len(alphas) + 1 Hermitian potentials.

    Returns
    -------
    StepProtocol
    """
    if len(potentials) != len(alphas) + 1:
        raise ValueError('Expected %d potentials for %d parameters, got %d'
                         % (len(alphas) + 1, len(alphas), len(potentials)))
    return StepProtocol(potentials, partition_fractions(alphas))


def single_parameter_protocol(alpha, v_a, v_b):
    """Return the two-step protocol V_a on [0, alpha), V_b on [alpha, 1)"""
    return generalized_protocol([alpha], [v_a, v_b])


def concatenate_protocols(first, second):
    """Return the protocol running first then second, each for half a period

    The four-step protocol with parameters (alpha, beta) is the
    concatenation of two single-parameter protocols.
    """
    fractions = np.concatenate([first.fractions / 2,
                                0.5 + second.fractions[1:] / 2])
    return StepProtocol(first.potentials + second.potentials, fractions)


def shifted_protocol(protocol, start):
    """Return the protocol cyclically rotated to begin at step start

    The rotated protocol describes the same drive observed from the time
    f_{start} onwards, so its one-period propagator is similar to the
    original one.
    """
    n = protocol.n_steps
    if not 0 <= start < n:
        raise ValueError('Start step must lie in [0, %d), got %r'
                         % (n, start))
    order = list(range(start, n)) + list(range(start))
    widths = protocol.widths[order]
    fractions = np.minimum(np.concatenate([[0.0], np.cumsum(widths)]), 1.0)
    fractions[-1] = 1.0
    return StepProtocol([protocol.potentials[r] for r in order], fractions)


def potential_at(protocol, x):
    """Return the potential acting at the normalized time x

    Parameters
    ----------
    protocol : StepProtocol
    x : float
        Time in units of the period, in [0, 1).

    Returns
    -------
    numpy.ndarray
        The potential of the step whose interval [f_{r-1}, f_r) contains x.
        Zero width steps are never selected.
    """
    if not np.isfinite(x) or not 0 <= x < 1:
        raise ValueError('Normalized time must lie in [0, 1), got %r' % x)
    index = int(np.searchsorted(protocol.fractions, x, side='right'))
    return protocol.potentials[index - 1]


def step_coefficients(fractions, harmonics):
    """Return the weights c_r(j) of each step in the harmonics j

    V^(j) = sum_r c_r(j) V_r with c_r(0) = f_r - f_{r-1} and
    c_r(j) = (exp(-2 pi i j f_r) - exp(-2 pi i j f_{r-1})) / (-2 pi i j).

    Parameters
    ----------
    fractions : array_like
        Switching fractions f_0, ..., f_N.
    harmonics : array_like of int
        Harmonic indices j.

    Returns
    -------
    numpy.ndarray
        Complex array of shape (len(harmonics), N).
    """
    fractions = np.asarray(fractions, dtype=float)
    harmonics = np.atleast_1d(np.asarray(harmonics))
    phases = np.exp(-2j * np.pi * np.outer(harmonics, fractions))
    coefficients = np.empty((harmonics.size, fractions.size - 1),
                            dtype=complex)
    nonzero = harmonics != 0
    denominators = -2j * np.pi * harmonics[nonzero]
    coefficients[nonzero] = (np.diff(phases[nonzero], axis=1) /
                             denominators[:, None])
    coefficients[~nonzero] = np.diff(fractions)
    return coefficients


def fourier_components(protocol, harmonics):
    """Return V^(j) for several harmonics as an array (len(harmonics), d, d)
    """
    coefficients = step_coefficients(protocol.fractions, harmonics)
    return np.tensordot(coefficients, protocol.stacked_potentials(), axes=1)


def fourier_component(protocol, j):
    """Return the Fourier component V^(j) of the drive

    Each step is integrated exactly, so the result carries no discretization
    error. V^(-j) is the conjugate transpose of V^(j).

    Parameters
    ----------
    protocol : StepProtocol
    j : int
        Harmonic index.

    Returns
    -------
    numpy.ndarray
        The complex matrix V^(j).
    """
    return fourier_components(protocol, [int(j)])[0]


def fourier_quadrature(protocol, j, n_points=10**6):
    """Return V^(j) from composite trapezoid quadrature

    Each step is integrated on its own grid so that the discontinuities of
    the drive fall on grid points. Points are shared out in proportion to
    the step widths.
    """
    result = np.zeros((protocol.dim, protocol.dim), dtype=complex)
    for v, start, end in zip(protocol.potentials, protocol.fractions[:-1],
                             protocol.fractions[1:]):
        if end <= start:
            continue
        n = max(2, int(round(n_points * (end - start))))
        x = np.linspace(start, end, n)
        weight = integrate.trapezoid(np.exp(-2j * np.pi * j * x), x)
        result += weight * v
    return result


def fourier_series(protocol, x, j_max):
    """Return the partial Fourier sum of the drive at the normalized time x
    """
    harmonics = np.arange(-j_max, j_max + 1)
    components = fourier_components(protocol, harmonics)
    weights = np.exp(2j * np.pi * harmonics * x)
    return np.tensordot(weights, components, axes=1)


def zero_sum_check(potentials, tol=ZERO_SUM_TOL):
    """Return True if the potentials sum to zero

    Parameters
    ----------
    potentials : list of array_like
    tol : Optional[float]
        Largest tolerated entry of the sum. Default: 1e-12

    Returns
    -------
    bool
    """
    total = sum(np.asarray(v, dtype=complex) for v in potentials)
    return bool(np.max(np.abs(total)) <= tol)
