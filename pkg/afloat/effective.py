"""Builds first order effective Hamiltonians and kick operators.

Three independent constructions are provided. The polynomial construction
evaluates closed forms in the switching fractions, the harmonic construction
sums the high frequency expansion over Fourier components of the drive and
the oracle takes the logarithm of the exact one-period propagator.
"""

import gzip
import json
import logging
import numpy as np
from hashlib import md5
from scipy.special import sici

from afloat import __version__
from afloat.operators import as_hermitian, commutator, evolve, \
    principal_log, hermitian_eigensystem
from afloat.protocol import fourier_component, fourier_components


logger = logging.getLogger(__name__)

MODES = ('paper-polynomial', 'harmonic-sum', 'exact-oracle', 'closed-form')
AVERAGINGS = ('paper', 'corrected')
# Pairs (r, s) with r < s in the order used by p_polynomials
FOUR_STEP_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


class HarmonicTruncation(object):
    """Truncation of a Fourier harmonic series

    Parameters
    ----------
    j_max : int
        Largest harmonic retained.
    tail_correction : Optional[bool]
        If True, the dropped tail is added back in closed form where this is
        available (kick operator). Default: False
    tail_bound : Optional[float]
        Estimate of the neglected tail. Filled in by the harmonic sums.
        Default: 0.0
    """
    def __init__(self, j_max, tail_correction=False, tail_bound=0.0):
        if int(j_max) != j_max or j_max < 1:
            raise ValueError('j_max must be a positive integer, got %r'
                             % j_max)
        if not tail_bound >= 0:
            raise ValueError('tail_bound must be non-negative, got %r'
                             % tail_bound)
        self.j_max = int(j_max)
        self.tail_correction = bool(tail_correction)
        self.tail_bound = float(tail_bound)

    def with_tail_bound(self, tail_bound):
        """Return a copy carrying the given tail estimate"""
        return HarmonicTruncation(self.j_max, self.tail_correction,
                                  tail_bound)

    def to_dict(self):
        return {'j_max': self.j_max,
                'tail_correction': self.tail_correction,
                'tail_bound': self.tail_bound}

    def __repr__(self):
        return 'HarmonicTruncation(j_max=%d, tail_correction=%s, ' \
            'tail_bound=%.3g)' % (self.j_max, self.tail_correction,
                                  self.tail_bound)


class EffectiveModel(object):
    """An effective Hamiltonian together with its kick operator

    Parameters
    ----------
    h_eff : array_like
        Hermitian effective Hamiltonian.
    kick_zero : array_like
        Hermitian kick operator K(0). The oracle does not determine it and
        stores zero.
    mode : str
        Provenance of the model. One of 'paper-polynomial', 'harmonic-sum',
        'exact-oracle' and 'closed-form'.
    omega : float
        Angular driving frequency.
    averaging : Optional[str]
        'paper' if the period average of the drive is left out of h_eff,
        'corrected' if it is included. None for the oracle. Default: None
    truncations : Optional[dict]
        Harmonic truncations used, keyed by 'h_eff' and 'kick'.
        Default: None
    metadata : Optional[dict]
        Additional JSON serializable provenance. Default: None

    Attributes
    ----------
    dim : int
        Hilbert space dimension.
    """
    def __init__(self, h_eff, kick_zero, mode, omega, averaging=None,
                 truncations=None, metadata=None):
        if mode not in MODES:
            raise ValueError('Unknown mode %s. Expected one of %s'
                             % (mode, ', '.join(MODES)))
        if averaging is not None and averaging not in AVERAGINGS:
            raise ValueError('Unknown averaging %s' % averaging)
        _check_omega(omega)
        self.h_eff = as_hermitian(h_eff)
        self.kick_zero = as_hermitian(kick_zero)
        if self.h_eff.shape != self.kick_zero.shape:
            raise ValueError('h_eff and kick_zero have differing shapes.')
        self.mode = mode
        self.omega = float(omega)
        self.averaging = averaging
        self.truncations = truncations if truncations is not None else {}
        self.metadata = metadata if metadata is not None else {}

    @property
    def dim(self):
        return self.h_eff.shape[0]

    def eigenvalues(self):
        """Return the ascending eigenvalues of h_eff"""
        return hermitian_eigensystem(self.h_eff)[0]

    def to_dict(self):
        """Return a JSON object representing the model

        Complex matrices are stored as nested [real, imaginary] pairs.
        """
        return {'h_eff': _matrix_to_list(self.h_eff),
                'kick_zero': _matrix_to_list(self.kick_zero),
                'mode': self.mode,
                'omega': self.omega,
                'averaging': self.averaging,
                'truncations': {key: value.to_dict() for key, value
                                in self.truncations.items()},
                'metadata': self.metadata,
                'version': __version__}

    @classmethod
    def from_dict(cls, model_info):
        """Return a model from a JSON object produced by to_dict"""
        truncations = {key: HarmonicTruncation(**value) for key, value
                       in model_info.get('truncations', {}).items()}
        return cls(_matrix_from_list(model_info['h_eff']),
                   _matrix_from_list(model_info['kick_zero']),
                   model_info['mode'], model_info['omega'],
                   averaging=model_info.get('averaging'),
                   truncations=truncations,
                   metadata=model_info.get('metadata'))

    def dump(self, filepath):
        """Serialize model to gzipped json

        Parameters
        ----------
        filepath : str
           Path to output file
        """
        json_bytes = json.dumps(self.to_dict()).encode('utf-8')
        with gzip.GzipFile(filepath, 'w') as fout:
            fout.write(json_bytes)

    def version(self):
        """Returns a version string for the model

        Returns
        -------
        str
            String of the form <afloat_version>::<mode>::<hash> where <hash>
            is the md5 hash of the model jsonified with sorted keys.
        """
        model_json = json.dumps(self.to_dict(), sort_keys=True)
        model_hash = md5(model_json.encode('utf-8')).hexdigest()
        return '%s::%s::%s' % (__version__, self.mode, model_hash)

    def info(self):
        """Return a readable summary of the model

        Returns
        -------
        str
            Mode, frequency, averaging, spectrum and truncation information.
        """
        output = 'Effective model (%s)\n\n' % self.mode
        output += 'omega:\t%g\n' % self.omega
        output += 'averaging:\t%s\n' % (self.averaging or 'n/a')
        output += 'dimension:\t%d\n' % self.dim
        output += 'eigenvalues:\t%s\n' % \
            ', '.join('%.12g' % value for value in self.eigenvalues())
        output += 'kick norm:\t%.6g\n' % np.linalg.norm(self.kick_zero)
        for key, truncation in sorted(self.truncations.items()):
            output += '%s truncation:\tj_max=%d, tail_bound=%.3g\n' % \
                (key, truncation.j_max, truncation.tail_bound)
        return output

    def __repr__(self):
        return 'EffectiveModel(mode=%s, omega=%g, averaging=%s)' % \
            (self.mode, self.omega, self.averaging)


def load_model(filepath):
    """Load a previously serialized effective model

    Parameters
    ----------
    filepath : str
       path to model file

    Returns
    -------
    EffectiveModel
    """
    with gzip.GzipFile(filepath, 'r') as fin:
        json_bytes = fin.read()
    return EffectiveModel.from_dict(json.loads(json_bytes.decode('utf-8')))


def _matrix_to_list(m):
    return [[[float(entry.real), float(entry.imag)] for entry in row]
            for row in m]


def _matrix_from_list(rows):
    return np.array([[complex(re, im) for re, im in row] for row in rows])


def _check_omega(omega):
    if not np.isfinite(omega) or omega <= 0:
        raise ValueError('omega must be positive and finite, got %r' % omega)


def _check_parameters(alpha, beta):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    for name, value in (('alpha', alpha), ('beta', beta)):
        if np.any(~np.isfinite(value)) or np.any((value < 0) | (value > 1)):
            raise ValueError('%s must lie in [0, 1]' % name)
    return alpha, beta


def p_polynomials(alpha, beta):
    """Return the commutator weights of the four-step protocol

    Parameters
    ----------
    alpha, beta : float or array_like
        Partition parameters in [0, 1].

    Returns
    -------
    tuple
        (P12, P13, P14, P23, P24, P34), each with the shape of alpha and
        beta broadcast together.
    """
    a, b = _check_parameters(alpha, beta)
    return (a*(1 - a),
            a*b*(a - b),
            a*(1 - b)*(a - b - 1),
            b*(1 - a)*(a - b + 1),
            (a - 1)*(b - 1)*(a - b),
            b*(1 - b))


def p_polynomial_gradients(alpha, beta):
    """Return the partial derivatives of p_polynomials

    Returns
    -------
    d_alpha : tuple
        Derivatives of (P12, ..., P34) with respect to alpha.
    d_beta : tuple
        Derivatives with respect to beta.
    """
    a, b = _check_parameters(alpha, beta)
    zero = np.zeros(np.broadcast(a, b).shape)
    d_alpha = (1 - 2*a + zero,
               2*a*b - b**2,
               (1 - b)*(2*a - b - 1),
               b*(b - 2*a),
               (b - 1)*(2*a - b - 1),
               zero)
    d_beta = (zero,
              a**2 - 2*a*b,
              2*a*b - a**2,
              (1 - a)*(a - 2*b + 1),
              (a - 1)*(a - 2*b + 1),
              1 - 2*b + zero)
    return d_alpha, d_beta


def q_polynomials(alpha, beta):
    """Return the kick weights (Q1, Q2, Q3, Q4) of the four-step protocol"""
    a, b = _check_parameters(alpha, beta)
    return (a*(2 - a),
            (a - 1)**2,
            -b**2,
            b**2 - 1)


def _bernoulli_two(x):
    x = np.mod(x, 1.0)
    return x**2 - x + 1/6


def _bernoulli_three(x):
    x = np.mod(x, 1.0)
    return x**3 - 1.5*x**2 + 0.5*x


def commutator_coefficients(fractions):
    """Return the commutator weights of an arbitrary step protocol

    The first order term of the effective Hamiltonian of any step protocol
    is (i pi / 8 omega) sum_{r<s} P_rs [V_r, V_s]. The weights are cubic in
    the fractions and follow from periodic Bernoulli polynomials.

    Parameters
    ----------
    fractions : array_like
        Switching fractions f_0, ..., f_N.

    Returns
    -------
    numpy.ndarray
        Antisymmetric (N, N) array whose entry (r, s), r < s, is P_rs. For
        the four-step protocol the upper triangle equals p_polynomials.
    """
    f = np.asarray(fractions, dtype=float)
    end = f[1:]
    start = f[:-1]
    weights = (_bernoulli_three(end[None, :] - end[:, None]) -
               _bernoulli_three(start[None, :] - end[:, None]) -
               _bernoulli_three(end[None, :] - start[:, None]) +
               _bernoulli_three(start[None, :] - start[:, None]))
    weights = 8/3 * weights
    # Only the upper triangle is meaningful
    upper = np.triu(weights, k=1)
    return upper - upper.T


def kick_coefficients(fractions):
    """Return the kick weights Q_r of an arbitrary step protocol

    K(0) = -(pi / 4 omega) sum_r Q_r V_r with
    Q_r = -4 (B2(f_r) - B2(f_{r-1})).
    """
    f = np.asarray(fractions, dtype=float)
    return -4 * np.diff(_bernoulli_two(f))


def first_order_term(potentials, weights, omega):
    """Return (i pi / 8 omega) sum_{r<s} P_rs [V_r, V_s]"""
    _check_omega(omega)
    dim = potentials[0].shape[0]
    total = np.zeros((dim, dim), dtype=complex)
    n = len(potentials)
    for r in range(n):
        for s in range(r + 1, n):
            if weights[r, s] != 0:
                total += weights[r, s] * commutator(potentials[r],
                                                    potentials[s])
    term = 1j * np.pi / (8 * omega) * total
    return 0.5 * (term + term.conj().T)


def kick_term(potentials, weights, omega):
    """Return -(pi / 4 omega) sum_r Q_r V_r"""
    _check_omega(omega)
    return -np.pi / (4 * omega) * np.tensordot(weights,
                                               np.stack(potentials), axes=1)


def four_step_parameters(protocol):
    """Return (alpha, beta) of a four-step protocol

    Raises
    ------
    ValueError
        If the protocol does not have four steps switching at one half.
    """
    f = protocol.fractions
    if protocol.n_steps != 4 or abs(f[2] - 0.5) > 1e-12:
        raise ValueError('Expected a four-step protocol switching at 1/2, '
                         'got fractions %s' % f)
    return float(np.clip(2*f[1], 0, 1)), float(np.clip(2*f[3] - 1, 0, 1))


def _averaged(h0, protocol, averaging):
    if averaging not in AVERAGINGS:
        raise ValueError('Unknown averaging %s' % averaging)
    h0 = as_hermitian(h0)
    if h0.shape[0] != protocol.dim:
        raise ValueError('H0 has dimension %d but the protocol has %d'
                         % (h0.shape[0], protocol.dim))
    if averaging == 'corrected':
        return h0 + fourier_component(protocol, 0)
    return h0


def h_eff_paper(h0, protocol, omega, averaging='paper'):
    """Return the effective model of a four-step protocol from polynomials

    Parameters
    ----------
    h0 : array_like
        Static Hamiltonian.
    protocol : afloat.protocol.StepProtocol
        A four-step protocol as built by four_step_protocol.
    omega : float
        Angular driving frequency.
    averaging : Optional[str]
        'paper' gives H0 plus the commutator term only. 'corrected' also adds
        the period average V^(0) of the drive. Default: 'paper'

    Returns
    -------
    EffectiveModel
        Model with mode 'paper-polynomial'.
    """
    alpha, beta = four_step_parameters(protocol)
    h_eff = _averaged(h0, protocol, averaging) + \
        paper_first_order(protocol, omega)
    return EffectiveModel(h_eff, paper_kick(protocol, omega),
                          'paper-polynomial', omega, averaging=averaging,
                          metadata={'alpha': alpha, 'beta': beta})


def paper_first_order(protocol, omega):
    """Return the commutator term of a four-step protocol from p_polynomials
    """
    alpha, beta = four_step_parameters(protocol)
    weights = np.zeros((4, 4))
    for (r, s), value in zip(FOUR_STEP_PAIRS, p_polynomials(alpha, beta)):
        weights[r, s] = value
    return first_order_term(protocol.potentials, weights, omega)


def paper_kick(protocol, omega):
    """Return K(0) of a four-step protocol from q_polynomials"""
    alpha, beta = four_step_parameters(protocol)
    return kick_term(protocol.potentials,
                     np.array(q_polynomials(alpha, beta)), omega)


def h_eff_closed_form(h0, protocol, omega, averaging='paper'):
    """Return the effective model of any step protocol from closed forms

    Uses commutator_coefficients and kick_coefficients, so the result is
    free of truncation error for any number of steps.
    """
    _check_omega(omega)
    potentials = protocol.potentials
    weights = commutator_coefficients(protocol.fractions)
    h_eff = _averaged(h0, protocol, averaging) + \
        first_order_term(potentials, weights, omega)
    kick = kick_term(potentials, kick_coefficients(protocol.fractions),
                     omega)
    return EffectiveModel(h_eff, kick, 'closed-form', omega,
                          averaging=averaging,
                          metadata={'fractions': protocol.fractions.tolist()})


def _tail_constant(norms, harmonics, power):
    # Largest scaled term over the last tenth of the retained harmonics
    count = max(1, len(harmonics) // 10)
    return float(np.max(norms[-count:] * harmonics[-count:]**power))


def _harmonic_first_order(protocol, omega, truncation):
    _check_omega(omega)
    harmonics = np.arange(1, truncation.j_max + 1)
    components = fourier_components(protocol, harmonics)
    adjoints = np.conj(np.swapaxes(components, 1, 2))
    terms = (np.matmul(components, adjoints) -
             np.matmul(adjoints, components)) / harmonics[:, None, None]
    h1 = np.sum(terms, axis=0) / omega
    h1 = 0.5 * (h1 + h1.conj().T)
    norms = np.linalg.norm(terms, axis=(1, 2))
    constant = _tail_constant(norms, harmonics, 3)
    tail_bound = constant / (2 * truncation.j_max**2) / omega
    logger.debug('First order harmonic sum with j_max=%d, tail bound %.3g'
                 % (truncation.j_max, tail_bound))
    return h1, truncation.with_tail_bound(tail_bound)


def _cosine_tail(fractions, j_max):
    """Return sum_{j > j_max} cos(2 pi j f) / j^2 for each fraction

    The tail is replaced by its integral from j_max + 1/2 to infinity, whose
    error is O(1/j_max^2) uniformly in f.
    """
    shifted = np.abs(fractions - np.round(fractions))
    a = 2 * np.pi * shifted
    x = j_max + 0.5
    si, _ = sici(a * x)
    return np.cos(a * x) / x - a * (np.pi / 2 - si)


def _harmonic_kick(protocol, omega, truncation):
    _check_omega(omega)
    harmonics = np.arange(1, truncation.j_max + 1)
    components = fourier_components(protocol, harmonics)
    adjoints = np.conj(np.swapaxes(components, 1, 2))
    terms = (components - adjoints) / harmonics[:, None, None]
    kick = np.sum(terms, axis=0) / (1j * omega)
    if truncation.tail_correction:
        tails = _cosine_tail(protocol.fractions, truncation.j_max)
        correction = np.tensordot(np.diff(tails),
                                  protocol.stacked_potentials(), axes=1)
        correction = correction / (np.pi * omega)
        kick = kick + correction
        tail_bound = float(np.linalg.norm(correction))
    else:
        norms = np.linalg.norm(terms, axis=(1, 2))
        tail_bound = _tail_constant(norms, harmonics, 2) / \
            truncation.j_max / omega
    kick = 0.5 * (kick + kick.conj().T)
    logger.debug('Kick harmonic sum with j_max=%d, tail bound %.3g'
                 % (truncation.j_max, tail_bound))
    return kick, truncation.with_tail_bound(tail_bound)


def h_first_order_harmonic(protocol, omega, truncation):
    """Return the first order term from a sum over harmonics

    H_1 = (1/omega) sum_{j=1}^{j_max} (1/j) [V^(j), V^(-j)]

    Parameters
    ----------
    protocol : afloat.protocol.StepProtocol
    omega : float
        Angular driving frequency.
    truncation : HarmonicTruncation
        Number of harmonics to sum.

    Returns
    -------
    numpy.ndarray
        Hermitian first order term.
    """
    return _harmonic_first_order(protocol, omega, truncation)[0]


def kick_harmonic(protocol, omega, truncation):
    """Return K(0) from a sum over harmonics

    K(0) = (1/(i omega)) sum_{j=1}^{j_max} (1/j) (V^(j) - V^(-j)),
    optionally with the closed form tail added.
    """
    return _harmonic_kick(protocol, omega, truncation)[0]


def harmonic_model(h0, protocol, omega, j_max_h1=2000, j_max_kick=10**4,
                   tail_correction=True, averaging='paper'):
    """Return the effective model assembled from harmonic sums

    Parameters
    ----------
    h0 : array_like
        Static Hamiltonian.
    protocol : afloat.protocol.StepProtocol
    omega : float
        Angular driving frequency.
    j_max_h1 : Optional[int]
        Harmonics summed for the first order term. Default: 2000
    j_max_kick : Optional[int]
        Harmonics summed for the kick operator. Default: 10000
    tail_correction : Optional[bool]
        Add the closed form tail to the kick sum. Default: True
    averaging : Optional[str]
        'paper' or 'corrected'. Default: 'paper'

    Returns
    -------
    EffectiveModel
        Model with mode 'harmonic-sum' whose truncations carry the tail
        estimates.
    """
    h1, h1_truncation = _harmonic_first_order(
        protocol, omega, HarmonicTruncation(j_max_h1))
    kick, kick_truncation = _harmonic_kick(
        protocol, omega, HarmonicTruncation(j_max_kick, tail_correction))
    h_eff = _averaged(h0, protocol, averaging) + h1
    return EffectiveModel(h_eff, kick, 'harmonic-sum', omega,
                          averaging=averaging,
                          truncations={'h_eff': h1_truncation,
                                       'kick': kick_truncation})


def floquet_propagator(h0, protocol, omega):
    """Return the exact one-period propagator of H0 + V(t)

    Steps are applied in time order, so the first step acts first.
    """
    _check_omega(omega)
    h0 = as_hermitian(h0)
    period = 2 * np.pi / omega
    propagator = np.eye(h0.shape[0], dtype=complex)
    for v, width in zip(protocol.potentials, protocol.widths):
        if width == 0:
            continue
        propagator = evolve(h0 + v, width * period) @ propagator
    return propagator


def exact_floquet(h0, protocol, omega):
    """Return the Floquet Hamiltonian of the exact one-period propagator

    Parameters
    ----------
    h0 : array_like
        Static Hamiltonian.
    protocol : afloat.protocol.StepProtocol
    omega : float
        Angular driving frequency. Must be large enough that every
        quasienergy times the period stays below pi.

    Returns
    -------
    EffectiveModel
        Model with mode 'exact-oracle'. Its h_eff is similar to the true
        effective Hamiltonian through the kick operator and its kick_zero
        is zero.

    Raises
    ------
    afloat.operators.BranchCutError
        If a quasienergy reaches the edge of the principal branch.
    """
    propagator = floquet_propagator(h0, protocol, omega)
    h_floquet = principal_log(propagator, 2 * np.pi / omega)
    return EffectiveModel(h_floquet, np.zeros_like(h_floquet),
                          'exact-oracle', omega)


def compare_models(a, b):
    """Return distances between two effective models

    The spectral distance is the largest difference between sorted
    eigenvalues. When exactly one model is the oracle, the matrix distance
    compares the other model with the oracle conjugated by the other
    model's kick, ||exp(iK) H_F exp(-iK) - H_eff||_F. Otherwise the
    Frobenius distance of the two h_eff is returned.

    Parameters
    ----------
    a, b : EffectiveModel
        Models sharing dimension and frequency.

    Returns
    -------
    dict
        Keys 'spectral_distance', 'matrix_distance', 'conjugated', 'modes',
        'averaging' and 'omega'.

    Raises
    ------
    ValueError
        If the models differ in dimension or frequency.
    """
    if a.dim != b.dim:
        raise ValueError('Models have differing dimensions %d and %d'
                         % (a.dim, b.dim))
    if not np.isclose(a.omega, b.omega, rtol=1e-12, atol=0):
        raise ValueError('Models have differing frequencies %g and %g'
                         % (a.omega, b.omega))
    spectral = float(np.max(np.abs(a.eigenvalues() - b.eigenvalues())))
    oracles = [model for model in (a, b) if model.mode == 'exact-oracle']
    if len(oracles) == 1:
        oracle = oracles[0]
        other = b if oracle is a else a
        # evolve(K, -1) = exp(iK)
        rotation = evolve(other.kick_zero, -1.0)
        conjugated = rotation @ oracle.h_eff @ rotation.conj().T
        matrix = float(np.linalg.norm(conjugated - other.h_eff))
    else:
        matrix = float(np.linalg.norm(a.h_eff - b.h_eff))
    return {'spectral_distance': spectral,
            'matrix_distance': matrix,
            'conjugated': len(oracles) == 1,
            'modes': [a.mode, b.mode],
            'averaging': [a.averaging, b.averaging],
            'omega': a.omega}


def second_order_residual(h0, protocol, omega, averaging='corrected'):
    """Return the spectral distance between the oracle and first order

    The first order model is taken from the closed forms so the residual
    carries no truncation error. With averaging 'corrected' it measures the
    size of the neglected higher orders.
    """
    oracle = exact_floquet(h0, protocol, omega)
    first_order = h_eff_closed_form(h0, protocol, omega, averaging=averaging)
    return compare_models(oracle, first_order)['spectral_distance']

