"""Paths in the (alpha, beta) parameter square.

A ParameterPath is a chain of PathSegments. Each coordinate of a segment is
a sum of analytic terms (polynomials, trigonometric functions, square root
arcs) so values and derivatives are exact. Paths can be built from the
builtin catalog or from JSON segment specifications.
"""

import logging
import numpy as np
from numpy.polynomial import Polynomial
from scipy import optimize


logger = logging.getLogger(__name__)

JOINT_TOL = 1e-12
SQUARE_TOL = 1e-9
CLOSED_TOL = 1e-12
ZERO_TOL = 1e-12
TANGENT_TOL = 1e-9
DEDUPE_TOL = 1e-9


class PolyTerm(object):
    """sum_k coeffs[k] tau^k"""
    kind = 'poly'

    def __init__(self, coeffs):
        coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
        if not np.all(np.isfinite(coeffs)):
            raise ValueError('Polynomial coefficients must be finite.')
        self.polynomial = Polynomial(coeffs)

    def value(self, tau):
        return self.polynomial(tau)

    def derivative(self, tau):
        return self.polynomial.deriv()(tau)

    def reversed(self, total):
        """Return the term of total - tau"""
        return PolyTerm(self.polynomial(Polynomial([total, -1.0])).coef)

    def to_list(self):
        return ['poly', self.polynomial.coef.tolist()]


class CosTerm(object):
    """amp cos(2 pi freq tau + phase)"""
    kind = 'cos'

    def __init__(self, amp, freq, phase=0.0):
        self.amp = float(amp)
        self.freq = float(freq)
        self.phase = float(phase)

    def _argument(self, tau):
        return 2*np.pi*self.freq*np.asarray(tau) + self.phase

    def value(self, tau):
        return self.amp * np.cos(self._argument(tau))

    def derivative(self, tau):
        return -2*np.pi*self.freq*self.amp * np.sin(self._argument(tau))

    def reversed(self, total):
        return type(self)(self.amp, -self.freq,
                          2*np.pi*self.freq*total + self.phase)

    def to_list(self):
        return [self.kind, self.amp, self.freq, self.phase]


class SinTerm(CosTerm):
    """amp sin(2 pi freq tau + phase)"""
    kind = 'sin'

    def value(self, tau):
        return self.amp * np.sin(self._argument(tau))

    def derivative(self, tau):
        return 2*np.pi*self.freq*self.amp * np.cos(self._argument(tau))


class SqrtArcTerm(object):
    """amp sqrt((tau - t0)(t1 - tau)), zero outside [t0, t1]

    The derivative diverges at t0 and t1.
    """
    kind = 'sqrt-arc'

    def __init__(self, amp, t0=0.0, t1=1.0):
        if not t1 > t0:
            raise ValueError('sqrt-arc needs t1 > t0, got %r, %r' % (t0, t1))
        self.amp = float(amp)
        self.t0 = float(t0)
        self.t1 = float(t1)

    def _radicand(self, tau):
        return (np.asarray(tau) - self.t0) * (self.t1 - np.asarray(tau))

    def value(self, tau):
        return self.amp * np.sqrt(np.maximum(self._radicand(tau), 0.0))

    def derivative(self, tau):
        radicand = self._radicand(tau)
        with np.errstate(divide='ignore', invalid='ignore'):
            slope = (self.t0 + self.t1 - 2*np.asarray(tau)) / \
                (2*np.sqrt(radicand))
        return np.where(radicand > 0, self.amp * slope, np.inf)

    def reversed(self, total):
        return SqrtArcTerm(self.amp, total - self.t1, total - self.t0)

    def to_list(self):
        return ['sqrt-arc', self.amp, self.t0, self.t1]


TERM_TYPES = {'poly': PolyTerm, 'cos': CosTerm, 'sin': SinTerm,
              'sqrt-arc': SqrtArcTerm}


def term_from_list(spec):
    """Return a term from its list encoding, e.g. ['cos', 0.5, 1, 0]"""
    if not isinstance(spec, (list, tuple)) or not spec:
        raise ValueError('A term must be a non-empty list, got %r' % (spec,))
    kind = spec[0]
    if kind not in TERM_TYPES:
        raise ValueError('Unknown term type %r. Expected one of %s'
                         % (kind, ', '.join(sorted(TERM_TYPES))))
    try:
        return TERM_TYPES[kind](*spec[1:])
    except TypeError:
        raise ValueError('Malformed %s term %r' % (kind, spec))


class PathSegment(object):
    """One analytic piece tau -> (alpha(tau), beta(tau)) of a path

    Parameters
    ----------
    tau_start, tau_end : float
        Parameter interval of the segment.
    alpha_terms, beta_terms : list
        Terms summed into each coordinate.
    """
    def __init__(self, tau_start, tau_end, alpha_terms, beta_terms):
        if not tau_end > tau_start:
            raise ValueError('Segment needs tau_end > tau_start, got [%r, %r]'
                             % (tau_start, tau_end))
        self.tau_start = float(tau_start)
        self.tau_end = float(tau_end)
        self.alpha_terms = list(alpha_terms)
        self.beta_terms = list(beta_terms)

    @property
    def length(self):
        return self.tau_end - self.tau_start

    def value(self, tau):
        tau = np.asarray(tau, dtype=float)
        alpha = sum(term.value(tau) for term in self.alpha_terms) + 0*tau
        beta = sum(term.value(tau) for term in self.beta_terms) + 0*tau
        return alpha, beta

    def derivative(self, tau):
        tau = np.asarray(tau, dtype=float)
        alpha = sum(term.derivative(tau) for term in self.alpha_terms) + 0*tau
        beta = sum(term.derivative(tau) for term in self.beta_terms) + 0*tau
        return alpha, beta

    def reversed(self, total):
        return PathSegment(total - self.tau_end, total - self.tau_start,
                           [term.reversed(total) for term in self.alpha_terms],
                           [term.reversed(total) for term in self.beta_terms])

    def to_dict(self):
        return {'tau': [self.tau_start, self.tau_end],
                'alpha': [term.to_list() for term in self.alpha_terms],
                'beta': [term.to_list() for term in self.beta_terms]}


class ParameterPath(object):
    """A continuous path in the unit square

    Parameters
    ----------
    segments : list of PathSegment
        Contiguous segments in increasing tau order.
    name : Optional[str]
        Name used in reports. Default: 'custom'

    Attributes
    ----------
    closed : bool
        True if the endpoints agree within 1e-12.

    Raises
    ------
    ValueError
        If the segments are not contiguous, jump at a joint or leave the
        unit square.
    """
    def __init__(self, segments, name='custom'):
        if not segments:
            raise ValueError('A path needs at least one segment.')
        self.segments = list(segments)
        self.name = name
        for previous, current in zip(self.segments[:-1], self.segments[1:]):
            if abs(previous.tau_end - current.tau_start) > JOINT_TOL:
                raise ValueError('Segments are not contiguous at tau=%r'
                                 % previous.tau_end)
            jump = np.hypot(*np.subtract(previous.value(previous.tau_end),
                                         current.value(current.tau_start)))
            if jump > JOINT_TOL:
                raise ValueError('Path jumps by %.3g at tau=%r'
                                 % (jump, current.tau_start))
        for segment in self.segments:
            taus = np.linspace(segment.tau_start, segment.tau_end, 257)
            alpha, beta = segment.value(taus)
            if (np.any(np.minimum(alpha, beta) < -SQUARE_TOL) or
                    np.any(np.maximum(alpha, beta) > 1 + SQUARE_TOL)):
                raise ValueError('Path %s leaves the unit square on '
                                 '[%r, %r]' % (name, segment.tau_start,
                                               segment.tau_end))
        start = self.segments[0].value(self.tau_start)
        end = self.segments[-1].value(self.tau_end)
        self.closed = bool(np.hypot(*np.subtract(start, end)) <= CLOSED_TOL)

    @property
    def tau_start(self):
        return self.segments[0].tau_start

    @property
    def tau_end(self):
        return self.segments[-1].tau_end

    @property
    def joints(self):
        """Segment boundaries from tau_start to tau_end"""
        return np.array([self.tau_start] +
                        [segment.tau_end for segment in self.segments])

    def segment_index(self, tau):
        """Return the index of the segment owning each tau

        tau in [t_k, t_{k+1}) belongs to segment k. The last segment also
        owns its end point.
        """
        tau = np.asarray(tau, dtype=float)
        if np.any((tau < self.tau_start - JOINT_TOL) |
                  (tau > self.tau_end + JOINT_TOL)):
            raise ValueError('tau outside [%r, %r]' % (self.tau_start,
                                                       self.tau_end))
        index = np.searchsorted(self.joints, tau, side='right') - 1
        return np.clip(index, 0, len(self.segments) - 1)

    def _piecewise(self, tau, method):
        tau = np.asarray(tau, dtype=float)
        index = self.segment_index(tau)
        alpha = np.empty(tau.shape)
        beta = np.empty(tau.shape)
        for k, segment in enumerate(self.segments):
            mask = index == k
            if np.any(mask):
                alpha[mask], beta[mask] = getattr(segment, method)(tau[mask])
        return alpha, beta

    def evaluate(self, tau):
        """Return (alpha, beta) at tau, clipped to the unit square"""
        alpha, beta = self._piecewise(tau, 'value')
        alpha, beta = np.clip(alpha, 0, 1), np.clip(beta, 0, 1)
        if np.ndim(tau) == 0:
            return float(alpha), float(beta)
        return alpha, beta

    def derivative(self, tau):
        """Return (dalpha/dtau, dbeta/dtau) at tau"""
        alpha, beta = self._piecewise(tau, 'derivative')
        if np.ndim(tau) == 0:
            return float(alpha), float(beta)
        return alpha, beta

    def to_dict(self):
        return {'name': self.name,
                'segments': [segment.to_dict() for segment in self.segments]}

    def __repr__(self):
        return 'ParameterPath(name=%s, segments=%d, closed=%s)' % \
            (self.name, len(self.segments), self.closed)


def _circle(name, center_alpha, center_beta, radius):
    return ParameterPath([PathSegment(
        0.0, 1.0,
        [PolyTerm([center_alpha]), CosTerm(radius, 1.0)],
        [PolyTerm([center_beta]), SinTerm(radius, 1.0)])], name=name)


def _fig4a():
    return ParameterPath([
        PathSegment(0.0, 0.25, [PolyTerm([1, -2])], [PolyTerm([0.5])]),
        PathSegment(0.25, 0.5, [PolyTerm([0.5])], [PolyTerm([1, -2])]),
        PathSegment(0.5, 1.0, [PolyTerm([0, 1])],
                    [PolyTerm([0.5]), SqrtArcTerm(-1.0)])], name='fig4a')


def _fig4c():
    return ParameterPath([
        PathSegment(0.25, 0.4, [PolyTerm([0, 1])], [PolyTerm([-1, 5])]),
        PathSegment(0.4, 0.6, [PolyTerm([0, 1])], [PolyTerm([7, -25, 25])]),
        PathSegment(0.6, 0.75, [PolyTerm([0, 1])], [PolyTerm([2, -5/3])])],
        name='fig4c')


BUILTIN_PATHS = {
    # Three pieces through (1, 1/2), (1/2, 1/2) and (1/2, 0)
    'fig4a': _fig4a,
    # Circle inscribed in the square
    'fig4b': lambda: _circle('fig4b', 0.5, 0.5, 0.5),
    # Open path from (1/4, 1/4) to (3/4, 3/4) touching beta = 1 twice
    'fig4c': _fig4c,
    # Nearby circles below the diagonal, one crossing it twice
    'fig5-long': lambda: _circle('fig5-long', 0.62, 0.38, 0.21),
    'fig5-short': lambda: _circle('fig5-short', 0.65, 0.35, 0.2),
}


def builtin_path(name):
    """Return a path from the builtin catalog

    Parameters
    ----------
    name : str
        One of 'fig4a', 'fig4b', 'fig4c', 'fig5-long' and 'fig5-short'.

    Returns
    -------
    ParameterPath

    Raises
    ------
    ValueError
        If the name is unknown.
    """
    if name not in BUILTIN_PATHS:
        raise ValueError('Unknown path %r. Available paths: %s'
                         % (name, ', '.join(sorted(BUILTIN_PATHS))))
    return BUILTIN_PATHS[name]()


def path_from_spec(spec):
    """Return a path from a builtin name or a segment specification

    Parameters
    ----------
    spec : str or dict
        Either a builtin name or a dict with a 'segments' list, each
        segment a dict with 'tau': [start, end] and term lists under
        'alpha' and 'beta'. An optional 'name' is kept.

    Returns
    -------
    ParameterPath
    """
    if isinstance(spec, str):
        return builtin_path(spec)
    if not isinstance(spec, dict) or 'segments' not in spec:
        raise ValueError('A path must be a builtin name or a dict with '
                         'segments.')
    segments = []
    for segment in spec['segments']:
        try:
            tau_start, tau_end = segment['tau']
            alpha_terms = [term_from_list(term) for term in segment['alpha']]
            beta_terms = [term_from_list(term) for term in segment['beta']]
        except (KeyError, TypeError):
            raise ValueError('Malformed path segment %r' % (segment,))
        segments.append(PathSegment(tau_start, tau_end, alpha_terms,
                                    beta_terms))
    return ParameterPath(segments, name=spec.get('name', 'custom'))


def reversed_path(path):
    """Return the path traversed backwards on the same tau interval"""
    total = path.tau_start + path.tau_end
    segments = [segment.reversed(total) for segment in
                reversed(path.segments)]
    return ParameterPath(segments, name='%s-reversed' % path.name)


def _allocate_intervals(lengths, n_intervals):
    lengths = np.asarray(lengths, dtype=float)
    counts = np.maximum(1, np.round(n_intervals * lengths /
                                    lengths.sum()).astype(int))
    counts[np.argmax(lengths)] += n_intervals - counts.sum()
    if np.any(counts < 1):
        raise ValueError('Too few samples for %d segments' % len(lengths))
    return counts


def sample_taus(path, n):
    """Return n sample parameters including every segment joint"""
    if n < 2:
        raise ValueError('At least two samples are needed, got %r' % n)
    minimum = len(path.segments) + 1
    if n < minimum:
        logger.warning('Raising sample count from %d to %d so that every '
                       'joint is sampled' % (n, minimum))
        n = minimum
    counts = _allocate_intervals([segment.length for segment
                                  in path.segments], n - 1)
    taus = []
    for segment, count in zip(path.segments, counts):
        taus.append(np.linspace(segment.tau_start, segment.tau_end,
                                count + 1)[:-1])
    taus.append([path.tau_end])
    return np.concatenate(taus)


def sample_path(path, n):
    """Return n samples (tau, alpha, beta) along the path

    Samples are spaced uniformly within each segment, with the number per
    segment proportional to its tau length, and all joints are included.
    For a closed path the first and last samples coincide.

    Parameters
    ----------
    path : ParameterPath
    n : int
        Number of samples, at least 2.

    Returns
    -------
    numpy.ndarray
        Array of shape (n, 3).
    """
    taus = sample_taus(path, n)
    alpha, beta = path.evaluate(taus)
    if path.closed:
        alpha[-1], beta[-1] = alpha[0], beta[0]
    return np.column_stack([taus, alpha, beta])


def cosine_quadrature(tau_start, tau_end, n_nodes):
    """Return Gauss-Legendre nodes and weights on [tau_start, tau_end]

    The nodes are mapped through tau = a + (b - a)(1 - cos(pi s)) / 2, which
    clusters them at the ends and smooths square root end behaviour.
    """
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    s = (x + 1) / 2
    span = tau_end - tau_start
    taus = tau_start + span * (1 - np.cos(np.pi * s)) / 2
    weights = w / 2 * span * np.pi * np.sin(np.pi * s) / 2
    return taus, weights


def segment_nodes(path, n, minimum=16, maximum=512):
    """Return quadrature nodes per segment, proportional to tau length"""
    lengths = np.array([segment.length for segment in path.segments])
    counts = np.round(n * lengths / lengths.sum()).astype(int)
    return np.clip(counts, minimum, maximum)


def path_length(path, n_nodes=64):
    """Return the Euclidean length of the path in parameter space"""
    total = 0.0
    for segment in path.segments:
        taus, weights = cosine_quadrature(segment.tau_start, segment.tau_end,
                                          n_nodes)
        d_alpha, d_beta = segment.derivative(taus)
        total += float(np.dot(weights, np.hypot(d_alpha, d_beta)))
    return total


class Crossing(object):
    """A contact of a path with an invariant segment

    Attributes
    ----------
    tau : float
        Path parameter of the contact.
    segment : str
        Name of the invariant segment.
    kind : str
        'transversal' if the path crosses the segment, 'tangential' if it
        only touches it.
    alpha, beta : float
        Location of the contact.
    """
    def __init__(self, tau, segment, kind, alpha, beta):
        self.tau = float(tau)
        self.segment = segment
        self.kind = kind
        self.alpha = float(alpha)
        self.beta = float(beta)

    def to_dict(self):
        return {'tau': self.tau, 'segment': self.segment, 'kind': self.kind,
                'alpha': self.alpha, 'beta': self.beta}

    def __repr__(self):
        return 'Crossing(tau=%.12g, segment=%s, kind=%s)' % \
            (self.tau, self.segment, self.kind)


# Signed distances to the invariant segments
SEGMENT_FUNCTIONS = (('alpha=beta', lambda a, b: a - b),
                     ('alpha=0', lambda a, b: a),
                     ('alpha=1', lambda a, b: a - 1),
                     ('beta=0', lambda a, b: b),
                     ('beta=1', lambda a, b: b - 1))


def _nonzero_neighbour(values, start, step, cyclic):
    n = len(values)
    index = start + step
    while True:
        if cyclic:
            index %= n
            if index == start:
                return 0.0
        elif index < 0 or index >= n:
            return None
        if abs(values[index]) > ZERO_TOL:
            return values[index]
        index += step


def invariant_crossings(path, n=2001):
    """Return the contacts of a path with the five invariant segments

    Sign changes of alpha - beta, alpha, alpha - 1, beta and beta - 1
    between samples are refined with brentq and reported as transversal.
    Samples on a segment are classified by the signs on either side, and
    local minima of the squared distance reaching zero are reported as
    tangential.

    Parameters
    ----------
    path : ParameterPath
    n : Optional[int]
        Number of samples. Default: 2001

    Returns
    -------
    list of Crossing
        Sorted by tau.
    """
    samples = sample_path(path, n)
    taus = samples[:, 0]
    if path.closed:
        # The last sample repeats the first
        samples = samples[:-1]
        taus = taus[:-1]
    cyclic = path.closed
    crossings = []
    for name, function in SEGMENT_FUNCTIONS:
        def distance(tau):
            return function(*path.evaluate(tau))

        values = function(samples[:, 1], samples[:, 2])
        m = len(values)
        zero = np.abs(values) <= ZERO_TOL
        pairs = [(k, k + 1) for k in range(m - 1)]
        if cyclic:
            pairs.append((m - 1, None))
        for k, following in pairs:
            next_value = values[0] if following is None else values[following]
            if zero[k] or abs(next_value) <= ZERO_TOL:
                continue
            if values[k] * next_value < 0:
                upper = path.tau_end if following is None else taus[following]
                root = optimize.brentq(distance, taus[k], upper, xtol=1e-14)
                crossings.append(Crossing(root, name, 'transversal',
                                          *path.evaluate(root)))
        k = 0
        while k < m:
            if not zero[k]:
                k += 1
                continue
            end = k
            while end + 1 < m and zero[end + 1]:
                end += 1
            before = _nonzero_neighbour(values, k, -1, cyclic)
            after = _nonzero_neighbour(values, end, 1, cyclic)
            if before is not None and after is not None and \
                    before * after < 0:
                kind = 'transversal'
            else:
                kind = 'tangential'
            middle = (k + end) // 2
            crossings.append(Crossing(taus[middle], name, kind,
                                      samples[middle, 1], samples[middle, 2]))
            k = end + 1
        for k in range(1, m - 1):
            if zero[k - 1] or zero[k] or zero[k + 1]:
                continue
            if not (abs(values[k]) < abs(values[k - 1]) and
                    abs(values[k]) <= abs(values[k + 1])):
                continue
            if values[k - 1] * values[k] < 0 or values[k] * values[k + 1] < 0:
                continue
            result = optimize.minimize_scalar(
                lambda tau: distance(tau)**2, bounds=(taus[k - 1],
                                                      taus[k + 1]),
                method='bounded', options={'xatol': 1e-12})
            if abs(distance(result.x)) <= TANGENT_TOL:
                crossings.append(Crossing(result.x, name, 'tangential',
                                          *path.evaluate(result.x)))
    crossings.sort(key=lambda crossing: (crossing.tau, crossing.segment))
    unique = []
    for crossing in crossings:
        if unique and unique[-1].segment == crossing.segment and \
                abs(unique[-1].tau - crossing.tau) <= DEDUPE_TOL:
            continue
        unique.append(crossing)
    logger.debug('Path %s has %d invariant segment contacts'
                 % (path.name, len(unique)))
    return unique
