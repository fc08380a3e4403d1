"""The driven spin-1/2 rotor.

A rigid rotor with H0 = S^2 / 2I is driven by the four-step protocol with
spin potentials set by four drive constants c1, ..., c4. To first order the
effective Hamiltonian is H0 - (pi / 8 omega) S . B(alpha, beta), so the
synthetic field B fixes the bands, their degeneracies and the eigenstates
transported along parameter paths.
"""

import logging
import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from concurrent.futures import ThreadPoolExecutor

from afloat.operators import spin_half_operators, hermitian_eigensystem
from afloat.protocol import four_step_protocol
from afloat.effective import p_polynomials, p_polynomial_gradients, \
    q_polynomials, h_eff_paper


logger = logging.getLogger(__name__)

DIABOLICAL_GUARD = 1e-8
SEGMENT_TOL = 1e-10
ZERO_FIELD_TOL = 1e-12
CORNERS = ((0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0))
# Invariant segments of the unit square, as maps s -> (alpha, beta)
SEGMENTS = (('alpha=0', lambda s: (0*s, s)),
            ('alpha=1', lambda s: (0*s + 1, s)),
            ('beta=0', lambda s: (s, 0*s)),
            ('beta=1', lambda s: (s, 0*s + 1)),
            ('alpha=beta', lambda s: (s, s)))


class NearDiabolicalError(ValueError):
    """Raised when the synthetic field is too weak to define a direction

    Parameters
    ----------
    tau : float or None
        Path parameter at which the field vanished. None for a point that
        is not on a path.
    magnitude : float
        The field magnitude found there.
    guard : Optional[float]
        The guard that was undercut. Default: 1e-8
    point : Optional[tuple]
        (alpha, beta) of the weak field, reported when tau is None.
    """
    def __init__(self, tau, magnitude, guard=DIABOLICAL_GUARD, point=None):
        self.tau = tau
        self.magnitude = magnitude
        self.point = point
        if tau is None:
            where = '(alpha, beta) = (%g, %g)' % tuple(point)
        else:
            where = 'tau=%.12g' % tau
        super(NearDiabolicalError, self).__init__(
            'Synthetic field magnitude %.3g is below the guard %g at %s. '
            'The path passes through or too close to a diabolical point.'
            % (magnitude, guard, where))


class DirectionNotInvariantError(ValueError):
    """Raised when the field direction changes along a segment

    Parameters
    ----------
    segment : str
        Name of the segment.
    deviation : float
        Largest angle in radians between sampled directions.
    """
    def __init__(self, segment, deviation):
        self.segment = segment
        self.deviation = deviation
        super(DirectionNotInvariantError, self).__init__(
            'Field direction on segment %s deviates by %.3g rad.'
            % (segment, deviation))


class SyntheticField(object):
    """A synthetic magnetic field vector

    Parameters
    ----------
    vector : array_like
        Components (b_x, b_y, b_z).
    """
    def __init__(self, vector):
        vector = np.array(vector, dtype=float)
        if vector.shape != (3,) or not np.all(np.isfinite(vector)):
            raise ValueError('A field must be a finite three-vector.')
        vector.setflags(write=False)
        self.vector = vector

    @property
    def bx(self):
        return float(self.vector[0])

    @property
    def by(self):
        return float(self.vector[1])

    @property
    def bz(self):
        return float(self.vector[2])

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.vector))

    def direction(self, guard=DIABOLICAL_GUARD):
        """Return the unit vector along the field

        Raises
        ------
        ValueError
            If the magnitude is below guard.
        """
        magnitude = self.magnitude
        if magnitude < guard:
            raise ValueError('Field magnitude %.3g is too small to define a '
                             'direction.' % magnitude)
        return self.vector / magnitude

    def to_dict(self):
        return {'bx': self.bx, 'by': self.by, 'bz': self.bz,
                'magnitude': self.magnitude}

    def __repr__(self):
        return 'SyntheticField(%.12g, %.12g, %.12g)' % tuple(self.vector)


def drive_constants(c):
    """Return the drive constants as a validated float array of length 4"""
    c = np.array(c, dtype=float)
    if c.shape != (4,):
        raise ValueError('Expected four drive constants, got %s' % (c,))
    if not np.all(np.isfinite(c)):
        raise ValueError('Drive constants must be finite.')
    return c


def _check_scales(omega, inertia):
    if not np.isfinite(omega) or omega <= 0:
        raise ValueError('omega must be positive, got %r' % omega)
    if not np.isfinite(inertia) or inertia <= 0:
        raise ValueError('inertia must be positive, got %r' % inertia)


def rotor_hamiltonian(inertia=1.0):
    """Return H0 = S^2 / 2I = 3 / (8I) for spin 1/2"""
    if not np.isfinite(inertia) or inertia <= 0:
        raise ValueError('inertia must be positive, got %r' % inertia)
    return 3 / (8 * inertia) * np.eye(2, dtype=complex)


def spin_potentials(c):
    """Return the four spin potentials of the drive

    V1 = c1 Sx - c2 Sy, V2 = c2 Sy + c3 Sz, V3 = c4 Sz - c1 Sx and
    V4 = -(c3 + c4) Sz. They sum to zero for any constants.

    Parameters
    ----------
    c : array_like
        Drive constants (c1, c2, c3, c4).

    Returns
    -------
    tuple of numpy.ndarray
    """
    c1, c2, c3, c4 = drive_constants(c)
    sx, sy, sz = spin_half_operators()
    return (c1*sx - c2*sy,
            c2*sy + c3*sz,
            c4*sz - c1*sx,
            -(c3 + c4)*sz)


def spin_protocol(alpha, beta, c):
    """Return the four-step protocol with the spin potentials"""
    return four_step_protocol(alpha, beta, *spin_potentials(c))


def _field_from_weights(p, c):
    p12, p13, p14, p23, p24, p34 = p
    c1, c2, c3, c4 = c
    bx = c2*c3*(-p12 + p14 - p24) + c2*c4*(-p13 + p23 - p24 + p14)
    by = c1*c3*(-p12 + p14 - p34 - p23) + c1*c4*(-p13 - p34 + p14)
    bz = c1*c2*(p12 - p13 + p23)
    return np.stack(np.broadcast_arrays(bx, by, bz), axis=-1)


def field_vector(alpha, beta, c):
    """Return B(alpha, beta) as an array of shape broadcast(alpha, beta) + (3,)
    """
    return _field_from_weights(p_polynomials(alpha, beta), drive_constants(c))


def field_gradient(alpha, beta, c):
    """Return the partial derivatives of the synthetic field

    Returns
    -------
    d_alpha, d_beta : numpy.ndarray
        dB/dalpha and dB/dbeta, each with a trailing axis of length 3.
    """
    c = drive_constants(c)
    d_alpha, d_beta = p_polynomial_gradients(alpha, beta)
    return _field_from_weights(d_alpha, c), _field_from_weights(d_beta, c)


def synthetic_field(alpha, beta, c):
    """Return the synthetic field B of the first order Hamiltonian

    Parameters
    ----------
    alpha, beta : float
        Partition parameters in [0, 1].
    c : array_like
        Drive constants.

    Returns
    -------
    SyntheticField
    """
    return SyntheticField(field_vector(alpha, beta, c))


def kick_field(alpha, beta, c):
    """Return the field B' with K(0) = -(pi / 4 omega) S . B'"""
    q1, q2, q3, q4 = q_polynomials(alpha, beta)
    c1, c2, c3, c4 = drive_constants(c)
    return SyntheticField([c1*(q1 - q3),
                           c2*(q2 - q1),
                           c3*q2 + c4*q3 - (c3 + c4)*q4])


def field_0101(alpha, beta):
    """Return B for the drive constants (0, 1, 0, 1)

    The field points along x and vanishes on the diagonal alpha = beta.
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    bx = -2*a + 2*a**2 + 2*b - 4*a**2*b - 2*b**2 + 4*a*b**2
    return SyntheticField([float(bx), 0.0, 0.0])


def average_field(alpha, beta, c):
    """Return the field B_f of the period averaged drive

    V^(0) = S . B_f, the duration weighted mean of the spin potentials.
    """
    a = float(alpha)
    b = float(beta)
    c1, c2, c3, c4 = drive_constants(c)
    return SyntheticField([c1*(a - b)/2,
                           c2*(1 - 2*a)/2,
                           c3*(1 - a)/2 + c4*b/2 - (c3 + c4)*(1 - b)/2])


def h_eff_from_field(alpha, beta, c, omega, inertia=1.0, averaging='paper'):
    """Return H0 - (pi / 8 omega) S . B, plus S . B_f if corrected"""
    _check_scales(omega, inertia)
    sx, sy, sz = spin_half_operators()
    field = field_vector(alpha, beta, c)
    h = rotor_hamiltonian(inertia) - np.pi / (8 * omega) * \
        (field[0]*sx + field[1]*sy + field[2]*sz)
    if averaging == 'corrected':
        average = average_field(alpha, beta, c).vector
        h = h + average[0]*sx + average[1]*sy + average[2]*sz
    elif averaging != 'paper':
        raise ValueError('Unknown averaging %s' % averaging)
    return h


def spectrum(alpha, beta, c, omega, inertia=1.0, averaging='paper'):
    """Return the two bands (E_minus, E_plus) at (alpha, beta)

    The values are the eigenvalues of the assembled effective Hamiltonian.
    In paper averaging they equal 3 / 8I -+ (pi / 16 omega) |B|, since the
    eigenvalues of S . B are -+|B| / 2.

    Parameters
    ----------
    alpha, beta : float
        Partition parameters in [0, 1].
    c : array_like
        Drive constants.
    omega : float
        Angular driving frequency.
    inertia : Optional[float]
        Moment of inertia I. Default: 1.0
    averaging : Optional[str]
        'paper' or 'corrected'. Default: 'paper'

    Returns
    -------
    tuple of float
    """
    _check_scales(omega, inertia)
    model = h_eff_paper(rotor_hamiltonian(inertia),
                        spin_protocol(alpha, beta, c), omega,
                        averaging=averaging)
    eigenvalues = model.eigenvalues()
    return float(eigenvalues[0]), float(eigenvalues[1])


def ground_state_energy(alpha, beta, c, omega, inertia=1.0):
    """Return the lower band energy at (alpha, beta)"""
    return spectrum(alpha, beta, c, omega, inertia)[0]


class BandSurface(object):
    """Bands of the effective Hamiltonian on a square grid

    Attributes
    ----------
    grid : numpy.ndarray
        Node coordinates shared by alpha (rows) and beta (columns).
    e_minus, e_plus, b_mag : numpy.ndarray
        Arrays of shape (grid_n, grid_n) indexed by (row, column).
    """
    def __init__(self, grid, e_minus, e_plus, b_mag, omega, inertia):
        self.grid = grid
        self.e_minus = e_minus
        self.e_plus = e_plus
        self.b_mag = b_mag
        self.omega = omega
        self.inertia = inertia

    @property
    def grid_n(self):
        return len(self.grid)

    def rows(self):
        """Return (alpha, beta, e_minus, e_plus, b_mag) in row-major order
        """
        result = []
        for i, alpha in enumerate(self.grid):
            for j, beta in enumerate(self.grid):
                result.append((alpha, beta, self.e_minus[i, j],
                               self.e_plus[i, j], self.b_mag[i, j]))
        return result

    def argmax(self):
        """Return the node (alpha, beta) of largest field magnitude"""
        i, j = np.unravel_index(np.argmax(self.b_mag), self.b_mag.shape)
        return float(self.grid[i]), float(self.grid[j])


def _band_row(alpha, grid, c, omega, inertia):
    sx, sy, sz = spin_half_operators()
    alphas = np.full_like(grid, alpha)
    field = field_vector(alphas, grid, c)
    h = rotor_hamiltonian(inertia)[None] - np.pi / (8 * omega) * \
        (field[:, 0, None, None]*sx + field[:, 1, None, None]*sy +
         field[:, 2, None, None]*sz)
    eigenvalues = np.linalg.eigvalsh(h)
    return eigenvalues[:, 0], eigenvalues[:, 1], np.linalg.norm(field, axis=1)


def band_surface(c, grid_n=128, omega=100.0, inertia=1.0, n_jobs=1):
    """Return the bands on a grid_n x grid_n grid of the unit square

    Rows are evaluated on a thread pool and assembled in row order, so the
    result does not depend on n_jobs.

    Parameters
    ----------
    c : array_like
        Drive constants.
    grid_n : Optional[int]
        Nodes per axis, including both ends. Default: 128
    omega : Optional[float]
        Angular driving frequency. Default: 100.0
    inertia : Optional[float]
        Moment of inertia. Default: 1.0
    n_jobs : Optional[int]
        Number of worker threads. Default: 1

    Returns
    -------
    BandSurface
    """
    _check_scales(omega, inertia)
    if grid_n < 2:
        raise ValueError('grid_n must be at least 2, got %r' % grid_n)
    c = drive_constants(c)
    grid = np.linspace(0, 1, grid_n)
    logger.info('Computing bands on a %dx%d grid with %d jobs'
                % (grid_n, grid_n, n_jobs))
    with ThreadPoolExecutor(max_workers=max(1, n_jobs)) as executor:
        rows = list(executor.map(
            lambda alpha: _band_row(alpha, grid, c, omega, inertia), grid))
    e_minus = np.stack([row[0] for row in rows])
    e_plus = np.stack([row[1] for row in rows])
    b_mag = np.stack([row[2] for row in rows])
    return BandSurface(grid, e_minus, e_plus, b_mag, omega, inertia)


class DiabolicalScan(object):
    """Zeros of the synthetic field found by diabolical_scan

    Attributes
    ----------
    points : list of tuple
        Isolated degeneracies (alpha, beta). The four corners are always
        present.
    curves : list of numpy.ndarray
        Polylines of shape (m, 2) along degenerate loci.
    degenerate : bool
        True if the field vanishes on the whole grid.
    """
    def __init__(self, points, curves, degenerate, grid_n, tol):
        self.points = points
        self.curves = curves
        self.degenerate = degenerate
        self.grid_n = grid_n
        self.tol = tol

    def rows(self):
        """Return (component, kind, alpha, beta) rows for export"""
        result = []
        for component, (alpha, beta) in enumerate(self.points):
            result.append((component, 'point', alpha, beta))
        for offset, curve in enumerate(self.curves):
            for alpha, beta in curve:
                result.append((len(self.points) + offset, 'curve',
                               alpha, beta))
        return result

    def to_dict(self):
        return {'points': [list(point) for point in self.points],
                'curves': [curve.tolist() for curve in self.curves],
                'degenerate': self.degenerate,
                'grid_n': self.grid_n,
                'tol': self.tol}


def _squared_norm(b):
    return np.sum(b**2, axis=-1)


def _refine_zeros(seeds, c, tol, max_iter=50, max_halvings=30):
    """Damped Gauss-Newton descent of |B|^2 from many seeds at once"""
    x = seeds.copy()
    stalled = np.zeros(len(x), dtype=bool)
    for _ in range(max_iter):
        b = field_vector(x[:, 0], x[:, 1], c)
        norm2 = _squared_norm(b)
        active = (norm2 > tol**2) & ~stalled
        if not np.any(active):
            break
        index = np.flatnonzero(active)
        d_alpha, d_beta = field_gradient(x[index, 0], x[index, 1], c)
        jacobian = np.stack([d_alpha, d_beta], axis=-1)
        step = -np.einsum('mij,mj->mi', np.linalg.pinv(jacobian), b[index])
        scale = np.ones(len(index))
        done = np.zeros(len(index), dtype=bool)
        for _ in range(max_halvings):
            trial = np.clip(x[index] + scale[:, None] * step, 0, 1)
            better = (_squared_norm(field_vector(trial[:, 0], trial[:, 1],
                                                 c)) < norm2[index]) & ~done
            x[index[better]] = trial[better]
            done |= better
            if np.all(done):
                break
            scale[~done] *= 0.5
        # Seeds at a nonzero local minimum stop moving
        stalled[index[~done]] = True
    magnitudes = np.sqrt(_squared_norm(field_vector(x[:, 0], x[:, 1], c)))
    return x, magnitudes


def _snap_to_corner(point, tol=1e-6):
    for corner in CORNERS:
        if np.hypot(point[0] - corner[0], point[1] - corner[1]) <= tol:
            return corner
    return float(point[0]), float(point[1])


def _polyline(points, spacing):
    """Order points along their principal axis and thin them to spacing"""
    centered = points - points.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    projection = centered @ vt[0]
    order = np.argsort(projection, kind='mergesort')
    kept = [order[0]]
    for index in order[1:]:
        if projection[index] - projection[kept[-1]] >= spacing:
            kept.append(index)
    return points[kept]


def diabolical_scan(c, grid_n=128, tol=1e-10):
    """Return the diabolical points and loci of the synthetic field

    Every grid node seeds a damped Gauss-Newton descent of |B|^2. Refined
    points with |B| < tol are clustered. Clusters wider than two grid cells
    are reported as curves, the others as isolated points.

    Parameters
    ----------
    c : array_like
        Drive constants.
    grid_n : Optional[int]
        Nodes per axis. Must be at least 16. Default: 128
    tol : Optional[float]
        Largest field magnitude accepted as a zero. Default: 1e-10

    Returns
    -------
    DiabolicalScan
    """
    if grid_n < 16:
        raise ValueError('grid_n must be at least 16, got %r' % grid_n)
    c = drive_constants(c)
    grid = np.linspace(0, 1, grid_n)
    spacing = grid[1] - grid[0]
    alphas, betas = np.meshgrid(grid, grid, indexing='ij')
    seeds = np.column_stack([alphas.ravel(), betas.ravel()])
    if np.max(np.linalg.norm(field_vector(seeds[:, 0], seeds[:, 1], c),
                             axis=1)) <= tol:
        logger.warning('Synthetic field vanishes on the whole grid for '
                       'constants %s' % c)
        return DiabolicalScan(list(CORNERS), [], True, grid_n, tol)

    refined, magnitudes = _refine_zeros(seeds, c, tol)
    zeros = refined[magnitudes < tol]
    logger.info('%d of %d seeds converged to zeros' % (len(zeros),
                                                      len(seeds)))
    pairs = cKDTree(zeros).query_pairs(1.5*np.sqrt(2)*spacing,
                                       output_type='ndarray')
    adjacency = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                           shape=(len(zeros), len(zeros)))
    n_components, labels = connected_components(adjacency, directed=False)
    points = list(CORNERS)
    curves = []
    for component in range(n_components):
        members = zeros[labels == component]
        extent = np.linalg.norm(np.ptp(members, axis=0))
        if extent > 2*spacing:
            curves.append(_polyline(members, spacing/4))
        else:
            point = _snap_to_corner(members.mean(axis=0))
            if point not in points:
                points.append(point)
    logger.info('Found %d isolated points and %d curves'
                % (len(points), len(curves)))
    return DiabolicalScan(points, curves, False, grid_n, tol)


def max_field(c, grid_n=101):
    """Return the maximizer of |B| over the unit square

    A grid search seeds a bounded L-BFGS-B ascent of |B|^2.

    Returns
    -------
    tuple
        (alpha, beta, magnitude) at the maximum.
    """
    c = drive_constants(c)
    grid = np.linspace(0, 1, grid_n)
    alphas, betas = np.meshgrid(grid, grid, indexing='ij')
    magnitudes = np.linalg.norm(field_vector(alphas, betas, c), axis=-1)
    i, j = np.unravel_index(np.argmax(magnitudes), magnitudes.shape)
    if magnitudes[i, j] == 0:
        return float(grid[i]), float(grid[j]), 0.0

    def objective(x):
        alpha, beta = np.clip(x, 0, 1)
        b = field_vector(alpha, beta, c)
        d_alpha, d_beta = field_gradient(alpha, beta, c)
        return -np.dot(b, b), -2*np.array([np.dot(b, d_alpha),
                                           np.dot(b, d_beta)])

    result = optimize.minimize(objective, [grid[i], grid[j]], jac=True,
                               method='L-BFGS-B', bounds=[(0, 1), (0, 1)])
    alpha, beta = np.clip(result.x, 0, 1)
    magnitude = float(np.linalg.norm(field_vector(alpha, beta, c)))
    if magnitude < magnitudes[i, j]:
        logger.warning('Local ascent did not improve on the grid maximum.')
        alpha, beta, magnitude = grid[i], grid[j], magnitudes[i, j]
    return float(alpha), float(beta), float(magnitude)


class InvariantSegment(object):
    """Field behaviour on one of the five invariant segments

    Attributes
    ----------
    name : str
        One of 'alpha=0', 'alpha=1', 'beta=0', 'beta=1', 'alpha=beta'.
    direction : numpy.ndarray or None
        Common unit direction, None for zero-field segments.
    zero_field : bool
        True if the field vanishes along the whole segment.
    amplitude : float
        A in |B| = A s (1 - s).
    fit_residual : float
        Largest deviation of |B| from the fitted profile.
    deviation : float
        Largest angle between sampled directions and the reference.
    """
    def __init__(self, name, direction, zero_field, amplitude, fit_residual,
                 deviation):
        self.name = name
        self.direction = direction
        self.zero_field = zero_field
        self.amplitude = amplitude
        self.fit_residual = fit_residual
        self.deviation = deviation

    def to_dict(self):
        return {'name': self.name,
                'direction': (None if self.direction is None
                              else self.direction.tolist()),
                'zero_field': self.zero_field,
                'amplitude': self.amplitude,
                'fit_residual': self.fit_residual,
                'deviation': self.deviation}


def invariant_segments(c, n_samples=33, tol=SEGMENT_TOL):
    """Return the field direction on the five invariant segments

    Parameters
    ----------
    c : array_like
        Drive constants.
    n_samples : Optional[int]
        Samples per segment including the two ends, which are skipped.
        Default: 33
    tol : Optional[float]
        Largest tolerated angular deviation in radians. Default: 1e-10

    Returns
    -------
    list of InvariantSegment

    Raises
    ------
    DirectionNotInvariantError
        If the direction changes along a segment for these constants.
    """
    c = drive_constants(c)
    s = np.linspace(0, 1, n_samples)[1:-1]
    profile = s*(1 - s)
    result = []
    for name, parameterization in SEGMENTS:
        field = field_vector(*parameterization(s), c=c)
        magnitudes = np.linalg.norm(field, axis=1)
        if np.all(magnitudes <= ZERO_FIELD_TOL):
            result.append(InvariantSegment(name, None, True, 0.0, 0.0, 0.0))
            continue
        reference = field[np.argmax(magnitudes)] / np.max(magnitudes)
        nonzero = magnitudes > ZERO_FIELD_TOL
        directions = field[nonzero] / magnitudes[nonzero, None]
        angles = np.arctan2(
            np.linalg.norm(np.cross(directions, reference), axis=1),
            directions @ reference)
        deviation = float(np.max(angles))
        if deviation > tol:
            raise DirectionNotInvariantError(name, deviation)
        amplitude = float(np.dot(magnitudes, profile) /
                          np.dot(profile, profile))
        residual = float(np.max(np.abs(magnitudes - amplitude*profile)))
        result.append(InvariantSegment(name, reference, False, amplitude,
                                       residual, deviation))
    return result


def segment_direction(segments, name):
    """Return the direction of the named segment from invariant_segments"""
    for segment in segments:
        if segment.name == name:
            return segment.direction
    raise ValueError('Unknown segment %s' % name)
