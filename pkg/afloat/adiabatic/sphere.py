"""Images of parameter paths on the Bloch sphere.

The ground state of the first order Hamiltonian is the spinor aligned with
the synthetic field, so a path in the parameter square maps to a curve of
unit vectors n = B / |B|. This module samples that curve and computes its
geometric phase, enclosed solid angle, self intersections and loop count.
"""

import logging
import numpy as np
from scipy import optimize
from scipy.spatial import cKDTree
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from afloat.operators import aligned_spinor
from afloat.spin import DIABOLICAL_GUARD, NearDiabolicalError, \
    drive_constants, field_vector
from afloat.adiabatic.paths import sample_path, invariant_crossings


logger = logging.getLogger(__name__)

CLOSURE_TOL = 1e-9
REFERENCE_TOL = 1e-6
COINCIDENCE_TOL = 1e-9
IMAGE_MATCH_TOL = 1e-6


class OpenTrajectoryError(ValueError):
    """Raised when the image of a path does not close on the sphere"""
    def __init__(self, gap):
        self.gap = gap
        super(OpenTrajectoryError, self).__init__(
            'Bloch trajectory is not closed: first and last directions '
            'differ by %.3g.' % gap)


class ReferencePointError(RuntimeError):
    """Raised when no reference point stays away from a trajectory"""
    pass


class BlochTrajectory(object):
    """Sampled image of a parameter path on the Bloch sphere

    Parameters
    ----------
    taus, alphas, betas : numpy.ndarray
        Sampled path parameters and coordinates.
    directions : numpy.ndarray
        Unit field directions, shape (n, 3).
    magnitudes : numpy.ndarray
        Field magnitudes at the samples.
    constants : numpy.ndarray
        Drive constants used.
    omega : float
        Driving frequency used.
    path_name : Optional[str]
        Name of the parameter path.

    Attributes
    ----------
    spinors : numpy.ndarray
        Aligned ground spinors, shape (n, 2). The gauge is fixed per sample
        for readability only.
    closed : bool
        True if the first and last directions agree within 1e-9.
    """
    def __init__(self, taus, alphas, betas, directions, magnitudes,
                 constants, omega, path_name='custom'):
        self.taus = np.asarray(taus, dtype=float)
        self.alphas = np.asarray(alphas, dtype=float)
        self.betas = np.asarray(betas, dtype=float)
        self.directions = np.asarray(directions, dtype=float)
        self.magnitudes = np.asarray(magnitudes, dtype=float)
        self.constants = drive_constants(constants)
        self.omega = float(omega)
        self.path_name = path_name
        self.spinors = np.array([aligned_spinor(n) for n in self.directions])
        self.gap = float(np.linalg.norm(self.directions[-1] -
                                        self.directions[0]))
        self.closed = self.gap <= CLOSURE_TOL

    def __len__(self):
        return len(self.taus)

    def rows(self):
        """Return (tau, alpha, beta, nx, ny, nz) rows for export"""
        return [(tau, alpha, beta, n[0], n[1], n[2]) for tau, alpha, beta, n
                in zip(self.taus, self.alphas, self.betas, self.directions)]

    def __repr__(self):
        return 'BlochTrajectory(path=%s, samples=%d, closed=%s)' % \
            (self.path_name, len(self), self.closed)


def _check_between_samples(path, taus, field, c, guard):
    # A sign flip of B between two samples means a zero was stepped over
    flips = np.flatnonzero(np.sum(field[:-1] * field[1:], axis=1) < 0)
    for k in flips:
        def squared_magnitude(tau):
            return float(np.sum(field_vector(*path.evaluate(tau), c=c)**2))
        result = optimize.minimize_scalar(
            squared_magnitude, bounds=(taus[k], taus[k + 1]),
            method='bounded', options={'xatol': 1e-14})
        magnitude = np.sqrt(max(result.fun, 0.0))
        if magnitude < guard:
            raise NearDiabolicalError(float(result.x), magnitude, guard)


def bloch_trajectory(path, c, n=10**4, omega=100.0, guard=DIABOLICAL_GUARD):
    """Return the Bloch sphere image of a parameter path

    Parameters
    ----------
    path : ParameterPath
    c : array_like
        Drive constants.
    n : Optional[int]
        Number of samples. Default: 10000
    omega : Optional[float]
        Driving frequency, recorded with the trajectory. Default: 100.0
    guard : Optional[float]
        Smallest field magnitude that defines a direction. Default: 1e-8

    Returns
    -------
    BlochTrajectory

    Raises
    ------
    NearDiabolicalError
        If |B| drops below guard at a sample or between two samples.
    """
    if not np.isfinite(omega) or omega <= 0:
        raise ValueError('omega must be positive, got %r' % omega)
    c = drive_constants(c)
    samples = sample_path(path, n)
    taus, alphas, betas = samples.T
    field = field_vector(alphas, betas, c)
    magnitudes = np.linalg.norm(field, axis=1)
    weak = np.flatnonzero(magnitudes < guard)
    if weak.size:
        k = weak[0]
        raise NearDiabolicalError(float(taus[k]), float(magnitudes[k]), guard)
    _check_between_samples(path, taus, field, c, guard)
    directions = field / magnitudes[:, None]
    logger.info('Sampled %d directions along path %s' % (len(taus),
                                                         path.name))
    return BlochTrajectory(taus, alphas, betas, directions, magnitudes, c,
                           omega, path_name=path.name)


def _require_closed(traj):
    if not traj.closed:
        raise OpenTrajectoryError(traj.gap)


def _wrap_phase(x):
    """Map x into (-pi, pi]"""
    return float(np.pi - np.mod(np.pi - x, 2*np.pi))


def berry_phase(traj):
    """Return the discrete geometric phase of a closed trajectory

    The phase is -arg prod_k <chi_k|chi_k+1>, the product running over the
    closed loop of sampled spinors. It does not depend on the phase chosen
    for each spinor.

    Parameters
    ----------
    traj : BlochTrajectory

    Returns
    -------
    float
        Phase in (-pi, pi].

    Raises
    ------
    OpenTrajectoryError
        If the trajectory does not close on the sphere.
    """
    _require_closed(traj)
    spinors = traj.spinors
    overlaps = np.sum(spinors[:-1].conj() * spinors[1:], axis=1)
    closing = np.vdot(spinors[-1], spinors[0])
    total = np.sum(np.angle(overlaps)) + np.angle(closing)
    return _wrap_phase(-total)


def _reference_candidates(directions):
    mean = directions.mean(axis=0)
    norm = np.linalg.norm(mean)
    candidates = []
    if norm > 1e-8:
        candidates.extend([mean / norm, -mean / norm])
    for axis in np.eye(3):
        candidates.extend([axis, -axis])
    return candidates


def choose_reference(directions):
    """Return a unit vector whose antipode stays far from the directions

    Raises
    ------
    ReferencePointError
        If every candidate has its antipode on the trajectory.
    """
    best, best_clearance = None, -np.inf
    for candidate in _reference_candidates(directions):
        clearance = np.min(1 + directions @ candidate)
        if clearance > best_clearance:
            best, best_clearance = candidate, clearance
    if best_clearance < REFERENCE_TOL:
        raise ReferencePointError('No reference point clears the '
                                  'trajectory (best clearance %.3g).'
                                  % best_clearance)
    logger.debug('Solid angle reference %s, clearance %.3g'
                 % (np.array2string(best, precision=4), best_clearance))
    return best


def _triangle_areas(reference, a, b):
    numerator = np.einsum('ij,j->i', np.cross(a, b), reference)
    denominator = 1 + a @ reference + np.sum(a * b, axis=1) + b @ reference
    return 2 * np.arctan2(numerator, denominator)


def solid_angle(traj):
    """Return the signed solid angle enclosed by a closed trajectory

    Consecutive samples are joined by geodesic arcs and the signed areas of
    the triangles they span with a reference point are summed. A loop wound
    twice accumulates twice its area instead of being reduced mod 4 pi.

    Parameters
    ----------
    traj : BlochTrajectory

    Returns
    -------
    float

    Raises
    ------
    OpenTrajectoryError
        If the trajectory does not close on the sphere.
    ReferencePointError
        If no reference point can be found.
    """
    _require_closed(traj)
    directions = traj.directions
    reference = choose_reference(directions)
    loop = np.vstack([directions, directions[:1]])
    return float(np.sum(_triangle_areas(reference, loop[:-1], loop[1:])))


def _loop_vertices(traj):
    directions = traj.directions
    if traj.closed:
        directions = directions[:-1]
    return directions


def _arc_positions(vertices, closed):
    chords = np.linalg.norm(np.diff(vertices, axis=0), axis=1)
    if closed:
        closing = np.linalg.norm(vertices[0] - vertices[-1])
        chords = np.append(chords, closing)
    positions = np.concatenate([[0.0], np.cumsum(chords)])
    return positions, chords


def _arc_separation(positions, total, i, j, closed):
    separation = np.abs(positions[i] - positions[j])
    if closed:
        separation = np.minimum(separation, total - separation)
    return separation


def _on_arc(t, start, end, normal):
    return ((np.sum(np.cross(start, t) * normal, axis=1) >= 0) &
            (np.sum(np.cross(t, end) * normal, axis=1) >= 0))


def _arc_intersections(a, b, c, d):
    """Return intersection points of the geodesic arcs ab and cd, or NaN"""
    p = np.cross(a, b)
    q = np.cross(c, d)
    line = np.cross(p, q)
    norms = np.linalg.norm(line, axis=1)
    result = np.full(a.shape, np.nan)
    valid = norms > 1e-15
    line[valid] /= norms[valid, None]
    for sign in (1.0, -1.0):
        t = sign * line
        hit = valid & _on_arc(t, a, b, p) & _on_arc(t, c, d, q)
        result[hit] = t[hit]
    return result


def _components(n_points, pairs):
    """Return (count, labels) of the graph on n_points with the given edges"""
    pairs = np.asarray(pairs, dtype=int).reshape(-1, 2)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])),
                       shape=(n_points, n_points))
    return connected_components(graph, directed=False)


def _cluster(points, radius):
    if len(points) == 0:
        return np.zeros((0, 3))
    pairs = cKDTree(points).query_pairs(radius, output_type='ndarray')
    n_components, labels = _components(len(points), pairs)
    centers = []
    for label in range(n_components):
        center = points[labels == label].mean(axis=0)
        centers.append(center / np.linalg.norm(center))
    return np.array(centers)


def self_intersections(traj):
    """Return the points where the sampled image crosses itself

    Non-adjacent geodesic chords of the sampled curve are tested for
    intersection, and distinct samples landing on the same point are
    counted as well. Chords closer along the curve than fifty times the
    longest chord are treated as adjacent. Hits closer than three chord
    lengths are merged into one point.

    Parameters
    ----------
    traj : BlochTrajectory

    Returns
    -------
    count : int
        Number of distinct self intersection points.
    points : numpy.ndarray
        The points, shape (count, 3).
    """
    closed = traj.closed
    vertices = _loop_vertices(traj)
    positions, chords = _arc_positions(vertices, closed)
    total = positions[-1]
    if len(chords) == 0:
        return 0, np.zeros((0, 3))
    max_chord = float(np.max(chords))
    window = max(50 * max_chord, 1e-3)
    ends = np.arange(1, len(chords) + 1) % len(vertices)
    starts = vertices[:len(chords)]
    stops = vertices[ends]
    midpoints = (starts + stops) / 2
    hits = []
    pairs = cKDTree(midpoints).query_pairs(1.01 * max_chord,
                                           output_type='ndarray')
    if len(pairs):
        far = _arc_separation(positions, total, pairs[:, 0], pairs[:, 1],
                              closed) > window
        pairs = pairs[far]
    if len(pairs):
        points = _arc_intersections(starts[pairs[:, 0]], stops[pairs[:, 0]],
                                    starts[pairs[:, 1]], stops[pairs[:, 1]])
        hits.append(points[~np.isnan(points[:, 0])])
    coincident = cKDTree(vertices).query_pairs(COINCIDENCE_TOL,
                                               output_type='ndarray')
    if len(coincident):
        far = _arc_separation(positions, total, coincident[:, 0],
                              coincident[:, 1], closed) > window
        hits.append(vertices[coincident[far, 0]])
    hits = np.vstack(hits) if hits else np.zeros((0, 3))
    points = _cluster(hits, 3 * max_chord)
    logger.debug('Found %d self intersections from %d raw hits'
                 % (len(points), len(hits)))
    return len(points), points


def _merge_closure_contacts(path, crossings):
    # Contacts at both ends of an open path are the same point of the loop
    if path.closed or len(crossings) < 2:
        return crossings
    first, last = crossings[0], crossings[-1]
    if (abs(first.tau - path.tau_start) <= 1e-9 and
            abs(last.tau - path.tau_end) <= 1e-9 and
            first.segment == last.segment):
        return crossings[:-1]
    return crossings


def loop_count(path, traj, n=2001):
    """Return the number of loops the image traces for one traversal

    Every contact of the path with an invariant segment maps to the fixed
    direction of that segment. Contacts whose images coincide pinch the
    image, and each coincidence beyond the first at one point adds a loop.

    Parameters
    ----------
    path : ParameterPath
    traj : BlochTrajectory
        Image of path, used for the closure check and drive constants.
    n : Optional[int]
        Samples used to locate the contacts. Default: 2001

    Returns
    -------
    int

    Raises
    ------
    OpenTrajectoryError
        If the trajectory does not close on the sphere.
    """
    _require_closed(traj)
    crossings = _merge_closure_contacts(path, invariant_crossings(path, n))
    if not crossings:
        return 1
    field = field_vector(np.array([x.alpha for x in crossings]),
                         np.array([x.beta for x in crossings]),
                         traj.constants)
    magnitudes = np.linalg.norm(field, axis=1)
    images = field[magnitudes > 0] / magnitudes[magnitudes > 0, None]
    pairs = cKDTree(images).query_pairs(IMAGE_MATCH_TOL,
                                        output_type='ndarray')
    n_components, _ = _components(len(images), pairs)
    extra = len(images) - n_components
    logger.debug('Path %s: %d contacts, %d coincident images'
                 % (path.name, len(crossings), extra))
    return 1 + extra
