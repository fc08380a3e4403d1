"""Adiabatic reports combining the geometry and the energy costs of a path.

A report collects the Berry phase, solid angle, loop count and invariant
crossings of a path together with its fast and slow energy costs.
"""
import logging
import numpy as np

from afloat.operators import normalized_state
from afloat.spin import drive_constants, rotor_hamiltonian, spectrum
from afloat.adiabatic.paths import invariant_crossings, path_length
from afloat.adiabatic.sphere import bloch_trajectory, berry_phase, \
    solid_angle, self_intersections, loop_count
from afloat.adiabatic.energy import delta_e_fast, delta_e_slow, \
    adiabatic_check, is_separated, ground_spinor


logger = logging.getLogger(__name__)


class AdiabaticReport(object):
    """Geometric and energetic summary of one parameter path

    Attributes
    ----------
    berry_phase : float or None
        Discrete geometric phase in (-pi, pi], None if the image is open.
    solid_angle : float or None
        Accumulated signed solid angle of the image loop.
    crossings : list of Crossing
        Contacts with the invariant segments.
    self_intersections : int
        Number of points where the image crosses itself.
    loop_count : int or None
        Number of loops traced on the sphere.
    delta_e_fast : float
        Expectation of the averaged potential at the fixed parameters.
    delta_e_slow : float
        Signed slow energy cost along the path.
    delta_e_slow_absolute : float
        Integral of the absolute slow integrand.
    """
    def __init__(self, path_name, constants, omega, averaging, state_mode,
                 berry_phase, solid_angle, crossings, self_intersections,
                 intersection_points, loop_count, delta_e_fast,
                 delta_e_slow, delta_e_slow_absolute, path_length,
                 samples, closed, rotor_energy, ground_energies):
        self.path_name = path_name
        self.constants = drive_constants(constants)
        self.omega = omega
        self.averaging = averaging
        self.state_mode = state_mode
        self.berry_phase = berry_phase
        self.solid_angle = solid_angle
        self.crossings = crossings
        self.self_intersections = self_intersections
        self.intersection_points = intersection_points
        self.loop_count = loop_count
        self.delta_e_fast = delta_e_fast
        self.delta_e_slow = delta_e_slow
        self.delta_e_slow_absolute = delta_e_slow_absolute
        self.path_length = path_length
        self.samples = samples
        self.closed = closed
        self.rotor_energy = rotor_energy
        self.ground_energies = ground_energies

    @property
    def ratio(self):
        return adiabatic_check(self)

    @property
    def separated(self):
        return is_separated(self.ratio)

    def phase_consistency(self):
        """Return the distance between berry_phase and -solid_angle / 2

        The distance is taken modulo 2 pi. None if the image is open.
        """
        if self.berry_phase is None:
            return None
        difference = self.berry_phase + self.solid_angle / 2
        return float(abs(np.angle(np.exp(1j * difference))))

    def to_dict(self):
        return {'path': self.path_name,
                'constants': self.constants.tolist(),
                'omega': self.omega,
                'averaging': self.averaging,
                'state_mode': self.state_mode,
                'berry_phase': self.berry_phase,
                'solid_angle': self.solid_angle,
                'phase_consistency': self.phase_consistency(),
                'crossings': [crossing.to_dict() for crossing
                              in self.crossings],
                'self_intersections': self.self_intersections,
                'intersection_points': [point.tolist() for point
                                        in self.intersection_points],
                'loop_count': self.loop_count,
                'delta_e_fast': self.delta_e_fast,
                'delta_e_slow': self.delta_e_slow,
                'delta_e_slow_absolute': self.delta_e_slow_absolute,
                'ratio': self.ratio,
                'separated': self.separated,
                'path_length': self.path_length,
                'samples': self.samples,
                'closed_on_sphere': self.closed,
                'rotor_energy': self.rotor_energy,
                'ground_energy_start': self.ground_energies[0],
                'ground_energy_end': self.ground_energies[1]}

    def __repr__(self):
        return 'AdiabaticReport(path=%s, loop_count=%s, berry_phase=%s)' % \
            (self.path_name, self.loop_count, self.berry_phase)


def analyze_path(path, c, omega=100.0, n=10**4, state_mode='ground',
                 state=None, averaging='paper', alpha0=None, beta0=None,
                 inertia=1.0, trajectory=None):
    """Return the full adiabatic analysis of a parameter path

    Parameters
    ----------
    path : ParameterPath
    c : array_like
        Drive constants.
    omega : Optional[float]
        Driving frequency. Default: 100.0
    n : Optional[int]
        Number of samples on the sphere. Default: 10000
    state_mode : Optional[str]
        'fixed' or 'ground' for the slow energy cost. Default: 'ground'
    state : Optional[array_like]
        Spinor used in 'fixed' mode and for the fast energy cost. If None,
        the ground state at (alpha0, beta0) is used.
    averaging : Optional[str]
        Averaging tag for the ground energies. Default: 'paper'
    alpha0, beta0 : Optional[float]
        Parameters of the fast cost. Default: the start of the path.
    inertia : Optional[float]
        Moment of inertia. Default: 1.0
    trajectory : Optional[BlochTrajectory]
        A trajectory already sampled for this path.

    Returns
    -------
    AdiabaticReport

    Raises
    ------
    NearDiabolicalError
        If the path passes too close to a degeneracy.
    """
    c = drive_constants(c)
    if trajectory is None:
        trajectory = bloch_trajectory(path, c, n=n, omega=omega)
    start = path.evaluate(path.tau_start)
    end = path.evaluate(path.tau_end)
    tau0 = None
    if alpha0 is None or beta0 is None:
        alpha0, beta0 = start
        tau0 = path.tau_start
    if state is None:
        state = ground_spinor(alpha0, beta0, c, tau=tau0)
    state = normalized_state(state)
    crossings = invariant_crossings(path)
    count, points = self_intersections(trajectory)
    if trajectory.closed:
        phase = berry_phase(trajectory)
        area = solid_angle(trajectory)
        loops = loop_count(path, trajectory)
    else:
        logger.warning('Image of path %s does not close on the sphere. '
                       'Phase, solid angle and loop count are skipped.'
                       % path.name)
        phase, area, loops = None, None, None
    fast = delta_e_fast(state, alpha0, beta0, c)
    slow_state = state if state_mode == 'fixed' else None
    slow = delta_e_slow(path, c, omega, state_mode=state_mode,
                        state=slow_state, n=n)
    slow_absolute = delta_e_slow(path, c, omega, state_mode=state_mode,
                                 state=slow_state, n=n, absolute=True)
    ground_energies = (spectrum(start[0], start[1], c, omega, inertia,
                                averaging=averaging)[0],
                       spectrum(end[0], end[1], c, omega, inertia,
                                averaging=averaging)[0])
    report = AdiabaticReport(
        path.name, c, omega, averaging, state_mode, phase, area, crossings,
        count, points, loops, fast, slow, slow_absolute, path_length(path),
        len(trajectory), trajectory.closed,
        float(rotor_hamiltonian(inertia)[0, 0].real), ground_energies)
    logger.info('Path %s: loop count %s, ratio %.3g'
                % (path.name, loops, report.ratio))
    return report
