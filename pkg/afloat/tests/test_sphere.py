import numpy as np
import pytest

from afloat.spin import NearDiabolicalError
from afloat.adiabatic.paths import builtin_path, reversed_path
from afloat.adiabatic.sphere import BlochTrajectory, OpenTrajectoryError, \
    bloch_trajectory, berry_phase, solid_angle, choose_reference, \
    self_intersections, loop_count


unit = (1.0, 1.0, 1.0, 1.0)


def _synthetic(directions):
    directions = np.asarray(directions, dtype=float)
    n = len(directions)
    return BlochTrajectory(np.linspace(0, 1, n), np.zeros(n), np.zeros(n),
                           directions, np.ones(n), unit, 100.0,
                           path_name='synthetic')


def _great_circle(start, end, n):
    angles = np.linspace(0, np.pi/2, n)
    return np.outer(np.cos(angles), start) + np.outer(np.sin(angles), end)


def _equator(turns, n):
    phi = np.linspace(0, 2*np.pi*turns, n)
    return np.column_stack([np.cos(phi), np.sin(phi), np.zeros(n)])


def test_equator():
    traj = _synthetic(_equator(1, 401))
    assert traj.closed
    assert abs(abs(berry_phase(traj)) - np.pi) < 1e-9
    assert solid_angle(traj) == pytest.approx(2*np.pi)
    assert np.allclose(choose_reference(traj.directions), [0, 0, 1])


def test_doubled_equator():
    traj = _synthetic(_equator(2, 801))
    assert solid_angle(traj) == pytest.approx(4*np.pi)
    assert abs(np.exp(1j*berry_phase(traj)) - 1) < 1e-9


def test_octant():
    x, y, z = np.eye(3)
    directions = np.vstack([_great_circle(x, y, 50)[:-1],
                            _great_circle(y, z, 50)[:-1],
                            _great_circle(z, x, 50)])
    traj = _synthetic(directions)
    assert traj.closed
    assert solid_angle(traj) == pytest.approx(np.pi/2)
    assert berry_phase(traj) == pytest.approx(-np.pi/4)
    backward = _synthetic(directions[::-1])
    assert solid_angle(backward) == pytest.approx(-np.pi/2)
    assert berry_phase(backward) == pytest.approx(np.pi/4)


def test_constant_trajectory():
    direction = np.array([1.0, 2.0, 2.0]) / 3
    traj = _synthetic(np.tile(direction, (20, 1)))
    assert berry_phase(traj) == pytest.approx(0, abs=1e-12)
    assert solid_angle(traj) == pytest.approx(0, abs=1e-12)


def test_gauge_invariance():
    traj = _synthetic(_equator(1, 201) * np.sqrt(0.75) + [0, 0, 0.5])
    before = berry_phase(traj)
    phases = np.random.RandomState(3).uniform(0, 2*np.pi, len(traj))
    traj.spinors = traj.spinors * np.exp(1j*phases)[:, None]
    assert berry_phase(traj) == pytest.approx(before, abs=1e-12)
    # Cap above latitude 30 degrees
    assert solid_angle(traj) == pytest.approx(np.pi, abs=1e-3)


def test_open_trajectory():
    traj = _synthetic(_equator(0.5, 50))
    assert not traj.closed
    with pytest.raises(OpenTrajectoryError) as error:
        berry_phase(traj)
    assert error.value.gap == pytest.approx(2.0)
    with pytest.raises(OpenTrajectoryError):
        solid_angle(traj)
    with pytest.raises(OpenTrajectoryError):
        loop_count(builtin_path('fig4b'), traj)


def test_trajectory_samples():
    path = builtin_path('fig4b')
    traj = bloch_trajectory(path, unit, n=501)
    assert len(traj) == 501
    assert np.allclose(np.linalg.norm(traj.directions, axis=1), 1)
    assert traj.closed
    assert len(traj.rows()) == 501
    assert len(traj.rows()[0]) == 6
    with pytest.raises(ValueError):
        bloch_trajectory(path, unit, omega=0)


@pytest.mark.parametrize('name', ['fig4a', 'fig4b', 'fig4c', 'fig5-long',
                                  'fig5-short'])
def test_phase_matches_solid_angle(name):
    traj = bloch_trajectory(builtin_path(name), unit, n=2001)
    assert traj.closed
    difference = berry_phase(traj) + solid_angle(traj) / 2
    assert abs(np.exp(1j*difference) - 1) < 1e-8


def test_loop_counts():
    expected = {'fig4a': 1, 'fig4b': 2, 'fig4c': 2, 'fig5-long': 2,
                'fig5-short': 1}
    for name, count in expected.items():
        path = builtin_path(name)
        traj = bloch_trajectory(path, unit, n=2001)
        assert loop_count(path, traj) == count, name


def test_self_intersections():
    expected = {'fig4a': 0, 'fig4b': 1, 'fig4c': 1}
    for name, count in expected.items():
        traj = bloch_trajectory(builtin_path(name), unit, n=4001)
        found, points = self_intersections(traj)
        assert found == count, name
        assert points.shape == (count, 3)


def test_fig4c_closes_on_sphere():
    path = builtin_path('fig4c')
    assert not path.closed
    traj = bloch_trajectory(path, unit, n=2001)
    assert traj.closed
    assert traj.gap <= 1e-9


def test_reversal_flips_solid_angle():
    path = builtin_path('fig5-short')
    forward = bloch_trajectory(path, unit, n=2001)
    backward = bloch_trajectory(reversed_path(path), unit, n=2001)
    assert solid_angle(backward) == pytest.approx(-solid_angle(forward),
                                                  abs=1e-9)


def test_diagonal_zero_line():
    with pytest.raises(NearDiabolicalError):
        bloch_trajectory(builtin_path('fig4b'), (0, 1, 0, 1), n=2001)


def test_field_along_x():
    traj = bloch_trajectory(builtin_path('fig5-short'), (0, 1, 0, 1), n=501)
    assert np.allclose(np.abs(traj.directions[:, 0]), 1)
    assert np.allclose(traj.directions, traj.directions[0])
    assert berry_phase(traj) == pytest.approx(0, abs=1e-12)
