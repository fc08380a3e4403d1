import numpy as np
import pytest

from afloat.spin import NearDiabolicalError, field_vector, spectrum
from afloat.adiabatic.paths import builtin_path, path_from_spec
from afloat.adiabatic.energy import delta_e_fast, delta_e_slow, \
    slow_fields, slow_integrand, ground_spinor, energy_ratio, is_separated, \
    adiabatic_check
from afloat.adiabatic.report import analyze_path


unit = (1.0, 1.0, 1.0, 1.0)
up = np.array([1.0, 0.0])
omega = 100.0

line = path_from_spec({'name': 'line',
                       'segments': [{'tau': [0, 1],
                                     'alpha': [['poly', [0.2, 0.4]]],
                                     'beta': [['poly', [0.3, 0.2]]]}]})


def test_fast_cost():
    assert delta_e_fast(up, 0.0, 0.0, unit) == pytest.approx(-0.25)
    assert delta_e_fast(up, 0.5, 0.5, unit) == pytest.approx(0, abs=1e-15)
    down = np.array([0.0, 1.0])
    assert delta_e_fast(down, 0.0, 0.0, unit) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        delta_e_fast([1.0, 1.0], 0.0, 0.0, unit)


def test_slow_fields():
    h = 1e-5
    field_1, field_2 = slow_fields(0.3, 0.7, unit, omega)
    scale = -np.pi / (8 * omega)
    difference_1 = scale * (field_vector(0.3 + h, 0.7, unit) -
                            field_vector(0.3 - h, 0.7, unit)) / (2*h)
    difference_2 = scale * (field_vector(0.3, 0.7 + h, unit) -
                            field_vector(0.3, 0.7 - h, unit)) / (2*h)
    assert np.allclose(field_1, difference_1, rtol=1e-7, atol=0)
    assert np.allclose(field_2, difference_2, rtol=1e-7, atol=0)
    with pytest.raises(ValueError):
        slow_fields(0.3, 0.7, unit, -1.0)


@pytest.mark.parametrize('name', ['fig4a', 'fig4b', 'fig5-long'])
def test_fixed_state_closed_loop(name):
    value = delta_e_slow(builtin_path(name), unit, omega,
                         state_mode='fixed', state=up)
    assert abs(value) < 1e-10


def test_fixed_state_open_path():
    # The integrand is an exact derivative along the path
    path = builtin_path('fig4c')
    value = delta_e_slow(path, unit, omega, state_mode='fixed', state=up)
    change = field_vector(0.75, 0.75, unit) - field_vector(0.25, 0.25, unit)
    expected = -np.pi / (8 * omega) * change @ np.array([0, 0, 0.5])
    assert value == pytest.approx(expected, abs=1e-12)
    assert delta_e_slow(line, unit, omega, state_mode='fixed',
                        state=up, absolute=True) >= abs(
        delta_e_slow(line, unit, omega, state_mode='fixed', state=up))


def test_ground_state_straight_line():
    value = delta_e_slow(line, unit, omega, state_mode='ground')
    expected = spectrum(0.6, 0.5, unit, omega)[0] - \
        spectrum(0.2, 0.3, unit, omega)[0]
    assert value == pytest.approx(expected, rel=1e-8)


def test_ground_state_closed_loop():
    value = delta_e_slow(builtin_path('fig4b'), unit, omega,
                         state_mode='ground')
    assert abs(value) < 1e-10


def test_ground_state_at_corner():
    path = path_from_spec({'segments': [{'tau': [0, 1],
                                         'alpha': [['poly', [0.0]]],
                                         'beta': [['poly', [0.0, 1.0]]]}]})
    with pytest.raises(NearDiabolicalError):
        delta_e_slow(path, unit, omega, state_mode='ground')
    # A fixed state does not need a direction
    delta_e_slow(path, unit, omega, state_mode='fixed', state=up)


def test_integrand_validation():
    taus = np.linspace(0.1, 0.9, 5)
    with pytest.raises(ValueError):
        slow_integrand(line, unit, omega, taus, state_mode='fixed')
    with pytest.raises(ValueError):
        slow_integrand(line, unit, omega, taus, state_mode='mixed')
    assert slow_integrand(line, unit, omega, taus,
                          state_mode='ground').shape == (5,)


def test_ground_spinor():
    spinor = ground_spinor(0.25, 0.25, unit)
    field = field_vector(0.25, 0.25, unit)
    spin = np.array([np.vdot(spinor, op @ spinor).real for op in (
        np.array([[0, 1], [1, 0]]) / 2,
        np.array([[0, -1j], [1j, 0]]) / 2,
        np.array([[1, 0], [0, -1]]) / 2)])
    assert np.allclose(spin, field / np.linalg.norm(field) / 2)
    with pytest.raises(NearDiabolicalError) as error:
        ground_spinor(0.0, 0.0, unit)
    assert error.value.tau is None
    assert error.value.point == (0.0, 0.0)
    assert '(alpha, beta) = (0, 0)' in str(error.value)
    with pytest.raises(NearDiabolicalError) as error:
        ground_spinor(1.0, 0.5, (1, 0, 0, 0), tau=0.0)
    assert error.value.tau == 0.0
    assert error.value.magnitude == 0.0


def test_energy_ratio():
    assert energy_ratio(2.0, -0.5) == pytest.approx(4.0)
    assert energy_ratio(1e-3, 0.0) == pytest.approx(1e9)
    assert is_separated(10.0)
    assert not is_separated(9.99)


@pytest.mark.slow
def test_analyze_circle():
    report = analyze_path(builtin_path('fig4b'), unit, n=2001)
    assert report.loop_count == 2
    assert report.closed
    assert report.phase_consistency() < 1e-8
    assert abs(report.delta_e_slow) < 1e-10
    assert report.ratio == pytest.approx(adiabatic_check(report))
    assert adiabatic_check(report, measure='absolute') > report.ratio
    with pytest.raises(ValueError):
        adiabatic_check(report, measure='relative')
    payload = report.to_dict()
    for key in ('path', 'berry_phase', 'solid_angle', 'crossings',
                'self_intersections', 'loop_count', 'delta_e_fast',
                'delta_e_slow', 'ratio', 'separated', 'closed_on_sphere'):
        assert key in payload
    assert payload['path'] == 'fig4b'
    assert len(payload['crossings']) == 6
    assert payload['rotor_energy'] == pytest.approx(0.375)


def test_analyze_fixed_state():
    report = analyze_path(builtin_path('fig5-short'), unit, n=501,
                          state_mode='fixed', state=up, alpha0=0.0,
                          beta0=0.0)
    assert report.delta_e_fast == pytest.approx(-0.25)
    assert abs(report.delta_e_slow) < 1e-10
    assert report.loop_count == 1
    assert report.ratio < 1e-8
    assert not report.separated
