import numpy as np
import pytest

from afloat.operators import decompose_spin
from afloat.protocol import fourier_component, zero_sum_check
from afloat.effective import paper_first_order, paper_kick
from afloat.spin import SyntheticField, NearDiabolicalError, \
    spin_potentials, spin_protocol, \
    field_vector, field_gradient, synthetic_field, kick_field, field_0101, \
    average_field, h_eff_from_field, spectrum, ground_state_energy, \
    band_surface, diabolical_scan, max_field, invariant_segments, \
    segment_direction, rotor_hamiltonian, drive_constants


unit = (1.0, 1.0, 1.0, 1.0)
corners = ((0, 0), (0, 1), (1, 0), (1, 1))


def test_potentials_sum_to_zero():
    rng = np.random.RandomState(11)
    for _ in range(10):
        assert zero_sum_check(spin_potentials(rng.normal(size=4)))


def test_drive_constants_validation():
    with pytest.raises(ValueError):
        drive_constants((1, 2, 3))
    with pytest.raises(ValueError):
        drive_constants((1, 2, 3, np.inf))


def test_field_at_quarter():
    field = synthetic_field(0.25, 0.25, unit)
    assert np.allclose(field.vector, [-0.375, -1.125, 0.375])
    assert abs(field.magnitude - 1.2437) < 5e-4


def test_field_vanishes_at_corners():
    rng = np.random.RandomState(12)
    for _ in range(100):
        c = rng.normal(size=4)
        for alpha, beta in corners:
            assert np.max(np.abs(field_vector(alpha, beta, c))) <= 1e-12


def test_field_matches_first_order_term():
    rng = np.random.RandomState(13)
    omega = 50.0
    for _ in range(20):
        alpha, beta = rng.uniform(size=2)
        c = rng.normal(size=4)
        term = paper_first_order(spin_protocol(alpha, beta, c), omega)
        expected = -np.pi / (8 * omega) * field_vector(alpha, beta, c)
        assert np.allclose(decompose_spin(term), expected, atol=1e-14)


def test_kick_field_matches_kick():
    rng = np.random.RandomState(14)
    omega = 50.0
    for _ in range(20):
        alpha, beta = rng.uniform(size=2)
        c = rng.normal(size=4)
        kick = paper_kick(spin_protocol(alpha, beta, c), omega)
        expected = -np.pi / (4 * omega) * kick_field(alpha, beta, c).vector
        assert np.allclose(decompose_spin(kick), expected, atol=1e-14)


def test_average_field():
    rng = np.random.RandomState(15)
    for _ in range(20):
        alpha, beta = rng.uniform(size=2)
        expected = 0.5 * np.array([alpha - beta, 1 - 2*alpha,
                                   3*beta - alpha - 1])
        assert np.allclose(average_field(alpha, beta, unit).vector, expected)
        c = rng.normal(size=4)
        average = fourier_component(spin_protocol(alpha, beta, c), 0)
        assert np.allclose(decompose_spin(average),
                           average_field(alpha, beta, c).vector)
    assert np.allclose(average_field(0.5, 0.5, unit).vector, 0)


def test_field_0101():
    rng = np.random.RandomState(16)
    for alpha, beta in rng.uniform(size=(20, 2)):
        assert np.allclose(field_0101(alpha, beta).vector,
                           field_vector(alpha, beta, (0, 1, 0, 1)))
    diagonal = np.linspace(0, 1, 1000)
    field = field_vector(diagonal, diagonal, (0, 1, 0, 1))
    assert np.max(np.linalg.norm(field, axis=1)) <= 1e-12


def test_field_gradient():
    rng = np.random.RandomState(17)
    h = 1e-6
    c = rng.normal(size=4)
    alpha, beta = 0.3, 0.7
    d_alpha, d_beta = field_gradient(alpha, beta, c)
    assert np.allclose(d_alpha, (field_vector(alpha + h, beta, c) -
                                 field_vector(alpha - h, beta, c)) / (2*h),
                       atol=1e-8)
    assert np.allclose(d_beta, (field_vector(alpha, beta + h, c) -
                                field_vector(alpha, beta - h, c)) / (2*h),
                       atol=1e-8)


def test_field_broadcasts():
    alphas = np.linspace(0, 1, 7)
    field = field_vector(alphas, 0.3, unit)
    assert field.shape == (7, 3)
    assert np.allclose(field[2], field_vector(alphas[2], 0.3, unit))


def test_synthetic_field_direction():
    field = SyntheticField([0.0, 3.0, 4.0])
    assert np.allclose(field.direction(), [0, 0.6, 0.8])
    assert field.to_dict()['magnitude'] == pytest.approx(5.0)
    with pytest.raises(ValueError):
        SyntheticField([0.0, 0.0, 0.0]).direction()
    with pytest.raises(ValueError):
        SyntheticField([1.0, 2.0])


def test_spectrum():
    omega = 100.0
    for alpha, beta in ((0.25, 0.25), (0.63, 0.38), (0.1, 0.9)):
        magnitude = synthetic_field(alpha, beta, unit).magnitude
        e_minus, e_plus = spectrum(alpha, beta, unit, omega)
        assert e_minus == pytest.approx(0.375 - np.pi / (16*omega) *
                                        magnitude, abs=1e-14)
        assert e_plus == pytest.approx(0.375 + np.pi / (16*omega) *
                                       magnitude, abs=1e-14)
        assert ground_state_energy(alpha, beta, unit, omega) == e_minus
        h = h_eff_from_field(alpha, beta, unit, omega)
        assert np.allclose(np.linalg.eigvalsh(h), [e_minus, e_plus])


def test_spectrum_corrected():
    alpha, beta, omega = 0.3, 0.7, 100.0
    e_minus, e_plus = spectrum(alpha, beta, unit, omega,
                               averaging='corrected')
    h = h_eff_from_field(alpha, beta, unit, omega, averaging='corrected')
    assert np.allclose(np.linalg.eigvalsh(h), [e_minus, e_plus])


def test_gapless_corner():
    e_minus, e_plus = spectrum(0, 0, unit, 100.0, inertia=2.0)
    assert e_minus == pytest.approx(3/16)
    assert e_plus == pytest.approx(3/16)
    with pytest.raises(ValueError):
        rotor_hamiltonian(0.0)


def test_band_surface():
    surface = band_surface(unit, grid_n=16, omega=100.0)
    assert surface.e_minus.shape == (16, 16)
    rows = surface.rows()
    assert len(rows) == 256
    alpha, beta, e_minus, e_plus, b_mag = rows[17]
    assert alpha == surface.grid[1] and beta == surface.grid[1]
    assert b_mag == pytest.approx(synthetic_field(alpha, beta,
                                                  unit).magnitude)
    assert e_minus == pytest.approx(spectrum(alpha, beta, unit, 100.0)[0])
    assert e_plus >= e_minus


def test_band_surface_thread_independent():
    serial = band_surface(unit, grid_n=24, n_jobs=1)
    threaded = band_surface(unit, grid_n=24, n_jobs=4)
    assert np.array_equal(serial.e_minus, threaded.e_minus)
    assert np.array_equal(serial.b_mag, threaded.b_mag)


def test_band_surface_maximum():
    surface = band_surface(unit, grid_n=101)
    alpha, beta = surface.argmax()
    assert abs(alpha - 0.63) <= 0.02
    assert abs(beta - 0.38) <= 0.02


def test_max_field():
    alpha, beta, magnitude = max_field(unit)
    assert abs(alpha - 0.63) <= 0.01
    assert abs(beta - 0.38) <= 0.01
    assert magnitude >= synthetic_field(0.25, 0.25, unit).magnitude


def test_scan_unit_constants():
    scan = diabolical_scan(unit, grid_n=32)
    assert not scan.degenerate
    assert sorted(scan.points) == sorted(corners)
    assert not scan.curves
    assert [row[1] for row in scan.rows()] == ['point'] * 4


def test_scan_diagonal_locus():
    scan = diabolical_scan((0, 1, 0, 1), grid_n=32)
    assert not scan.degenerate
    for corner in corners:
        assert corner in scan.points
    diagonal = [curve for curve in scan.curves
                if np.max(np.abs(curve[:, 0] - curve[:, 1])) < 1e-6]
    assert len(diagonal) == 1
    assert np.ptp(diagonal[0][:, 0]) > 0.9


def test_scan_degenerate():
    scan = diabolical_scan((0, 0, 0, 0), grid_n=16)
    assert scan.degenerate
    assert scan.to_dict()['degenerate']
    with pytest.raises(ValueError):
        diabolical_scan(unit, grid_n=8)


def test_invariant_segments():
    segments = invariant_segments(unit)
    expected = {'alpha=0': (3, -3, 1),
                'alpha=1': (-3, -5, -1),
                'beta=0': (-5, -3, 1),
                'beta=1': (1, -1, 3),
                'alpha=beta': (-2, -6, 2)}
    assert len(segments) == 5
    for segment in segments:
        direction = np.array(expected[segment.name], dtype=float)
        direction /= np.linalg.norm(direction)
        assert np.allclose(segment.direction, direction)
        assert segment.deviation <= 1e-10
        assert segment.fit_residual <= 1e-10
    assert np.allclose(segment_direction(segments, 'alpha=0'),
                       np.array([3, -3, 1]) / np.sqrt(19))
    with pytest.raises(ValueError):
        segment_direction(segments, 'alpha=2')


def test_invariant_segment_amplitude():
    segments = {segment.name: segment for segment in invariant_segments(unit)}
    assert segments['alpha=0'].amplitude == pytest.approx(np.sqrt(19))
    assert segments['alpha=beta'].amplitude == pytest.approx(np.sqrt(44))


def test_zero_field_segment():
    segments = {segment.name: segment
                for segment in invariant_segments((0, 1, 0, 1))}
    assert segments['alpha=beta'].zero_field
    assert segments['alpha=beta'].direction is None


def test_near_diabolical_message():
    error = NearDiabolicalError(0.125, 1e-10)
    assert '0.125' in str(error)
    assert isinstance(error, ValueError)
