import numpy as np
import pytest

from afloat.operators import spin_half_operators
from afloat.protocol import StepProtocol, four_step_protocol, \
    partition_fractions, inclusion_exclusion_fractions, \
    alphas_from_fractions, generalized_protocol, single_parameter_protocol, \
    concatenate_protocols, shifted_protocol, potential_at, \
    fourier_component, fourier_components, fourier_quadrature, \
    fourier_series, zero_sum_check


sx, sy, sz = spin_half_operators()
potentials = [sx + sz, sy - sz, -sx + sy, -2*sy]


def test_four_step_fractions():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    assert np.allclose(protocol.fractions, [0, 0.15, 0.5, 0.85, 1])
    assert np.allclose(protocol.widths, [0.15, 0.35, 0.35, 0.15])
    assert len(protocol) == 4
    assert protocol.dim == 2


def test_four_step_out_of_range():
    with pytest.raises(ValueError):
        four_step_protocol(1.2, 0.5, *potentials)
    with pytest.raises(ValueError):
        four_step_protocol(0.5, np.nan, *potentials)


def test_protocol_validation():
    with pytest.raises(ValueError):
        StepProtocol([sx, sy], [0, 0.6, 0.4])
    with pytest.raises(ValueError):
        StepProtocol([sx, sy], [0.1, 0.5, 1])
    with pytest.raises(ValueError):
        StepProtocol([sx, np.eye(3)], [0, 0.5, 1])
    with pytest.raises(ValueError):
        StepProtocol([sx, sy], [0, 1])
    with pytest.raises(ValueError):
        StepProtocol([sx @ sy, sy], [0, 0.5, 1])


def test_protocol_is_read_only():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    with pytest.raises(ValueError):
        protocol.fractions[1] = 0.2
    with pytest.raises(ValueError):
        protocol.potentials[0][0, 0] = 1.0


def test_partition_fractions():
    rng = np.random.RandomState(7)
    for _ in range(20):
        alphas = list(rng.uniform(size=rng.randint(1, 6)))
        fractions = partition_fractions(alphas)
        assert np.allclose(fractions, inclusion_exclusion_fractions(alphas))
        assert np.all(np.diff(fractions) >= 0)
        assert np.allclose(alphas_from_fractions(fractions), alphas)


def test_partition_alpha_one():
    fractions = partition_fractions([0.4, 1.0, 0.3])
    assert np.allclose(fractions, [0, 0.4, 1, 1, 1])
    protocol = generalized_protocol([0.4, 1.0, 0.3], potentials)
    assert np.allclose(protocol.widths, [0.4, 0.6, 0, 0])
    assert np.allclose(alphas_from_fractions(fractions), [0.4, 1.0, 0.0])


def test_generalized_protocol_counts():
    with pytest.raises(ValueError):
        generalized_protocol([0.5], potentials)


def test_concatenation_gives_four_step():
    alpha, beta = 0.3, 0.7
    first = single_parameter_protocol(alpha, *potentials[:2])
    second = single_parameter_protocol(beta, *potentials[2:])
    combined = concatenate_protocols(first, second)
    reference = four_step_protocol(alpha, beta, *potentials)
    assert np.allclose(combined.fractions, reference.fractions)
    for a, b in zip(combined.potentials, reference.potentials):
        assert np.array_equal(a, b)


def test_shifted_protocol():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    shifted = shifted_protocol(protocol, 2)
    assert np.allclose(shifted.widths, [0.35, 0.15, 0.15, 0.35])
    assert np.array_equal(shifted.potentials[0], protocol.potentials[2])
    with pytest.raises(ValueError):
        shifted_protocol(protocol, 4)


def test_potential_at():
    protocol = four_step_protocol(0.0, 0.7, *potentials)
    # The first step has zero width and is never selected
    assert np.array_equal(potential_at(protocol, 0.0), potentials[1])
    assert np.array_equal(potential_at(protocol, 0.5), potentials[2])
    assert np.array_equal(potential_at(protocol, 0.9), potentials[3])
    with pytest.raises(ValueError):
        potential_at(protocol, 1.0)


def test_fourier_component_zero():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    expected = sum(w*v for w, v in zip(protocol.widths, potentials))
    assert np.allclose(fourier_component(protocol, 0), expected)


def test_fourier_conjugate_symmetry():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    for j in (1, 2, 5, 17):
        assert np.allclose(fourier_component(protocol, -j),
                           fourier_component(protocol, j).conj().T)


def test_fourier_against_quadrature():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    for j in (1, 3):
        exact = fourier_component(protocol, j)
        approx = fourier_quadrature(protocol, j, n_points=10**5)
        assert np.max(np.abs(exact - approx)) < 1e-6


def test_fourier_components_shape():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    components = fourier_components(protocol, [-2, 0, 3])
    assert components.shape == (3, 2, 2)
    assert np.allclose(components[2], fourier_component(protocol, 3))


def test_fourier_series_reconstructs_drive():
    protocol = four_step_protocol(0.3, 0.7, *potentials)
    for x in (0.07, 0.3, 0.65, 0.92):
        value = fourier_series(protocol, x, 2000)
        assert np.max(np.abs(value - potential_at(protocol, x))) < 1e-2


def test_zero_sum_check():
    assert zero_sum_check([sx, sy, -sx - sy])
    assert not zero_sum_check(potentials)
