import numpy as np
import pytest

from afloat.config import RunConfig
from afloat.verify import run_checks, random_hermitian, \
    random_zero_sum_potentials, convergence_order, CHECK_FUNCTIONS
from afloat.adiabatic.paths import builtin_path


def _run(**overrides):
    return run_checks(RunConfig.from_dict(overrides))


def test_random_inputs():
    rng = np.random.RandomState(0)
    h = random_hermitian(rng, dim=3)
    assert np.allclose(h, h.conj().T)
    potentials = random_zero_sum_potentials(rng, n=5)
    assert len(potentials) == 5
    assert np.allclose(sum(potentials), 0)


def test_check_names():
    assert sorted(CHECK_FUNCTIONS) == ['A%d' % k for k in range(1, 10)]


def test_anchor_checks():
    report = _run(verify={'checks': ['A4', 'A5', 'A9']})
    assert [result['name'] for result in report['checks']] == \
        ['A4', 'A5', 'A9']
    assert report['passed']
    for result in report['checks']:
        assert result['passed']
        assert result['residual'] <= result['threshold']
    anchors = report['checks'][0]['details']
    assert anchors['quarter_magnitude'] == pytest.approx(1.2437, abs=5e-4)


def test_configured_protocol_summary():
    report = _run(verify={'checks': ['A5']}, j_max_h1=500, j_max_kick=1000)
    summary = report['configured_protocol']
    assert summary['n_steps'] == 4
    assert summary['fractions'] == pytest.approx([0, 0.15, 0.5, 0.85, 1])
    assert 'spectral_distance' in summary['truncation']
    assert 'spectral_distance' in summary['oracle']


def test_reproducible():
    first = _run(verify={'checks': ['A1'], 'trials': 4})
    second = _run(verify={'checks': ['A1'], 'trials': 4})
    assert first['checks'][0]['residual'] == second['checks'][0]['residual']


def test_short_truncation_fails():
    report = _run(j_max_h1=10, verify={'checks': ['A1'], 'trials': 4})
    assert not report['passed']
    assert report['checks'][0]['residual'] > 1e-6


@pytest.mark.slow
def test_all_checks():
    report = _run(verify={'trials': 32})
    failed = [result['name'] for result in report['checks']
              if not result['passed']]
    assert not failed
    assert len(report['checks']) == 9


def test_convergence_order():
    order = convergence_order(builtin_path('fig4b'), (1, 1, 1, 1))
    assert order >= 1.9


@pytest.mark.slow
def test_geometric_phase_orders():
    report = _run(verify={'checks': ['A6']})
    details = report['checks'][0]['details']
    assert sorted(details['convergence_orders']) == \
        ['fig4a', 'fig4b', 'fig4c']
    assert report['checks'][0]['passed']
