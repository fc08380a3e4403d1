import os
import json
import uuid
import shutil
import numpy as np
import pytest

from afloat.locations import SCRATCH_PATH
from afloat.config import DEFAULTS, RunConfig, ConfigError, load_config


def test_defaults():
    config = RunConfig.from_dict()
    assert config.omega == 100.0
    assert config.grid_n == 128
    assert config.samples == 10**4
    assert config.state == 'ground'
    assert config.averaging == 'paper'
    assert config.path().name == 'fig4b'
    assert np.allclose(config.constants, [1, 1, 1, 1])
    assert np.allclose(config.state_vector, [1, 0])
    protocol = config.protocol()
    assert np.allclose(protocol.fractions, [0, 0.15, 0.5, 0.85, 1])
    # Defaults are not shared between configurations
    config.settings['verify']['trials'] = 1
    assert DEFAULTS['verify']['trials'] == 256


def test_nested_merge():
    config = RunConfig.from_dict({'verify': {'trials': 8}})
    assert config.verify['trials'] == 8
    assert config.verify['omegas'] == [50.0, 100.0, 200.0]


def test_unknown_entry():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'omgea': 10.0})
    with pytest.raises(ConfigError):
        RunConfig.from_dict([1, 2])
    with pytest.raises(ConfigError):
        RunConfig.from_dict({'verify': {'checks': ['A10']}})


@pytest.mark.parametrize('overrides', [
    {'omega': -1.0},
    {'omega': 'fast'},
    {'grid_n': 12.5},
    {'samples': 1},
    {'n_jobs': 0},
    {'averaging': 'exact'},
    {'state': 'excited'},
    {'alpha0': 1.5},
    {'state_vector': [[1.0, 0.0], [1.0, 0.0]]},
    {'seed': 0.5},
    {'path': 'fig6'},
    {'protocol': {'type': 'three-step'}},
    {'protocol': {'type': 'four-step', 'alpha': 0.3, 'beta': 0.7,
                  'potentials': 'spin-c', 'constants': [1, 1, 1]}},
    {'protocol': {'type': 'four-step', 'alpha': 1.3, 'beta': 0.7,
                  'potentials': 'spin-c', 'constants': [1, 1, 1, 1]}},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(overrides)


def test_generalized_protocol():
    rows = [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [-0.5, 0.0]]]
    config = RunConfig.from_dict({'protocol': {
        'type': 'generalized', 'alphas': [0.5], 'potentials': [rows, rows]}})
    protocol = config.protocol()
    assert protocol.n_steps == 2
    assert np.allclose(protocol.potentials[0], np.diag([0.5, -0.5]))
    with pytest.raises(ConfigError):
        config.constants
    bad = RunConfig.from_dict({'protocol': {
        'type': 'four-step', 'alpha': 0.5, 'beta': 0.5,
        'potentials': [rows, rows]}})
    with pytest.raises(ConfigError):
        bad.protocol()


def test_custom_path():
    spec = {'name': 'line', 'segments': [{'tau': [0, 1],
                                          'alpha': [['poly', [0.2, 0.4]]],
                                          'beta': [['poly', [0.3]]]}]}
    config = RunConfig.from_dict({'path': spec})
    assert config.path().name == 'line'


def test_updated():
    config = RunConfig.from_dict()
    changed = config.updated(grid_n=16, omega=None)
    assert changed.grid_n == 16
    assert changed.omega == 100.0
    assert config.grid_n == 128
    with pytest.raises(ConfigError):
        config.updated(grid_n=0)


def test_config_hash():
    config = RunConfig.from_dict()
    assert len(config.config_hash()) == 32
    assert config.config_hash() == RunConfig.from_dict().config_hash()
    assert config.updated(out='/tmp/elsewhere', n_jobs=4).config_hash() == \
        config.config_hash()
    assert config.updated(omega=50.0).config_hash() != config.config_hash()
    metadata = config.metadata('bands', grid_n=128)
    assert metadata['command'] == 'bands'
    assert metadata['config_hash'] == config.config_hash()
    assert metadata['grid_n'] == 128


def test_load_config():
    temp_dir = os.path.join(SCRATCH_PATH, uuid.uuid4().hex)
    os.makedirs(temp_dir)
    try:
        good = os.path.join(temp_dir, 'good.json')
        with open(good, 'w') as f:
            json.dump({'omega': 50.0, 'path': 'fig4a'}, f)
        config = load_config(good)
        assert config.omega == 50.0
        assert config.path().name == 'fig4a'
        broken = os.path.join(temp_dir, 'broken.json')
        with open(broken, 'w') as f:
            f.write('{"omega": ')
        with pytest.raises(ConfigError):
            load_config(broken)
        with pytest.raises(OSError):
            load_config(os.path.join(temp_dir, 'missing.json'))
    finally:
        shutil.rmtree(temp_dir)
