"""Run configuration for the command line tools.

A configuration is read from a JSON file, missing entries are filled from
DEFAULTS and command line flags are applied on top. The resolved
configuration is hashed so that every output file records exactly what
produced it.
"""

import copy
import json
import logging
import numbers
import numpy as np
from hashlib import md5

from afloat import __version__
from afloat.protocol import four_step_protocol, generalized_protocol
from afloat.spin import spin_potentials
from afloat.adiabatic.paths import path_from_spec


logger = logging.getLogger(__name__)

STATE_MODES = ('fixed', 'ground')
AVERAGINGS = ('paper', 'corrected')
CHECKS = ('A1', 'A2', 'A3', 'A4', 'A5', 'A6', 'A7', 'A8', 'A9')

DEFAULTS = {
    'protocol': {'type': 'four-step', 'alpha': 0.3, 'beta': 0.7,
                 'potentials': 'spin-c', 'constants': [1.0, 1.0, 1.0, 1.0]},
    'omega': 100.0,
    'inertia': 1.0,
    'grid_n': 128,
    'samples': 10**4,
    'averaging': 'paper',
    'state': 'ground',
    'state_vector': [[1.0, 0.0], [0.0, 0.0]],
    'alpha0': None,
    'beta0': None,
    'path': 'fig4b',
    'j_max_h1': 2000,
    'j_max_kick': 10**4,
    'scan_tol': 1e-10,
    'n_jobs': 1,
    'seed': 0,
    'verify': {'trials': 256, 'omegas': [50.0, 100.0, 200.0],
               'checks': list(CHECKS)},
    'out': None,
}

# Entries that change where or how fast a run goes but not its results
UNHASHED = ('out', 'n_jobs')


class ConfigError(ValueError):
    """Raised when a configuration cannot be parsed or is invalid"""
    pass


def _merge(defaults, overrides):
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) \
                and key != 'protocol':
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _positive(name, value, integer=False):
    kind = numbers.Integral if integer else numbers.Real
    if isinstance(value, bool) or not isinstance(value, kind) or \
            not np.isfinite(value) or value <= 0:
        raise ConfigError('%s must be a positive %s, got %r'
                          % (name, 'integer' if integer else 'number',
                             value))


def _unit_interval(name, value):
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or \
            not 0 <= value <= 1:
        raise ConfigError('%s must lie in [0, 1], got %r' % (name, value))


def complex_matrix(rows):
    """Return a complex matrix from rows of [re, im] pairs"""
    try:
        matrix = np.array([[complex(re, im) for re, im in row]
                           for row in rows])
    except (TypeError, ValueError):
        raise ConfigError('Matrices must be given as rows of [re, im] '
                          'pairs.')
    return matrix


def complex_vector(entries):
    """Return a complex vector from a list of [re, im] pairs"""
    try:
        return np.array([complex(re, im) for re, im in entries])
    except (TypeError, ValueError):
        raise ConfigError('Vectors must be given as lists of [re, im] '
                          'pairs.')


class RunConfig(object):
    """A resolved and validated run configuration

    Parameters
    ----------
    settings : dict
        Complete settings, normally produced by from_dict.

    Raises
    ------
    ConfigError
        If a setting has the wrong type or range, or a name is unknown.
    """
    def __init__(self, settings):
        self.settings = settings
        self._validate()

    @classmethod
    def from_dict(cls, overrides=None):
        """Return a config from DEFAULTS updated with overrides"""
        overrides = overrides or {}
        if not isinstance(overrides, dict):
            raise ConfigError('A configuration must be a JSON object.')
        unknown = sorted(set(overrides) - set(DEFAULTS))
        if unknown:
            raise ConfigError('Unknown configuration entries: %s'
                              % ', '.join(unknown))
        return cls(_merge(DEFAULTS, overrides))

    def updated(self, **overrides):
        """Return a copy with the given non-None entries replaced"""
        overrides = {key: value for key, value in overrides.items()
                     if value is not None}
        settings = copy.deepcopy(self.settings)
        settings.update(overrides)
        return RunConfig(settings)

    def __getattr__(self, name):
        settings = self.__dict__.get('settings', {})
        if name in settings:
            return settings[name]
        raise AttributeError(name)

    def _validate(self):
        s = self.settings
        _positive('omega', s['omega'])
        _positive('inertia', s['inertia'])
        _positive('grid_n', s['grid_n'], integer=True)
        _positive('samples', s['samples'], integer=True)
        _positive('j_max_h1', s['j_max_h1'], integer=True)
        _positive('j_max_kick', s['j_max_kick'], integer=True)
        _positive('scan_tol', s['scan_tol'])
        _positive('n_jobs', s['n_jobs'], integer=True)
        if s['samples'] < 2:
            raise ConfigError('samples must be at least 2.')
        if s['averaging'] not in AVERAGINGS:
            raise ConfigError('averaging must be one of %s, got %r'
                              % (', '.join(AVERAGINGS), s['averaging']))
        if s['state'] not in STATE_MODES:
            raise ConfigError('state must be one of %s, got %r'
                              % (', '.join(STATE_MODES), s['state']))
        for name in ('alpha0', 'beta0'):
            if s[name] is not None:
                _unit_interval(name, s[name])
        state = self.state_vector
        if state.shape != (2,) or abs(np.linalg.norm(state) - 1) > 1e-10:
            raise ConfigError('state_vector must be a normalized spinor.')
        verify = s['verify']
        _positive('verify.trials', verify['trials'], integer=True)
        if not verify['omegas']:
            raise ConfigError('verify.omegas must not be empty.')
        for omega in verify['omegas']:
            _positive('verify.omegas', omega)
        unknown = sorted(set(verify['checks']) - set(CHECKS))
        if unknown:
            raise ConfigError('Unknown checks: %s' % ', '.join(unknown))
        if not isinstance(s['seed'], numbers.Integral):
            raise ConfigError('seed must be an integer, got %r' % s['seed'])
        self.protocol_descriptor()
        try:
            self.path()
        except ValueError as e:
            raise ConfigError('Invalid path: %s' % e)

    @property
    def state_vector(self):
        return complex_vector(self.settings['state_vector'])

    @property
    def constants(self):
        """Drive constants of a spin-c protocol descriptor"""
        descriptor = self.settings['protocol']
        if descriptor.get('potentials') != 'spin-c':
            raise ConfigError('This command needs a spin-c protocol.')
        return np.array(descriptor['constants'], dtype=float)

    def protocol_descriptor(self):
        """Return the validated protocol descriptor"""
        descriptor = self.settings['protocol']
        if not isinstance(descriptor, dict):
            raise ConfigError('protocol must be a JSON object.')
        kind = descriptor.get('type')
        if kind not in ('four-step', 'generalized'):
            raise ConfigError('Unknown protocol type %r' % (kind,))
        potentials = descriptor.get('potentials')
        if potentials == 'spin-c':
            constants = descriptor.get('constants')
            if not isinstance(constants, list) or len(constants) != 4:
                raise ConfigError('spin-c protocols need four constants.')
            for constant in constants:
                if isinstance(constant, bool) or \
                        not isinstance(constant, numbers.Real) or \
                        not np.isfinite(constant):
                    raise ConfigError('Constants must be finite numbers.')
        elif not isinstance(potentials, list):
            raise ConfigError('potentials must be "spin-c" or a list of '
                              'matrices.')
        if kind == 'four-step':
            for name in ('alpha', 'beta'):
                _unit_interval(name, descriptor.get(name))
        else:
            alphas = descriptor.get('alphas')
            if not isinstance(alphas, list):
                raise ConfigError('generalized protocols need alphas.')
            for index, alpha in enumerate(alphas):
                _unit_interval('alphas[%d]' % index, alpha)
        return descriptor

    def potentials(self):
        """Return the Hermitian potentials named by the descriptor"""
        descriptor = self.protocol_descriptor()
        if descriptor['potentials'] == 'spin-c':
            return list(spin_potentials(descriptor['constants']))
        return [complex_matrix(rows) for rows in descriptor['potentials']]

    def protocol(self):
        """Return the StepProtocol described by the configuration

        Raises
        ------
        ConfigError
            If the descriptor is inconsistent.
        """
        descriptor = self.protocol_descriptor()
        try:
            potentials = self.potentials()
            if descriptor['type'] == 'four-step':
                if len(potentials) != 4:
                    raise ValueError('four-step protocols need four '
                                     'potentials, got %d' % len(potentials))
                return four_step_protocol(descriptor['alpha'],
                                          descriptor['beta'], *potentials)
            return generalized_protocol(descriptor['alphas'], potentials)
        except ValueError as e:
            raise ConfigError('Invalid protocol: %s' % e)

    def path(self):
        return path_from_spec(self.settings['path'])

    def to_dict(self):
        return copy.deepcopy(self.settings)

    def config_hash(self):
        """Return the md5 hash of the result relevant settings"""
        settings = {key: value for key, value in self.settings.items()
                    if key not in UNHASHED}
        settings['afloat_version'] = __version__
        encoded = json.dumps(settings, sort_keys=True)
        return md5(encoded.encode('utf-8')).hexdigest()

    def metadata(self, command, **extra):
        """Return the metadata block embedded in output files"""
        metadata = {'command': command,
                    'config_hash': self.config_hash(),
                    'averaging': self.settings['averaging'],
                    'state_mode': self.settings['state'],
                    'afloat_version': __version__}
        metadata.update(extra)
        return metadata

    def __repr__(self):
        return 'RunConfig(hash=%s)' % self.config_hash()


def load_config(filepath):
    """Return the RunConfig stored in a JSON file

    Parameters
    ----------
    filepath : str
        Path to a JSON object with any subset of the DEFAULTS entries.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        If the file is not valid JSON or the settings are invalid.
    OSError
        If the file cannot be read.
    """
    with open(filepath) as f:
        try:
            overrides = json.load(f)
        except ValueError as e:
            raise ConfigError('Could not parse %s: %s' % (filepath, e))
    logger.info('Loaded configuration from %s' % filepath)
    return RunConfig.from_dict(overrides)
