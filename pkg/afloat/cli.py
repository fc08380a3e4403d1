"""Command line interface of afloat.

Usage: afloat <bands|scan|path|verify|energies> [options]

Exit codes: 0 on success, 1 if a verification check fails, 2 for invalid
configuration, 3 for file system errors and 4 when a path passes too close
to a diabolical point.
"""

import os
import sys
import logging
import argparse

from afloat import __version__
from afloat.locations import RUNS_PATH
from afloat.config import RunConfig, ConfigError, load_config
from afloat.spin import NearDiabolicalError, band_surface, diabolical_scan
from afloat.util import write_csv, write_json
from afloat.adiabatic.sphere import bloch_trajectory
from afloat.adiabatic.report import analyze_path
from afloat.adiabatic.energy import delta_e_fast, delta_e_slow, \
    ground_spinor, energy_ratio, is_separated
from afloat.verify import run_checks


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def cmd_bands(config, out):
    """Write the band surface CSV and a heatmap of |B|"""
    surface = band_surface(config.constants, grid_n=config.grid_n,
                           omega=config.omega, inertia=config.inertia,
                           n_jobs=config.n_jobs)
    alpha, beta = surface.argmax()
    metadata = config.metadata('bands', constants=config.constants.tolist(),
                               grid_n=config.grid_n, argmax=[alpha, beta])
    csv_path = os.path.join(out, 'bands.csv')
    svg_path = os.path.join(out, 'bands.svg')
    write_csv(csv_path, ['alpha', 'beta', 'e_minus', 'e_plus', 'b_mag'],
              surface.rows(), metadata)
    from afloat.plots import plot_band_heatmap
    plot_band_heatmap(surface, svg_path,
                      title='|B|, c = %s' % config.constants.tolist())
    return [csv_path, svg_path]


def cmd_scan(config, out):
    """Write the diabolical points and loci"""
    scan = diabolical_scan(config.constants, grid_n=config.grid_n,
                           tol=config.scan_tol)
    metadata = config.metadata('scan', constants=config.constants.tolist(),
                               degenerate=scan.degenerate,
                               n_points=len(scan.points),
                               n_curves=len(scan.curves))
    csv_path = os.path.join(out, 'scan.csv')
    write_csv(csv_path, ['component', 'kind', 'alpha', 'beta'], scan.rows(),
              metadata)
    return [csv_path]


def _fixed_state(config):
    return config.state_vector if config.state == 'fixed' else None


def cmd_path(config, out):
    """Write the Bloch trajectory, the adiabatic report and two figures"""
    path = config.path()
    trajectory = bloch_trajectory(path, config.constants, n=config.samples,
                                  omega=config.omega)
    report = analyze_path(path, config.constants, omega=config.omega,
                          n=config.samples, state_mode=config.state,
                          state=_fixed_state(config),
                          averaging=config.averaging, alpha0=config.alpha0,
                          beta0=config.beta0, inertia=config.inertia,
                          trajectory=trajectory)
    metadata = config.metadata('path', path=path.name,
                               constants=config.constants.tolist())
    csv_path = os.path.join(out, 'trajectory.csv')
    json_path = os.path.join(out, 'report.json')
    path_svg = os.path.join(out, 'path.svg')
    bloch_svg = os.path.join(out, 'bloch.svg')
    write_csv(csv_path, ['tau', 'alpha', 'beta', 'nx', 'ny', 'nz'],
              trajectory.rows(), metadata)
    write_json(json_path, report.to_dict(), metadata)
    from afloat.plots import plot_path, plot_bloch
    plot_path(path, path_svg, crossings=report.crossings)
    plot_bloch(trajectory, bloch_svg)
    return [csv_path, json_path, path_svg, bloch_svg]


def cmd_energies(config, out):
    """Write the fast and slow energy costs of the configured path"""
    path = config.path()
    c = config.constants
    alpha0, beta0 = config.alpha0, config.beta0
    tau0 = None
    if alpha0 is None or beta0 is None:
        alpha0, beta0 = path.evaluate(path.tau_start)
        tau0 = path.tau_start
    state = _fixed_state(config)
    if state is None:
        state = ground_spinor(alpha0, beta0, c, tau=tau0)
    fast = delta_e_fast(state, alpha0, beta0, c)
    slow_state = state if config.state == 'fixed' else None
    slow = delta_e_slow(path, c, config.omega, state_mode=config.state,
                        state=slow_state, n=config.samples)
    slow_absolute = delta_e_slow(path, c, config.omega,
                                 state_mode=config.state, state=slow_state,
                                 n=config.samples, absolute=True)
    ratio = energy_ratio(slow, fast)
    payload = {'path': path.name,
               'alpha0': alpha0,
               'beta0': beta0,
               'delta_e_fast': fast,
               'delta_e_slow': slow,
               'delta_e_slow_absolute': slow_absolute,
               'ratio': ratio,
               'separated': is_separated(ratio),
               'rotor_energy': 3 / (8 * config.inertia)}
    json_path = os.path.join(out, 'energies.json')
    write_json(json_path, payload, config.metadata('energies',
                                                   path=path.name))
    return [json_path]


def cmd_verify(config, out):
    """Run the self checks and write their report

    Returns
    -------
    tuple
        (files, passed)
    """
    report = run_checks(config)
    json_path = os.path.join(out, 'verify.json')
    write_json(json_path, report, config.metadata('verify'))
    return [json_path], report['passed']


COMMANDS = {'bands': cmd_bands,
            'scan': cmd_scan,
            'path': cmd_path,
            'verify': cmd_verify,
            'energies': cmd_energies}


def make_parser():
    parser = argparse.ArgumentParser(
        prog='afloat',
        description='Effective Hamiltonians of step driven systems and '
        'adiabatic transport of the driven spin.')
    parser.add_argument('--version', action='version',
                        version='afloat %s' % __version__)
    parser.add_argument('command', choices=sorted(COMMANDS))
    parser.add_argument('--config', help='JSON configuration file')
    parser.add_argument('--out', help='output directory')
    parser.add_argument('--grid', type=int, help='grid nodes per axis')
    parser.add_argument('--samples', type=int, help='path samples')
    parser.add_argument('--omega', type=float, help='driving frequency')
    parser.add_argument('--mode', choices=['paper', 'corrected'],
                        help='averaging of the effective Hamiltonian')
    parser.add_argument('--state', choices=['fixed', 'ground'],
                        help='state used for the slow energy cost')
    parser.add_argument('--path', help='builtin path name')
    parser.add_argument('--jobs', type=int, help='worker threads')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='log debug messages')
    return parser


def resolve_config(args):
    """Return the configuration given by a file and command line flags"""
    config = load_config(args.config) if args.config else \
        RunConfig.from_dict()
    return config.updated(grid_n=args.grid, samples=args.samples,
                          omega=args.omega, averaging=args.mode,
                          state=args.state, path=args.path,
                          n_jobs=args.jobs, out=args.out)


def output_directory(config, command):
    if config.out:
        return config.out
    return os.path.join(RUNS_PATH, '%s-%s' % (command,
                                              config.config_hash()[:12]))


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format='%(levelname)s: [%(asctime)s] %(name)s - %(message)s')
    try:
        config = resolve_config(args)
    except (ConfigError, ValueError) as e:
        logger.error('Invalid configuration: %s' % e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error('Could not read configuration: %s' % e)
        return EXIT_IO
    out = output_directory(config, args.command)
    passed = True
    try:
        if args.command == 'verify':
            files, passed = cmd_verify(config, out)
        else:
            files = COMMANDS[args.command](config, out)
    except NearDiabolicalError as e:
        logger.error(str(e))
        return EXIT_NUMERICAL
    except ConfigError as e:
        logger.error('Invalid configuration: %s' % e)
        return EXIT_CONFIG
    except OSError as e:
        logger.error('Could not write output: %s' % e)
        return EXIT_IO
    for filepath in files:
        print(filepath)
    if not passed:
        logger.error('Verification failed.')
        return EXIT_VERIFY_FAILED
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
