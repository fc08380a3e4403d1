"""SVG figures of bands, parameter paths and Bloch sphere images.

Figures are written with the Agg backend, a fixed SVG hash salt and no date
so that identical inputs give identical files.
"""

import logging
import numpy as np
import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402

from afloat.util import make_dirs  # noqa: E402


logger = logging.getLogger(__name__)

SVG_SALT = 'afloat'
SEGMENT_LINES = (((0, 0), (0, 1)), ((1, 1), (0, 1)), ((0, 1), (0, 0)),
                 ((0, 1), (1, 1)), ((0, 1), (0, 1)))


def _save(fig, filepath):
    make_dirs(filepath)
    with matplotlib.rc_context({'svg.hashsalt': SVG_SALT,
                                'svg.fonttype': 'none'}):
        fig.savefig(filepath, format='svg', metadata={'Date': None})
    plt.close(fig)
    logger.info('Wrote %s' % filepath)


def plot_band_heatmap(surface, filepath, title=None):
    """Write a heatmap of |B| over the parameter square

    Parameters
    ----------
    surface : BandSurface
    filepath : str
        Output SVG path.
    title : Optional[str]
    """
    fig, ax = plt.subplots(figsize=(5, 4.2))
    # Rows of b_mag are indexed by alpha, so transpose for beta on y
    mesh = ax.pcolormesh(surface.grid, surface.grid, surface.b_mag.T,
                         shading='nearest', cmap='viridis')
    fig.colorbar(mesh, ax=ax, label='|B|')
    alpha, beta = surface.argmax()
    ax.plot(alpha, beta, marker='x', color='white')
    ax.set_xlabel('alpha')
    ax.set_ylabel('beta')
    ax.set_aspect('equal')
    if title:
        ax.set_title(title)
    _save(fig, filepath)


def plot_path(path, filepath, crossings=(), n=1001):
    """Write the path in the unit square with the invariant segments dashed
    """
    from afloat.adiabatic.paths import sample_path
    samples = sample_path(path, n)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    for xs, ys in SEGMENT_LINES:
        ax.plot(xs, ys, linestyle='--', color='gray', linewidth=1)
    ax.plot(samples[:, 1], samples[:, 2], color='tab:blue')
    ax.plot(samples[0, 1], samples[0, 2], marker='o', color='tab:blue')
    for crossing in crossings:
        marker = 'o' if crossing.kind == 'transversal' else 's'
        ax.plot(crossing.alpha, crossing.beta, marker=marker,
                color='tab:red', fillstyle='none')
    ax.set_xlim(-0.05, 1.05)
    ax.set_ylim(-0.05, 1.05)
    ax.set_xlabel('alpha')
    ax.set_ylabel('beta')
    ax.set_aspect('equal')
    ax.set_title(path.name)
    _save(fig, filepath)


def plot_bloch(traj, filepath):
    """Write an orthographic view of the image loop on the Bloch sphere

    The view looks down the z axis. The back hemisphere is drawn dashed.
    """
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    angles = np.linspace(0, 2*np.pi, 361)
    ax.plot(np.cos(angles), np.sin(angles), color='gray', linewidth=1)
    directions = traj.directions
    front = np.where(directions[:, 2] >= 0, directions[:, 1], np.nan)
    back = np.where(directions[:, 2] < 0, directions[:, 1], np.nan)
    ax.plot(directions[:, 0], front, color='tab:blue')
    ax.plot(directions[:, 0], back, color='tab:blue', linestyle='--')
    ax.plot(directions[0, 0], directions[0, 1], marker='o', color='tab:blue')
    ax.set_xlim(-1.1, 1.1)
    ax.set_ylim(-1.1, 1.1)
    ax.set_xlabel('n_x')
    ax.set_ylabel('n_y')
    ax.set_aspect('equal')
    ax.set_title(traj.path_name)
    _save(fig, filepath)
