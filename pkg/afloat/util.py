"""Output helpers shared by the command line tools."""

import os
import json
import logging
import numbers
import numpy as np


logger = logging.getLogger(__name__)


def format_float(value):
    """Return value with 17 significant digits"""
    return '%.17g' % value


def _format_cell(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, numbers.Integral):
        return str(int(value))
    if isinstance(value, numbers.Real):
        return format_float(float(value))
    return str(value)


def _metadata_lines(metadata):
    return ['# %s: %s' % (key, json.dumps(metadata[key], sort_keys=True))
            for key in sorted(metadata)]


def make_dirs(filepath):
    directory = os.path.dirname(os.path.abspath(filepath))
    if not os.path.exists(directory):
        os.makedirs(directory)


def write_csv(filepath, header, rows, metadata=None):
    """Write rows to a CSV file preceded by '#' metadata lines

    Parameters
    ----------
    filepath : str
        Output path. Parent directories are created.
    header : list of str
        Column names.
    rows : iterable of tuple
        Row values. Floats are written with 17 significant digits.
    metadata : Optional[dict]
        Written as '# key: json-value' lines in sorted key order.
    """
    lines = _metadata_lines(metadata or {})
    lines.append(','.join(header))
    for row in rows:
        if len(row) != len(header):
            raise ValueError('Row has %d entries, header has %d'
                             % (len(row), len(header)))
        lines.append(','.join(_format_cell(value) for value in row))
    make_dirs(filepath)
    with open(filepath, 'w') as f:
        f.write('\n'.join(lines) + '\n')
    logger.info('Wrote %s' % filepath)


def read_csv(filepath):
    """Return (metadata, header, rows) from a file written by write_csv

    Cells are returned as strings.
    """
    metadata = {}
    header = None
    rows = []
    with open(filepath) as f:
        for line in f:
            line = line.rstrip('\n')
            if line.startswith('# '):
                key, value = line[2:].split(': ', 1)
                metadata[key] = json.loads(value)
            elif header is None:
                header = line.split(',')
            elif line:
                rows.append(line.split(','))
    return metadata, header, rows


def _to_builtin(value):
    if isinstance(value, dict):
        return {str(key): _to_builtin(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_builtin(item) for item in value]
    if isinstance(value, np.ndarray):
        return _to_builtin(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Real):
        value = float(value)
        if not np.isfinite(value):
            return str(value)
        return value
    return value


def write_json(filepath, payload, metadata=None):
    """Write payload as JSON with sorted keys

    Parameters
    ----------
    filepath : str
        Output path. Parent directories are created.
    payload : dict
        Content. numpy scalars and arrays are converted, non-finite floats
        are written as strings.
    metadata : Optional[dict]
        Stored under the key 'metadata'.
    """
    content = dict(payload)
    if metadata is not None:
        content['metadata'] = metadata
    make_dirs(filepath)
    with open(filepath, 'w') as f:
        json.dump(_to_builtin(content), f, sort_keys=True, indent=1)
        f.write('\n')
    logger.info('Wrote %s' % filepath)
