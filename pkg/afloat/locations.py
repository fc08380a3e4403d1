"""
Contains paths to locations on the user's system where run outputs and
scratch files are stored. These all live in afloat's home folder which
defaults to the hidden directory ".afloat" in the user's home directory but
which can be specified by setting the environment variable AFLOAT_HOME in
the user's profile.
"""

import os
from afloat import __version__


AFLOAT_HOME = os.environ.get('AFLOAT_HOME')
if AFLOAT_HOME is None:
    AFLOAT_HOME = os.path.join(os.path.expanduser('~'), '.afloat')

AFLOAT_PATH = os.path.join(AFLOAT_HOME, __version__)
RUNS_PATH = os.path.join(AFLOAT_PATH, 'runs')
SCRATCH_PATH = os.path.join(AFLOAT_PATH, 'scratch')
