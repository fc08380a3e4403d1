import sys

from afloat.cli import main


sys.exit(main())
