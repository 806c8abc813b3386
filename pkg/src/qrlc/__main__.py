import sys

from qrlc.cli import main

sys.exit(main())
