import sys

from microasm.cli import main

sys.exit(main())
