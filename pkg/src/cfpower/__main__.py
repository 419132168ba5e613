import sys

from cfpower.cli import main

sys.exit(main())
