import sys

from socialnav.cli import main

sys.exit(main())
