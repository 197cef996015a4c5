import sys

from greens.cli import main

sys.exit(main())
