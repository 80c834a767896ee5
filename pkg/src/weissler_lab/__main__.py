import sys

from weissler_lab.cli import main

sys.exit(main())
