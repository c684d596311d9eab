import sys

from icvcdf.cli import main

sys.exit(main())
