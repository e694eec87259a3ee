import sys

from airtrack.cli import main

sys.exit(main())
