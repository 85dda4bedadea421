import sys

from mutrans.cli import main

sys.exit(main())
