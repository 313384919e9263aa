import sys

from varxpert.cli import main

sys.exit(main())
