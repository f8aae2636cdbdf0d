import sys

from sdnadmit.cli import main

sys.exit(main())
