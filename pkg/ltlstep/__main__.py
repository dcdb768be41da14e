import sys

from ltlstep.cli import main

sys.exit(main())
