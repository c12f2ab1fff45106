import sys

from fiberlevel.cli import main

sys.exit(main())
