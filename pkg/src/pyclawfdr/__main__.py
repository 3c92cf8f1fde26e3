import sys

from pyclawfdr.cli import main

sys.exit(main())
