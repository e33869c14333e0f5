"""Allow ``python -m loke`` as an alias for the ``loke`` console script."""

import sys

from loke.cli import main

if __name__ == "__main__":
    sys.exit(main())
