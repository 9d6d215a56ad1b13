"""Entry point for running softcodec as a module."""

import sys

from softcodec.cli import main

if __name__ == "__main__":
    sys.exit(main())
