"""
Main entry point for the Satake package.
This allows running the package with: python -m satake
"""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
