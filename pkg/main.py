"""
Entry point for the motif sketch command line; `python main.py serve` starts the API.
"""

import sys

from app.cli import main

if __name__ == "__main__":
    sys.exit(main())
