#!/usr/bin/env python3
"""
relgrowth - software reliability estimation toolkit
Command-line entry point: seeding, complexity, growth, NHPP and run-domain models
"""

import sys

from src.ui.cli import main

if __name__ == "__main__":
    sys.exit(main())
