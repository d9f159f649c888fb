#!/usr/bin/env python3
"""
bwvi - run experiments and diagnostics from the command line
"""

import sys
from pathlib import Path

# Add engine to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from harness.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
