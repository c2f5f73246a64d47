"""Test package for the evolving-graph engine."""

import sys
from pathlib import Path

# Repository root, so that "src.<module>" and "tests.conftest" resolve
sys.path.insert(0, str(Path(__file__).parent.parent))
