"""Puts the repository root on sys.path so tests import the top-level packages."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))
