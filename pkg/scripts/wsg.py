#!/usr/bin/env python3
# =========================================
# 📄 File: scripts/wsg.py
# Purpose: Executable wrapper around src.cli (run from the repository root)
#   python scripts/wsg.py montecarlo --preset smoke
# =========================================

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))  # repo root on the path

from src.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
