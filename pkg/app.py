"""
Quantum Grassmannian Tangent Spaces launcher

Usage:
    python app.py classify --N 2 --r 1
    python app.py dims --N 3 --r 1 --k 2 --format text
    python app.py verify actions --N 4 --r 2
"""

import os
import sys

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from cli import main

if __name__ == "__main__":
    sys.exit(main())
