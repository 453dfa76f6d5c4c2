"""
Root conftest.py for the polymatrix analysis toolkit.

This ensures fixtures from core are available to all test modules.
"""

# Import fixtures from core/conftest.py to make them globally available
from core.conftest import output_dir, random_seed, rng, test_logging

__all__ = [
    "output_dir",
    "random_seed",
    "rng",
    "test_logging",
]
