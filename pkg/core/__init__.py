"""
Core library for the polymatrix analysis toolkit.

This package provides shared functionality for the analysis modules:
- Configuration management
- Logging utilities
- YAML data loading
- Exact rational text parsing
"""

from core.config import config
from core.logger import log

__all__ = ["config", "log"]
