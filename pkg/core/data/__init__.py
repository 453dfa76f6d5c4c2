"""
Core Data Utilities Package

Provides reusable YAML data loading for bundled games and reference values.
"""

from core.data.yaml_loader import BaseYamlDataLoader, read_yaml_file

__all__ = [
    "BaseYamlDataLoader",
    "read_yaml_file",
]
