"""
Generic YAML Data Loader

Base class for loading bundled data (games, reference values) from YAML files.
Implements singleton pattern with caching so every test session parses a file once.

Usage:
    class FishDataLoader(BaseYamlDataLoader):
        def __init__(self):
            yaml_file = Path(__file__).parent / "fish.yaml"
            super().__init__(yaml_file)

        def reference(self, key: str) -> Any:
            return self.get_section_item("reference", key)

    loader = FishDataLoader()
    groups = loader.get_config_value("game", "groups")

User supplied files that must not be cached go through read_yaml_file().
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml

from core.logger import log


def read_yaml_file(yaml_file: Union[Path, str]) -> Dict[str, Any]:
    """
    Parse a YAML mapping from disk without caching.

    Raises:
        FileNotFoundError: If the file doesn't exist
        yaml.YAMLError: If the file is malformed
        ValueError: If the top level is not a mapping
    """
    path = Path(yaml_file)
    if not path.exists():
        log.error(f"YAML file not found: {path}")
        raise FileNotFoundError(f"YAML file not found: {path}")

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        log.error(f"Error parsing YAML file {path}: {e}")
        raise

    if data is None:
        log.warning(f"YAML file is empty: {path}")
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Top level of {path} must be a mapping, got {type(data).__name__}")
    return data


class BaseYamlDataLoader:
    """
    Generic base class for YAML data loading with singleton pattern.

    Features:
    - Singleton pattern: One instance per subclass
    - Automatic caching: Data loaded once and cached
    - Generic accessors: Get data by section and key
    - Error handling: Clear error messages for missing data
    """

    # Class-level cache for singleton instances per subclass
    _instances: Dict[type, "BaseYamlDataLoader"] = {}
    _data_cache: Dict[type, Dict[str, Any]] = {}

    def __new__(cls, yaml_file: Optional[Path] = None):
        """
        Implement singleton pattern per subclass.
        Each subclass gets its own singleton instance.
        """
        if cls not in cls._instances:
            instance = super(BaseYamlDataLoader, cls).__new__(cls)
            cls._instances[cls] = instance
        return cls._instances[cls]

    def __init__(self, yaml_file: Union[Path, str]):
        # Only load data once per class (singleton pattern)
        if type(self) not in self._data_cache:
            self.yaml_file = Path(yaml_file)
            self._load_data()

    def _load_data(self):
        log.info(f"Loading YAML data from: {self.yaml_file}")
        data = read_yaml_file(self.yaml_file)
        # Cache data at class level
        type(self)._data_cache[type(self)] = data
        log.info(f"Successfully loaded YAML data with {len(data)} top-level sections")

    @property
    def data(self) -> Dict[str, Any]:
        """Complete cached YAML data."""
        return type(self)._data_cache.get(type(self), {})

    def get_section(self, section_name: str) -> Dict[str, Any]:
        """
        Get an entire top-level section.

        Raises:
            KeyError: If section doesn't exist
        """
        if section_name not in self.data:
            available = list(self.data.keys())
            raise KeyError(f"Section '{section_name}' not found in YAML. " f"Available sections: {', '.join(available)}")

        return self.data[section_name]

    def get_section_item(self, section_name: str, item_key: str) -> Any:
        """
        Get a specific item from a section.

        Raises:
            KeyError: If section or item doesn't exist
        """
        section = self.get_section(section_name)

        if item_key not in section:
            available = list(section.keys())
            raise KeyError(
                f"Item '{item_key}' not found in section '{section_name}'. " f"Available items: {', '.join(available)}"
            )

        return section[item_key]

    def list_sections(self) -> List[str]:
        return list(self.data.keys())

    def list_section_items(self, section_name: str) -> List[str]:
        return list(self.get_section(section_name).keys())

    def has_section(self, section_name: str) -> bool:
        return section_name in self.data

    def get_config_value(self, *keys: str, default: Any = None) -> Any:
        """
        Get a value using nested keys.

        Example:
            >>> loader.get_config_value("conservative", "scaling")
            [1, 1]
            >>> loader.get_config_value("conservative", "missing", default=None)
        """
        current = self.data

        for key in keys:
            if isinstance(current, dict) and key in current:
                current = current[key]
            else:
                log.debug(f"Key path {'.'.join(keys)} not found, using default: {default}")
                return default

        return current

    def reload(self):
        """Force reload data from the YAML file."""
        log.info(f"Reloading YAML data from: {self.yaml_file}")
        if type(self) in type(self)._data_cache:
            del type(self)._data_cache[type(self)]
        self._load_data()

    def __repr__(self) -> str:
        sections = ", ".join(self.list_sections())
        return f"{self.__class__.__name__}(file={self.yaml_file.name}, sections=[{sections}])"
