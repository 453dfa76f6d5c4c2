"""
Bundled game data for the polymatrix toolkit.

This package contains:
- fish.yaml: the fish network with its reference values
- small_games.yaml: edge-case games and malformed inputs
- data_loader.py: typed loaders built on BaseYamlDataLoader
"""

from polymatrix.conservative import ConservativeData, parse_conservative_section, rational_matrix
from polymatrix.test_data.data_loader import (
    FishDataLoader,
    SmallGamesLoader,
    fish_conservative,
    fish_document,
    fish_game,
    fish_reference,
    malformed_game,
    small_game,
)

__all__ = [
    "ConservativeData",
    "FishDataLoader",
    "SmallGamesLoader",
    "fish_conservative",
    "fish_document",
    "fish_game",
    "fish_reference",
    "malformed_game",
    "parse_conservative_section",
    "rational_matrix",
    "small_game",
]
