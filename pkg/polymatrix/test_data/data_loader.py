"""
Bundled game data

Loaders for the fish network and the small edge-case games shipped with
the package. Uses the generic BaseYamlDataLoader with typed accessors.

Usage:
    from polymatrix.test_data import fish_game, fish_reference

    game = fish_game()
    table = fish_reference("character")
"""

from pathlib import Path
from typing import Any, Dict, List

from core.data import BaseYamlDataLoader
from polymatrix.conservative import ConservativeData, parse_conservative_section
from polymatrix.game_core import GameSpec, parse_game


class FishDataLoader(BaseYamlDataLoader):
    """Loader for fish.yaml: the game, its conservativity data and reference values."""

    def __init__(self):
        yaml_file = Path(__file__).parent / "fish.yaml"
        super().__init__(yaml_file)

    def game(self) -> GameSpec:
        return parse_game(self.data)

    def conservative(self) -> ConservativeData:
        return parse_conservative_section(self.get_section("conservative"))

    def reference(self, key: str) -> Any:
        return self.get_section_item("reference", key)


class SmallGamesLoader(BaseYamlDataLoader):
    """Loader for small_games.yaml."""

    def __init__(self):
        yaml_file = Path(__file__).parent / "small_games.yaml"
        super().__init__(yaml_file)

    def game(self, key: str) -> GameSpec:
        return parse_game(self.get_section_item("games", key), name=key)

    def malformed(self, key: str) -> Dict[str, Any]:
        return self.get_section_item("malformed", key)

    def list_games(self) -> List[str]:
        return self.list_section_items("games")


# Accessors go through the singleton constructors; each file is read on first use
def fish_game() -> GameSpec:
    """The bundled fish game with its edge labels."""
    return FishDataLoader().game()


def fish_conservative() -> ConservativeData:
    return FishDataLoader().conservative()


def fish_reference(key: str) -> Any:
    return FishDataLoader().reference(key)


def small_game(key: str) -> GameSpec:
    return SmallGamesLoader().game(key)


def malformed_game(key: str) -> Dict[str, Any]:
    return SmallGamesLoader().malformed(key)


def fish_document() -> Dict[str, Any]:
    """Raw parsed fish.yaml mapping."""
    return FishDataLoader().data
