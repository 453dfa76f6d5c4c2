"""
Analysis pipeline for one game.

Orchestrates the library stages in dependency order and caches each result,
so the command line and the reproduction suite share one object per game:

    analysis = Analysis.from_file("fish.yaml")
    analysis.graph.flowing
    analysis.skeleton_map.branches
"""

from functools import cached_property
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import yaml

from core.data import read_yaml_file
from core.logger import log
from polymatrix.conservative import (
    ConservativeData,
    HamiltonianSpec,
    SkewDecomposition,
    casimir_basis,
    find_skew_decomposition,
    formal_equilibria,
    is_formal_equilibrium,
    parse_conservative_section,
    verify_skew_decomposition,
)
from polymatrix.errors import DomainError, GameSpecError, VerificationError
from polymatrix.game_core import CellComplex, GameSpec, enumerate_cells, parse_game
from polymatrix.linalg import Vector
from polymatrix.skeleton.branches import PiecewiseLinearMap, enumerate_branches
from polymatrix.skeleton.character import CharacterTable, skeleton_character
from polymatrix.skeleton.graph import FlowGraph, StructuralSetCertificate, classify_edges, structural_set


class Analysis:
    """
    Lazily evaluated analysis of one game.

    Args:
        game: the parsed game
        conservative: conservativity data declared with the game, if any
        structural: edge names of a structural set; a declared or searched set is used otherwise
        search: ignore any declared set and search for a minimum one
    """

    def __init__(
        self,
        game: GameSpec,
        conservative: Optional[ConservativeData] = None,
        structural: Optional[Sequence[str]] = None,
        search: bool = False,
    ):
        self.game = game
        self.conservative = conservative
        if search:
            structural = None
        elif structural is None and conservative is not None and conservative.structural_set:
            structural = conservative.structural_set
        self._structural = tuple(structural) if structural is not None else None

    @classmethod
    def from_document(cls, document: Dict[str, Any], name: Optional[str] = None, **kwargs) -> "Analysis":
        game = parse_game(document, name=name)
        return cls(game, parse_conservative_section(document.get("conservative")), **kwargs)

    @classmethod
    def from_file(cls, path: Union[Path, str], **kwargs) -> "Analysis":
        """
        Raises:
            FileNotFoundError: If the file does not exist
            GameSpecError: If the file is not a valid game description
        """
        try:
            document = read_yaml_file(path)
        except (ValueError, yaml.YAMLError) as e:
            raise GameSpecError(str(e)) from e
        return cls.from_document(document, name=document.get("name", Path(path).stem), **kwargs)

    @cached_property
    def complex(self) -> CellComplex:
        return enumerate_cells(self.game)

    @cached_property
    def character(self) -> CharacterTable:
        return skeleton_character(self.game, self.complex)

    @cached_property
    def graph(self) -> FlowGraph:
        return classify_edges(self.character)

    @cached_property
    def structural(self) -> StructuralSetCertificate:
        return structural_set(self.graph, self._structural)

    @cached_property
    def skeleton_map(self) -> PiecewiseLinearMap:
        return enumerate_branches(self.graph, self.structural.edges)

    @cached_property
    def decomposition(self) -> SkewDecomposition:
        """
        Raises:
            VerificationError: If the game has no skew decomposition
        """
        declared = self.conservative
        if declared is not None and declared.skew_model is not None:
            return verify_skew_decomposition(self.game, declared.skew_model, declared.scaling)
        found = find_skew_decomposition(self.game)
        if found is None:
            log.error(f"Game '{self.game.name}' is not conservative")
            raise VerificationError(f"game '{self.game.name}' admits no skew decomposition")
        return found

    def _equilibrium(self, declared: Optional[Vector], kind: str) -> Vector:
        if declared is not None:
            if not is_formal_equilibrium(self.game, declared):
                log.error(f"Declared {kind} equilibrium of '{self.game.name}' fails the equilibrium equations")
                raise VerificationError(f"declared {kind} equilibrium is not a formal equilibrium", witness=declared)
            return declared
        equilibria = formal_equilibria(self.game)
        if equilibria is None:
            raise DomainError(f"game '{self.game.name}' has no formal equilibrium")
        return equilibria.particular

    @cached_property
    def scaling(self) -> Vector:
        if self.conservative is not None and len(self.conservative.scaling) == self.game.p:
            return self.conservative.scaling
        return self.decomposition.scaling

    @cached_property
    def hamiltonian(self) -> HamiltonianSpec:
        """h built from the declared formal equilibrium, or the solved one."""
        declared = self.conservative.formal_equilibrium if self.conservative is not None else None
        return HamiltonianSpec.build(self.game, self._equilibrium(declared, "formal"), self.scaling)

    @cached_property
    def level_functional(self) -> HamiltonianSpec:
        """η on the dual cone; uses the declared level equilibrium when there is one."""
        if self.conservative is None:
            return self.hamiltonian
        return HamiltonianSpec.build(self.game, self._equilibrium(self.conservative.level_equilibrium, "level"), self.scaling)

    @cached_property
    def casimirs(self) -> Tuple[Vector, ...]:
        if self.conservative is not None and self.conservative.casimirs:
            return self.conservative.casimirs
        return tuple(casimir_basis(self.game))

    def __repr__(self) -> str:
        return f"Analysis(game='{self.game.name}', groups={list(self.game.groups)})"
