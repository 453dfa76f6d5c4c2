"""Skeleton character: the linear data of the replicator field at each corner of the prism."""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Tuple

from polymatrix.game_core import CellComplex, GameSpec, enumerate_cells


@dataclass(frozen=True)
class CharacterTable:
    """
    χ^v_σ for every vertex v and facet σ containing it.

    Entries are exact; (v, σ) with v off σ has no entry.
    """

    game: GameSpec
    complex: CellComplex
    values: Dict[Tuple[int, int], Fraction]

    def chi(self, v: int, sigma: int) -> Fraction:
        key = (v, sigma)
        if key not in self.values:
            raise KeyError(f"v{v + 1} does not lie on σ{sigma + 1}")
        return self.values[key]

    def get(self, v: int, sigma: int) -> Optional[Fraction]:
        return self.values.get((v, sigma))

    def row(self, v: int) -> Dict[int, Fraction]:
        return {sigma: self.values[(v, sigma)] for sigma in self.complex.facets_at(v)}

    def vector(self, v: int) -> Tuple[Fraction, ...]:
        """χ^v as an element of ℝ^F, zero off F_v."""
        return tuple(self.values.get((v, sigma), Fraction(0)) for sigma in range(self.game.n))

    def is_saddle(self, v: int) -> bool:
        values = self.row(v).values()
        return any(c > 0 for c in values) and any(c < 0 for c in values)


def skeleton_character(game: GameSpec, complex_: Optional[CellComplex] = None) -> CharacterTable:
    """χ^v_i = Σ_β (a_{j_α j_β} - a_{i j_β}) for v = (j_1..j_p) and i in group α off v."""
    complex_ = complex_ or enumerate_cells(game)
    values: Dict[Tuple[int, int], Fraction] = {}
    for vertex in complex_.vertices:
        payoffs = [sum((game.payoff[i][j] for j in vertex.strategies), Fraction(0)) for i in range(game.n)]
        for sigma in complex_.facets_at(vertex.index):
            own = vertex.strategies[game.group_of[sigma]]
            values[(vertex.index, sigma)] = payoffs[own] - payoffs[sigma]
    return CharacterTable(game, complex_, values)
