"""
Asymptotic Poincaré maps and Poisson structures for polymatrix replicator
heteroclinic networks.

Exact rational arithmetic throughout, except for the numerical replicator
integration in ode_flow.
"""

from polymatrix.errors import PolymatrixError
from polymatrix.game_core import CellComplex, GameSpec, enumerate_cells, load_game_file, parse_game

__all__ = [
    "CellComplex",
    "GameSpec",
    "PolymatrixError",
    "enumerate_cells",
    "load_game_file",
    "parse_game",
]
