"""
Randomised property checks over generated polymatrix games.

Every case draws its game from np.random.default_rng([random_seed, case]),
so a failing case can be replayed on its own.
"""

from fractions import Fraction
from typing import Tuple

import allure
import numpy as np
import pytest

from polymatrix.conservative import casimir_basis, find_skew_decomposition, poisson_field_at
from polymatrix.game_core import (
    GameSpec,
    enumerate_cells,
    equal_rows_equivalent,
    restrict_to_face,
    vector_field,
)
from polymatrix.linalg import is_skew, mat_vec
from polymatrix.poisson_asym import sector_poisson
from polymatrix.skeleton.character import skeleton_character

CASES = range(50)


def _groups(rng: np.random.Generator) -> Tuple[int, ...]:
    if rng.integers(1, 3) == 1:
        return (int(rng.integers(2, 6)),)
    return tuple(int(s) for s in rng.integers(2, 4, size=2))


def _random_game(rng: np.random.Generator, name: str = "random") -> GameSpec:
    groups = _groups(rng)
    n = sum(groups)
    payoff = tuple(tuple(Fraction(int(a)) for a in row) for row in rng.integers(-3, 4, size=(n, n)))
    return GameSpec(groups=groups, payoff=payoff, name=name)


def _equal_rows(rng: np.random.Generator, game: GameSpec):
    """A matrix whose blocks all have equal rows."""
    shared = rng.integers(-5, 6, size=(game.p, game.n))
    return tuple(tuple(Fraction(int(shared[game.group_of[i]][j])) for j in range(game.n)) for i in range(game.n))


def _add(first, second):
    return tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(first, second))


def _random_point(rng: np.random.Generator, game: GameSpec, interior: bool = True):
    weights = rng.integers(1 if interior else 0, 10, size=game.n)
    x = []
    for alpha in range(game.p):
        members = list(game.members(alpha))
        if not any(weights[i] for i in members):
            weights[members[0]] = 1
        total = int(sum(weights[i] for i in members))
        x += [Fraction(int(weights[i]), total) for i in members]
    return tuple(x)


@pytest.mark.property
@pytest.mark.game_core
@pytest.mark.slow
@allure.feature("Properties")
class TestReplicatorProperties:
    """The exact vector field on random games."""

    @allure.story("Vector field")
    @allure.title("Field is tangent to every group simplex")
    @pytest.mark.parametrize("case", CASES)
    def test_tangency(self, random_seed, case):
        rng = np.random.default_rng([random_seed, case])
        game = _random_game(rng)
        x = _random_point(rng, game, interior=False)
        field = vector_field(game, x)
        for alpha in range(game.p):
            assert sum(field[i] for i in game.members(alpha)) == 0, f"Group {alpha + 1} sum is not zero"

    @allure.story("Vector field")
    @allure.title("Faces are invariant and carry the restricted game")
    @pytest.mark.parametrize("case", CASES)
    def test_face_invariance(self, random_seed, case):
        """
        Validates:
        - coordinates off the face stay at zero
        - on the face the field equals the field of the restricted game
        """
        rng = np.random.default_rng([random_seed, case])
        game = _random_game(rng)
        kept = [int(rng.choice(list(game.members(alpha)))) for alpha in range(game.p)]
        kept += [i for i in range(game.n) if i not in kept and rng.random() < 0.5]
        kept = sorted(kept)
        face = restrict_to_face(game, kept)
        y = _random_point(rng, face)
        x = [Fraction(0)] * game.n
        for position, i in enumerate(kept):
            x[i] = y[position]
        field = vector_field(game, x)
        assert all(field[i] == 0 for i in range(game.n) if i not in kept)
        assert tuple(field[i] for i in kept) == vector_field(face, y)

    @allure.story("Cell complex")
    @allure.title("Cell counts follow the product-of-simplices formulas")
    @pytest.mark.parametrize("case", CASES)
    def test_cell_counts(self, random_seed, case):
        """
        Validates:
        - #vertices = Π n_α and #facets = n
        - every vertex lies on n - p facets and has Σ(n_α - 1) edges
        """
        rng = np.random.default_rng([random_seed, case])
        game = _random_game(rng)
        complex_ = enumerate_cells(game)
        degree = sum(size - 1 for size in game.groups)
        assert len(complex_.vertices) == int(np.prod(game.groups))
        assert len(complex_.facets) == game.n
        assert len(complex_.edges) == len(complex_.vertices) * degree // 2
        for vertex in complex_.vertices:
            assert len(complex_.facets_at(vertex.index)) == game.n - game.p
            assert len(complex_.edges_at(vertex.index)) == degree

    @allure.story("Equal rows")
    @allure.title("Equal-rows equivalence is an equivalence relation")
    @pytest.mark.parametrize("case", CASES)
    def test_equal_rows_relation(self, random_seed, case):
        rng = np.random.default_rng([random_seed, case])
        game = _random_game(rng)
        first = game.payoff
        second = _add(first, _equal_rows(rng, game))
        third = _add(second, _equal_rows(rng, game))
        other = _random_game(np.random.default_rng([random_seed, case, 1])).payoff
        assert equal_rows_equivalent(game, first, first)
        assert equal_rows_equivalent(game, first, second) and equal_rows_equivalent(game, second, first)
        assert equal_rows_equivalent(game, first, third)
        if len(other) == game.n:
            assert equal_rows_equivalent(game, first, other) == equal_rows_equivalent(game, other, first)

    @allure.story("Character")
    @allure.title("Character is unchanged by equal-rows perturbations")
    @pytest.mark.parametrize("case", CASES)
    def test_character_equal_rows_invariance(self, random_seed, case):
        rng = np.random.default_rng([random_seed, case])
        game = _random_game(rng)
        shifted = GameSpec(groups=game.groups, payoff=_add(game.payoff, _equal_rows(rng, game)), name="shifted")
        assert equal_rows_equivalent(game, game.payoff, shifted.payoff)
        first = skeleton_character(game, enumerate_cells(game))
        second = skeleton_character(shifted, enumerate_cells(shifted))
        for vertex in first.complex.vertices:
            assert first.row(vertex.index) == second.row(vertex.index), f"{vertex.name} changed"


@pytest.mark.property
@pytest.mark.conservative
@pytest.mark.slow
@allure.feature("Properties")
class TestConservativeProperties:
    """Random games A = A0·D + R with A0 skew and R equal-rows."""

    @staticmethod
    def _conservative_game(rng: np.random.Generator) -> GameSpec:
        groups = _groups(rng)
        n = sum(groups)
        upper = np.triu(rng.integers(-3, 4, size=(n, n)), 1)
        skew = upper - upper.T
        scaling = [int(rng.choice([-3, -2, -1, 1, 2, 3])) for _ in groups]
        d = [scaling[alpha] for alpha, size in enumerate(groups) for _ in range(size)]
        rows = tuple(tuple(Fraction(int(skew[i][j]) * d[j]) for j in range(n)) for i in range(n))
        game = GameSpec(groups=groups, payoff=rows, name="conservative")
        return GameSpec(groups=groups, payoff=_add(rows, _equal_rows(rng, game)), name="conservative")

    @allure.story("Decomposition")
    @allure.title("Skew decompositions are found and reproduce the game")
    @pytest.mark.parametrize("case", CASES)
    def test_find_decomposition(self, random_seed, case):
        """
        Validates:
        - find mode succeeds with a scaling that vanishes on no group
        - the model is skew and equal-rows equivalent to the game
        - every sector bracket and the ambient Poisson tensor are skew
        """
        rng = np.random.default_rng([random_seed, case])
        game = self._conservative_game(rng)
        found = find_skew_decomposition(game)
        assert found is not None, f"No decomposition for {game.payoff}"
        assert is_skew(found.skew)
        assert all(found.scaling)
        assert equal_rows_equivalent(game, game.payoff, found.scaled(game))

        complex_ = enumerate_cells(game)
        for vertex in complex_.vertices:
            assert is_skew(sector_poisson(found, complex_, vertex.index).matrix), f"B_{vertex.name} is not skew"
        tensor = poisson_field_at(found, game, _random_point(rng, game))
        assert (tensor + tensor.T).is_zero_matrix
        boundary = _random_point(rng, game, interior=False)
        tensor = poisson_field_at(found, game, boundary)
        for i, value in enumerate(boundary):
            if value == 0:
                assert all(tensor[i, j] == 0 for j in range(game.n)), f"Row {i + 1} survives x_{i + 1} = 0"

    @allure.story("Casimirs")
    @allure.title("Casimir vectors lie in Ker(A) with zero group sums")
    @pytest.mark.parametrize("case", CASES)
    def test_casimir_basis(self, random_seed, case):
        rng = np.random.default_rng([random_seed, case])
        game = self._conservative_game(rng)
        for w in casimir_basis(game):
            assert any(w)
            assert all(v == 0 for v in mat_vec(game.payoff, w))
            for alpha in range(game.p):
                assert sum(w[i] for i in game.members(alpha)) == 0
