"""
Tests for game parsing, the replicator vector field and the cell complex.
"""

from fractions import Fraction

import allure
import pytest

from core.logger import log
from polymatrix.errors import AdjacencyError, DomainError, FaceError, GameSpecError
from polymatrix.game_core import (
    GameSpec,
    barycenter,
    edge_label,
    enumerate_cells,
    equal_rows_equivalent,
    parse_game,
    payoff_excess,
    restrict_to_face,
    vector_field,
)
from polymatrix.test_data import fish_document, fish_reference, malformed_game, small_game

F = Fraction


@pytest.mark.game_core
@pytest.mark.unit
@allure.feature("Game Core")
class TestGameParsing:
    """Game files and in-memory game descriptions."""

    @pytest.mark.smoke
    @allure.story("Parsing")
    @allure.title("Fish game dimensions")
    def test_fish_dimensions(self, fish_game):
        """
        Validates:
        - seven strategies in groups of five and two
        - group offsets and membership
        """
        assert fish_game.groups == (5, 2)
        assert fish_game.n == 7 and fish_game.p == 2
        assert fish_game.offsets == (0, 5)
        assert fish_game.group_of == (0, 0, 0, 0, 0, 1, 1)
        assert list(fish_game.members(1)) == [5, 6]
        assert fish_game.block(1, 0) == ((0, 0, 0, 0, 0), (1, 0, 0, 0, -1))

    @allure.story("Parsing")
    @allure.title("Malformed games are rejected")
    @pytest.mark.parametrize("key", ["wrong_order", "irrational_entry", "empty_group"])
    def test_malformed_games(self, key):
        """
        Validates:
        - a payoff of the wrong order raises GameSpecError
        - a non-rational entry raises GameSpecError
        - an empty group raises GameSpecError
        """
        with pytest.raises(GameSpecError):
            parse_game(malformed_game(key), name=key)

    @allure.story("Parsing")
    @allure.title("Structural problems in raw descriptions")
    @pytest.mark.parametrize(
        "source",
        [
            "groups: [2]",
            "- just\n- a list",
            {"groups": "two", "payoff": [[0, 0], [0, 0]]},
            {"groups": [2], "payoff": "zero"},
            {"groups": [], "payoff": []},
        ],
    )
    def test_structural_errors(self, source):
        with pytest.raises(GameSpecError):
            parse_game(source)

    @allure.story("Parsing")
    @allure.title("Decimal payoff entries are exact")
    def test_decimal_entries(self):
        game = small_game("decimal_segment")
        assert game.payoff == ((F(1, 2), F(-1, 4)), (F(1, 3), F(0))), f"Unexpected payoff {game.payoff}"

    @allure.story("Parsing")
    @allure.title("YAML text and dictionaries give the same game")
    def test_round_trip(self, fish_game):
        """
        Validates:
        - to_yaml_dict output parses back to an equal game
        - YAML text parses like the mapping
        """
        again = parse_game(fish_game.to_yaml_dict())
        assert again == fish_game
        assert again.edge_labels == fish_game.edge_labels
        text = "name: tiny\ngroups: [2]\npayoff:\n  - [0, 1/2]\n  - [-1/2, 0]\n"
        tiny = parse_game(text)
        assert tiny.name == "tiny"
        assert tiny.payoff[0][1] == F(1, 2)

    @allure.story("Parsing")
    @allure.title("Direct construction validates shape")
    def test_direct_construction(self):
        with pytest.raises(GameSpecError):
            GameSpec(groups=(2, 2), payoff=((F(0),) * 4,) * 3)
        with pytest.raises(GameSpecError):
            GameSpec(groups=(), payoff=())

    @allure.story("Parsing")
    @allure.title("A single-strategy group is a valid game")
    def test_singleton_group(self):
        game = parse_game({"groups": [1, 2], "payoff": [[0, 1, -1], [0, 0, 0], [0, 0, 0]]})
        assert game.groups == (1, 2)
        assert list(game.members(0)) == [0]
        assert len(enumerate_cells(game).vertices) == 2

    @allure.story("Parsing")
    @allure.title("Rejections are logged before they are raised")
    def test_rejection_is_logged(self):
        messages = []
        handler = log.add(messages.append, level="ERROR", format="{message}")
        try:
            with pytest.raises(GameSpecError, match="missing 'payoff'"):
                parse_game({"groups": [2]})
            with pytest.raises(GameSpecError, match="must be 4x4"):
                GameSpec(groups=(2, 2), payoff=((F(0),) * 4,) * 3)
        finally:
            log.remove(handler)
        assert any("missing 'payoff'" in m for m in messages), f"No error logged: {messages}"
        assert any("must be 4x4" in m for m in messages), f"No error logged: {messages}"


@pytest.mark.game_core
@pytest.mark.unit
@allure.feature("Game Core")
class TestVectorField:
    """Exact replicator field."""

    @pytest.mark.smoke
    @allure.story("Vector field")
    @allure.title("Rock-paper-scissors field")
    def test_rock_paper_scissors(self):
        """
        Validates:
        - the barycenter is an equilibrium
        - X at (1/2, 1/2, 0) is (-1/4, 1/4, 0)
        - payoff excess on the support
        """
        game = small_game("rock_paper_scissors")
        assert vector_field(game, barycenter(game)) == (0, 0, 0)
        point = (F(1, 2), F(1, 2), F(0))
        assert vector_field(game, point) == (F(-1, 4), F(1, 4), 0)
        assert payoff_excess(game, point, 0) == F(-1, 2)
        assert payoff_excess(game, point, 2) == 0

    @allure.story("Vector field")
    @allure.title("Field is tangent to every group simplex")
    def test_tangency(self, fish_game):
        x = (F(1, 10), F(2, 10), F(3, 10), F(1, 10), F(3, 10), F(1, 4), F(3, 4))
        field = vector_field(fish_game, x)
        sums = [sum(field[i] for i in fish_game.members(a)) for a in range(fish_game.p)]
        log.info(f"Group sums of X: {sums}")
        assert sums == [0, 0], f"Field should be tangent, group sums {sums}"

    @allure.story("Vector field")
    @allure.title("Points off the polytope are rejected")
    @pytest.mark.parametrize(
        "x",
        [
            (F(1), F(1), F(0)),
            (F(-1, 2), F(1), F(1, 2)),
            (F(1, 2), F(1, 2)),
        ],
    )
    def test_domain(self, x):
        with pytest.raises(DomainError):
            vector_field(small_game("rock_paper_scissors"), x)

    @allure.story("Equivalence")
    @allure.title("Equal-rows equivalence ignores per-block constant rows")
    def test_equal_rows_equivalent(self):
        game = small_game("rock_paper_scissors")
        shifted = tuple(tuple(a + c for a, c in zip(row, (1, 2, 3))) for row in game.payoff)
        assert equal_rows_equivalent(game, game.payoff, shifted)
        bumped = (tuple(a + 1 for a in game.payoff[0]),) + game.payoff[1:]
        assert not equal_rows_equivalent(game, game.payoff, bumped)

    @allure.story("Faces")
    @allure.title("Restriction to a face")
    def test_restrict_to_face(self, fish_game):
        """
        Validates:
        - the sub-game keeps the chosen rows and columns
        - a face missing a group raises FaceError
        - keeping every strategy returns the game itself
        """
        face = restrict_to_face(fish_game, [0, 1, 5, 6])
        assert face.groups == (2, 2)
        assert face.payoff == ((0, 1, 0, -1), (-1, 0, 0, 0), (0, 0, 0, 0), (1, 0, 0, 0))
        with pytest.raises(FaceError):
            restrict_to_face(fish_game, [0, 1])
        assert restrict_to_face(fish_game, range(7)) is fish_game


@pytest.mark.game_core
@pytest.mark.unit
@allure.feature("Game Core")
class TestCellComplex:
    """Vertices, edges and facets of the prism."""

    @pytest.mark.smoke
    @pytest.mark.golden
    @allure.story("Cells")
    @allure.title("Fish vertices and counts match the reference listing")
    def test_fish_cells(self, fish_complex):
        """
        Validates:
        - ten vertices in lexicographic order
        - 25 edges and 7 facets
        """
        expected = fish_reference("vertices")
        labels = {v.name: list(v.label) for v in fish_complex.vertices}
        assert labels == expected, f"Vertex labels differ: {labels}"
        assert len(fish_complex.edges) == fish_reference("edge_count")
        assert len(fish_complex.facets) == fish_reference("facet_count")

    @allure.story("Cells")
    @allure.title("Lookups by name, label and endpoints")
    def test_lookups(self, fish_complex):
        """
        Validates:
        - vertex lookup by name and strategy tuple
        - edge aliases
        - facets at a vertex and the facet opposite an edge
        """
        assert fish_complex.vertex("v3").label == (2, 6)
        assert fish_complex.vertex((1, 5)).index == 2
        gamma = fish_complex.edge("g1")
        assert gamma is fish_complex.edge("γ1") is fish_complex.edge("1")
        assert gamma.ends == (0, 1)
        assert gamma.group == 1
        assert gamma.facets == frozenset({1, 2, 3, 4})
        assert fish_complex.facets_at(0) == (1, 2, 3, 4, 6)
        assert fish_complex.opposite_facet(0, gamma) == 6
        assert fish_complex.edge_between(1, 0) is gamma
        assert len(fish_complex.facet_vertices(5)) == 5
        assert [v.name for v in fish_complex.face_vertices({0, 1, 5, 6})] == ["v1", "v2", "v3", "v4"]

    @allure.story("Cells")
    @allure.title("Non-adjacent vertices and unknown names")
    def test_lookup_errors(self, fish_complex):
        with pytest.raises(AdjacencyError):
            fish_complex.edge_between(0, 3)
        with pytest.raises(KeyError):
            fish_complex.edge("γ99")
        with pytest.raises(KeyError):
            fish_complex.vertex("v11")

    @allure.story("Cells")
    @allure.title("Default edge names follow lexicographic endpoint order")
    def test_default_edge_names(self):
        complex_ = enumerate_cells(small_game("zero_three_two"))
        assert len(complex_.vertices) == 6
        assert len(complex_.edges) == 9
        assert [e.name for e in complex_.edges][:3] == ["γ1", "γ2", "γ3"]
        assert complex_.edges[0].ends == (0, 1)
        assert edge_label("gamma9") == "γ9"

    @allure.story("Cells")
    @allure.title("Edge labels must join adjacent vertices")
    def test_bad_edge_labels(self):
        document = dict(fish_document())
        edges = dict(document["edges"])
        edges["γ1"] = [1, 4]
        document["edges"] = edges
        with pytest.raises(GameSpecError, match="non-adjacent"):
            enumerate_cells(parse_game(document))
