"""
Reproduction of the reference fish-network values, end to end.
"""

import copy

import allure
import pytest

from core.logger import log
from polymatrix.game_core import parse_game
from polymatrix.reproduce import GOLDEN_ITEMS, reproduce_example
from polymatrix.test_data import fish_document

FAST_ITEMS = (
    "vertices",
    "cell_counts",
    "character_table",
    "saddle_vertices",
    "flowing_edges",
    "neutral_edges",
    "skew_decomposition",
    "formal_equilibrium",
    "casimir",
    "kernel_dimension",
    "structural_set",
    "branches",
    "cycle_matrix",
    "cycle_spectrum",
    "periodic_point",
    "periodic_point_level",
)


@pytest.mark.golden
@pytest.mark.integration
@allure.feature("Reproduction")
class TestReproduceExample:
    """Golden items against the bundled reference values."""

    @pytest.mark.smoke
    @allure.story("Golden items")
    @allure.title("Exact-arithmetic items pass")
    def test_fast_items(self):
        report = reproduce_example(items=FAST_ITEMS)
        log.info(report.text())
        assert [item.name for item in report.items] == list(FAST_ITEMS)
        assert report.passed, f"Failed items: {report.failed}"
        assert report.lines()[-1] == f"{len(FAST_ITEMS)}/{len(FAST_ITEMS)} items passed"

    @pytest.mark.slow
    @allure.story("Golden items")
    @allure.title("Every item passes")
    def test_full_report(self):
        """
        Validates:
        - items run in report order
        - every reference value is reproduced
        """
        report = reproduce_example(orbit_steps=2000)
        assert [item.name for item in report.items] == list(GOLDEN_ITEMS)
        assert report.passed, f"Failed items: {report.failed}\n{report.text()}"

    @allure.story("Golden items")
    @allure.title("Item order follows the report order, not the request")
    def test_item_order(self):
        report = reproduce_example(items=["cell_counts", "vertices"])
        assert [item.name for item in report.items] == ["vertices", "cell_counts"]

    @allure.story("Perturbation")
    @allure.title("A perturbed payoff fails at the character table")
    def test_perturbed_game(self):
        """
        Validates:
        - combinatorial items still pass
        - the first failing item is the character table, with expected and actual rows
        """
        document = copy.deepcopy(fish_document())
        document["payoff"][0][1] = 2
        game = parse_game(document)
        report = reproduce_example(game=game, items=FAST_ITEMS[:6])
        log.info(report.text())
        assert not report.passed
        assert report.failed[0] == "character_table"
        passed = {item.name for item in report.items if item.passed}
        assert {"vertices", "cell_counts"} <= passed
        text = report.text()
        assert "FAIL  character_table" in text
        assert "expected:" in text and "actual:" in text

    @allure.story("Determinism")
    @allure.title("Report text is identical across runs")
    def test_deterministic_text(self):
        first = reproduce_example(items=FAST_ITEMS[:10]).text()
        second = reproduce_example(items=FAST_ITEMS[:10]).text()
        assert first == second
