"""
End-to-end tests of the command line: exit statuses, stdout summaries and
the artifacts written to the output directory.
"""

from pathlib import Path

import allure
import pandas as pd
import pytest
import yaml

from polymatrix.cli import EXIT_INPUT, EXIT_OK, EXIT_VERIFICATION, RunConfig, main

FISH = str(Path(__file__).parents[2] / "test_data" / "fish.yaml")
P0 = "0,1/2,1,0,0,0,0"


@pytest.mark.cli
@pytest.mark.integration
@allure.feature("Command Line")
class TestAnalyzeCommands:
    """analyze, skeleton and branches."""

    @pytest.mark.smoke
    @allure.story("analyze")
    @allure.title("analyze writes the character, edge, DOT and conservativity artifacts")
    def test_analyze(self, tmp_path, capsys):
        """
        Validates:
        - exit status 0
        - every artifact of the default formats is written
        - the summary lists the flowing edges
        """
        status = main(["analyze", FISH, "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert status == EXIT_OK
        for name in ("character.csv", "edges.csv", "flow.dot", "conservative.yaml"):
            assert (tmp_path / name).exists(), f"{name} missing"
        assert "flowing: γ1 γ5 γ6 γ9 γ11 γ13 γ14 γ15 γ19 γ20 γ21 γ23 γ24" in out
        character = pd.read_csv(tmp_path / "character.csv", dtype=str)
        assert character.shape == (10, 9)

    @allure.story("analyze")
    @allure.title("--format restricts the artifacts")
    def test_format_filter(self, tmp_path):
        assert main(["analyze", FISH, "--out", str(tmp_path), "--format", "dot"]) == EXIT_OK
        assert (tmp_path / "flow.dot").exists()
        assert not (tmp_path / "character.csv").exists()

    @allure.story("analyze")
    @allure.title("Artifacts are byte-identical across runs")
    def test_deterministic_artifacts(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert main(["analyze", FISH, "--out", str(first)]) == EXIT_OK
        assert main(["analyze", FISH, "--out", str(second)]) == EXIT_OK
        names = sorted(p.name for p in first.iterdir())
        assert names == sorted(p.name for p in second.iterdir())
        for name in names:
            assert (first / name).read_bytes() == (second / name).read_bytes(), f"{name} differs between runs"

    @allure.story("skeleton")
    @allure.title("A minimum structural set is found")
    def test_skeleton_find(self, tmp_path, capsys):
        assert main(["skeleton", FISH, "--find", "--out", str(tmp_path)]) == EXIT_OK
        assert "structural set: {γ1}" in capsys.readouterr().out

    @allure.story("skeleton")
    @allure.title("An invalid structural set exits with a witness cycle")
    def test_skeleton_invalid_set(self, tmp_path, capsys):
        status = main(["skeleton", FISH, "--structural-set", "γ13", "--out", str(tmp_path)])
        err = capsys.readouterr().err
        assert status == EXIT_VERIFICATION
        assert "verification failed: cycle avoiding the set" in err

    @allure.story("branches")
    @allure.title("branches lists every S-branch")
    def test_branches(self, tmp_path, capsys):
        assert main(["branches", FISH, "--out", str(tmp_path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "ξ1: 1 2 10 9 7 5 3 1 2" in out
        frame = pd.read_csv(tmp_path / "branches.csv", dtype=str)
        assert list(frame["branch"]) == ["ξ1", "ξ2", "ξ3", "ξ4", "ξ5"]


@pytest.mark.cli
@pytest.mark.integration
@allure.feature("Command Line")
class TestOrbitAndPoissonCommands:
    """iterate, verify-poisson, poisson and level-polygon."""

    @allure.story("iterate")
    @allure.title("The periodic point lies on the declared level")
    def test_iterate_level(self, tmp_path, capsys):
        status = main(["iterate", FISH, "--start", P0, "--steps", "40", "--level", "1/3,-1/2", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert status == EXIT_OK
        assert "level 1/3,-1/2 invariant: True" in out
        orbit = pd.read_csv(tmp_path / "orbit.csv", dtype=str)
        assert list(orbit.columns[:2]) == ["step", "branch"]

    @allure.story("iterate")
    @allure.title("A wrong level is a verification failure")
    def test_iterate_wrong_level(self, tmp_path):
        status = main(["iterate", FISH, "--start", P0, "--steps", "10", "--level", "0,0", "--out", str(tmp_path)])
        assert status == EXIT_VERIFICATION

    @allure.story("iterate")
    @allure.title("A start point off the sections is bad input")
    def test_iterate_off_section(self, tmp_path):
        status = main(["iterate", FISH, "--start", "1,1,1,1,1,1,1", "--steps", "10", "--out", str(tmp_path)])
        assert status == EXIT_INPUT

    @allure.story("verify-poisson")
    @allure.title("ξ1 is a Poisson map")
    def test_verify_poisson(self, tmp_path, capsys):
        assert main(["verify-poisson", FISH, "--branch", "ξ1", "--out", str(tmp_path)]) == EXIT_OK
        assert "ξ1: passed" in capsys.readouterr().out
        report = yaml.safe_load((tmp_path / "poisson_report.yaml").read_text(encoding="utf-8"))
        assert report["passed"] is True
        assert report["branches"][0]["branch"] == "ξ1"

    @allure.story("verify-poisson")
    @allure.title("Unknown branch names are bad input")
    def test_verify_unknown_branch(self, tmp_path):
        assert main(["verify-poisson", FISH, "--branch", "ξ9", "--out", str(tmp_path)]) == EXIT_INPUT

    @pytest.mark.slow
    @allure.story("poisson")
    @allure.title("Every Poisson identity of the fish network holds")
    def test_poisson(self, tmp_path, capsys):
        assert main(["poisson", FISH, "--out", str(tmp_path)]) == EXIT_OK
        assert "Poisson verification: passed" in capsys.readouterr().out
        report = yaml.safe_load((tmp_path / "poisson_report.yaml").read_text(encoding="utf-8"))
        assert report["passed"] is True
        text = (tmp_path / "poisson.txt").read_text(encoding="utf-8").splitlines()
        assert text[0] == "B_v1 in (y2, y3, y4, y5, y7):"

    @allure.story("level-polygon")
    @allure.title("Level polygon of ξ1 as CSV and SVG")
    def test_level_polygon(self, tmp_path, capsys):
        status = main(
            ["level-polygon", FISH, "--branch", "ξ1", "--level", "1/3,-1/2", "--proj", "2,3", "--out", str(tmp_path)]
        )
        assert status == EXIT_OK
        assert (tmp_path / "polygon.csv").exists()
        assert (tmp_path / "polygon.svg").exists()
        assert capsys.readouterr().out.startswith("ξ1 at level 1/3,-1/2")

    @allure.story("level-polygon")
    @allure.title("Projection indices are range checked")
    def test_bad_projection(self, tmp_path):
        status = main(
            ["level-polygon", FISH, "--branch", "ξ1", "--level", "1/3,-1/2", "--proj", "2,9", "--out", str(tmp_path)]
        )
        assert status == EXIT_INPUT


@pytest.mark.cli
@pytest.mark.integration
@allure.feature("Command Line")
class TestInputErrors:
    """Bad input exits with status 2 before anything is written."""

    @allure.story("Input")
    @allure.title("Missing game file")
    def test_missing_file(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["analyze", str(tmp_path / "missing.yaml"), "--out", str(out)]) == EXIT_INPUT
        assert "error:" in capsys.readouterr().err
        assert not out.exists()

    @allure.story("Input")
    @allure.title("Malformed game files")
    @pytest.mark.parametrize(
        "content",
        [
            "groups: [2\n",
            "groups: [2]\n",
            "groups: [2]\npayoff: [[0, 1], [x, 0]]\n",
            "- just\n- a list\n",
        ],
        ids=["invalid-yaml", "no-payoff", "non-rational", "not-a-mapping"],
    )
    def test_malformed_file(self, tmp_path, content):
        game = tmp_path / "bad.yaml"
        game.write_text(content, encoding="utf-8")
        assert main(["analyze", str(game), "--out", str(tmp_path / "out")]) == EXIT_INPUT

    @allure.story("Input")
    @allure.title("Negative ε is rejected before the game is read")
    def test_negative_epsilon(self, tmp_path):
        assert main(["converge", FISH, "--branch", "ξ1", "--eps", "0.3,-0.1", "--out", str(tmp_path)]) == EXIT_INPUT
        with pytest.raises(ValueError):
            RunConfig(command="converge", epsilons=(-0.1,)).validate()

    @allure.story("Input")
    @allure.title("Run configuration ranges")
    @pytest.mark.parametrize(
        "overrides",
        [{"delta": 1.5}, {"stride": 0}, {"samples": 0}, {"duration": -1.0}, {"formats": ("png",)}],
    )
    def test_run_config_ranges(self, overrides):
        with pytest.raises(ValueError):
            RunConfig(command="simulate", **overrides).validate()
