"""
Tests for the skeleton character, edge classification and structural sets.
"""

from fractions import Fraction

import allure
import pytest

from core.logger import log
from polymatrix.errors import StructuralSetError
from polymatrix.skeleton import (
    EdgeClass,
    FacetAudit,
    classify_edges,
    find_structural_set,
    heteroclinic_cycles,
    regularity_audit,
    skeleton_character,
    structural_set,
    verify_structural_set,
)
from polymatrix.test_data import fish_reference, small_game


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Skeleton Character")
class TestSkeletonCharacter:
    """χ^v_σ at every corner of the prism."""

    @pytest.mark.smoke
    @pytest.mark.golden
    @allure.story("Character")
    @allure.title("Fish character table matches the reference table")
    def test_fish_character(self, fish_character, fish_complex):
        """
        Validates:
        - every defined entry equals the reference value
        - entries off the facet are undefined
        """
        table = fish_reference("character")
        mismatches = []
        for vertex in fish_complex.vertices:
            for sigma, expected in enumerate(table[vertex.name]):
                actual = fish_character.get(vertex.index, sigma)
                wanted = None if expected == "*" else Fraction(expected)
                if actual != wanted:
                    mismatches.append((vertex.name, sigma + 1, actual, wanted))
        assert not mismatches, f"Character mismatches (vertex, σ, actual, expected): {mismatches}"

    @allure.story("Character")
    @allure.title("Accessors for rows, vectors and saddles")
    def test_accessors(self, fish_character):
        assert fish_character.row(0) == {1: 1, 2: 0, 3: 0, 4: 0, 6: -1}
        assert fish_character.vector(0) == (0, 1, 0, 0, 0, 0, -1)
        assert fish_character.chi(1, 5) == 1
        with pytest.raises(KeyError):
            fish_character.chi(0, 0)
        saddles = [fish_character.is_saddle(v) for v in range(10)]
        assert all(saddles), f"Every fish vertex should be a saddle: {saddles}"

    @allure.story("Character")
    @allure.title("Rock-paper-scissors corners")
    def test_rock_paper_scissors(self):
        character = skeleton_character(small_game("rock_paper_scissors"))
        assert character.row(0) == {1: -1, 2: 1}
        assert character.row(1) == {0: 1, 2: -1}


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Flow Graph")
class TestEdgeClassification:
    """Flowing, neutral and singular edges."""

    @pytest.mark.smoke
    @pytest.mark.golden
    @allure.story("Classification")
    @allure.title("Fish flowing and neutral edges")
    def test_fish_classification(self, fish_graph):
        """
        Validates:
        - the thirteen flowing edges
        - the twelve neutral edges, the printed list repeating γ16
        - no singular edge
        """
        assert fish_graph.flowing == fish_reference("flowing_edges")
        assert fish_graph.neutral == fish_reference("neutral_edges")
        printed = fish_reference("neutral_edges_printed")
        assert sorted(set(printed)) == sorted(fish_graph.neutral)
        assert printed.count("γ16") == 2
        assert fish_graph.singular == []
        assert fish_graph.flow_regular

    @allure.story("Classification")
    @allure.title("Orientation of flowing edges")
    def test_orientation(self, fish_graph):
        """
        Validates:
        - γ1 flows from v1 to v2, γ6 from v3 to v1
        - neutral edges have no orientation
        - out and in edges at a vertex
        """
        assert (fish_graph.source("γ1"), fish_graph.target("γ1")) == (0, 1)
        assert (fish_graph.source("γ6"), fish_graph.target("γ6")) == (2, 0)
        status = fish_graph.status("γ1")
        assert status.kind is EdgeClass.FLOWING
        assert status.corner_values == (-1, 1)
        with pytest.raises(StructuralSetError):
            fish_graph.source("γ2")
        assert fish_graph.out_edges(1) == ["γ9", "γ11", "γ13"]
        assert fish_graph.in_edges(0) == ["γ6"]
        assert fish_graph.edge_between(9, 8) == "γ5"

    @allure.story("Regularity")
    @allure.title("Facet audit")
    def test_regularity(self, fish_graph, fish_character):
        """
        Validates:
        - σ1 carries a nonzero character entry
        - the zero game degenerates on every facet
        """
        assert regularity_audit(fish_character, 0) is FacetAudit.NONZERO_CHARACTER
        assert set(fish_graph.facet_audit) == set(range(7))

        zero = classify_edges(skeleton_character(small_game("zero_three_two")))
        assert zero.flowing == [] and len(zero.neutral) == 9
        assert all(a is FacetAudit.DEGENERATE for a in zero.facet_audit.values())
        assert not zero.regular

    @allure.story("Regularity")
    @allure.title("Symbolic audit when every corner vanishes")
    def test_symbolic_audit(self):
        identity = skeleton_character(small_game("identity_segment"))
        log.info(f"Identity game character: {identity.values}")
        audit = regularity_audit(identity, 0)
        assert audit in (FacetAudit.NONZERO_CHARACTER, FacetAudit.NONZERO_SYMBOLIC)


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Flow Graph")
class TestStructuralSets:
    """Edge sets meeting every heteroclinic cycle."""

    @pytest.mark.smoke
    @pytest.mark.golden
    @allure.story("Structural set")
    @allure.title("{γ1} is a structural set of the fish network")
    def test_fish_structural_set(self, fish_graph):
        certificate = verify_structural_set(fish_graph, ["g1"])
        assert certificate.valid
        assert certificate.edges == ("γ1",)
        assert len(certificate.order) == 10, "Certificate should carry a topological order of all vertices"
        assert structural_set(fish_graph, ["γ1"]) == certificate

    @allure.story("Structural set")
    @allure.title("A set missing a cycle comes with that cycle")
    def test_invalid_set(self, fish_graph):
        """
        Validates:
        - {γ13} misses the cycles through γ9
        - the witness cycle avoids γ13 and consists of flowing edges
        """
        certificate = verify_structural_set(fish_graph, ["γ13"])
        assert not certificate.valid
        assert certificate.cycle, "Invalid set should come with a witness cycle"
        assert "γ13" not in certificate.cycle
        assert set(certificate.cycle) <= set(fish_graph.flowing)

    @allure.story("Structural set")
    @allure.title("Only flowing edges can form a structural set")
    def test_non_flowing(self, fish_graph):
        with pytest.raises(StructuralSetError):
            verify_structural_set(fish_graph, ["γ2"])

    @allure.story("Structural set")
    @allure.title("Search finds a minimum set")
    def test_find(self, fish_graph):
        found = find_structural_set(fish_graph)
        assert found.valid and len(found.edges) == 1
        assert found.edges == ("γ1",)
        assert structural_set(fish_graph).edges == ("γ1",)

    @allure.story("Structural set")
    @allure.title("Greedy fallback still returns a valid set")
    def test_greedy(self, fish_graph):
        found = find_structural_set(fish_graph, exhaustive_max=0)
        assert found.valid
        assert found.edges, "The fish network has cycles, the empty set cannot be structural"

    @allure.story("Cycles")
    @allure.title("Heteroclinic cycles of the fish network")
    def test_cycles(self, fish_graph):
        cycles = heteroclinic_cycles(fish_graph)
        log.info(f"Fish cycles: {cycles}")
        assert len(cycles) == 5
        assert all("γ1" in c for c in cycles)
        assert len(heteroclinic_cycles(fish_graph, limit=2)) == 2
