"""
Tests for exact iteration of the skeleton flow map, periodicity certificates,
the periodic-point search and spectra of cycle matrices.
"""

from fractions import Fraction

import allure
import pytest

from core.logger import log
from core.utils import parse_rational_vector
from polymatrix.errors import DomainError
from polymatrix.linalg import identity
from polymatrix.skeleton import (
    OrbitStatus,
    branch_matrix,
    certify_periodic,
    edge_polygon,
    eta_eval,
    find_periodic_points,
    iterate_skeleton,
    sample_section_point,
    spectrum,
)
from polymatrix.test_data import fish_reference

F = Fraction
INTERIOR_ATTEMPTS = 20


def _level():
    return parse_rational_vector(fish_reference("level"))


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Skeleton Orbits")
class TestPeriodicCertificates:
    """Exact periodicity along a branch word."""

    @pytest.mark.smoke
    @pytest.mark.golden
    @allure.story("Periodic points")
    @allure.title("period-4 orbit")
    def test_fish_periodic_point(self, fish_map):
        """
        Validates:
        - the point is fixed by the cycle matrix
        - every orbit point lies in the closed cone of its branch
        - the orbit matches the reference points
        """
        point = parse_rational_vector(fish_reference("periodic_point"))
        certificate = certify_periodic(fish_map, fish_reference("cycle_word"), point)
        assert certificate.valid, f"Certificate failed: in_cones={certificate.in_cones}, returns={certificate.returns}"
        assert certificate.period == 4
        expected = [parse_rational_vector(p) for p in fish_reference("periodic_orbit")]
        assert list(certificate.points[:4]) == expected
        assert certificate.points[4] == point

    @allure.story("Periodic points")
    @allure.title("Open cones reject the boundary orbit")
    def test_open_cones(self, fish_map):
        point = parse_rational_vector(fish_reference("periodic_point"))
        certificate = certify_periodic(fish_map, fish_reference("cycle_word"), point, closed=False)
        assert certificate.returns and certificate.matrix_fixed
        assert not certificate.valid, "The orbit lies on cone boundaries"

    @allure.story("Periodic points")
    @allure.title("Unknown branch names")
    def test_unknown_branch(self, fish_map):
        point = parse_rational_vector(fish_reference("periodic_point"))
        with pytest.raises(KeyError):
            certify_periodic(fish_map, ["ξ7"], point)


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Skeleton Orbits")
class TestIteration:
    """Exact orbits of π_S."""

    @allure.story("Iteration")
    @allure.title("Boundary points stop the orbit")
    def test_boundary_hit(self, fish_map, fish_level, fish):
        point = parse_rational_vector(fish_reference("periodic_point"))
        record = iterate_skeleton(fish_map, point, 10, fish_level, fish.casimirs)
        log.info(f"Orbit from the periodic point: {record.status.value} after {record.length} steps")
        assert record.status is OrbitStatus.BOUNDARY_HIT
        assert record.length < 10
        assert record.edge == "γ1"

    @pytest.mark.smoke
    @allure.story("Iteration")
    @allure.title("Interior orbit keeps its level")
    def test_interior_orbit(self, fish_map, fish_level, fish, rng):
        """
        Validates:
        - an interior section point iterates 200 steps exactly
        - η is the same at every step
        - the itinerary uses fish branches only
        - stride keeps every k-th point plus the last one
        """
        polygon = edge_polygon(fish_map, "γ1", _level(), fish_level, fish.casimirs)
        for attempt in range(INTERIOR_ATTEMPTS):
            start = sample_section_point(polygon, rng)
            record = iterate_skeleton(fish_map, start, 200, fish_level, fish.casimirs, stride=50)
            if record.status is not OrbitStatus.BOUNDARY_HIT:
                break
            log.warning(f"Draw {attempt + 1} hit a cone boundary at step {record.length}; redrawing")
        assert record.status is not OrbitStatus.BOUNDARY_HIT, f"No interior orbit in {INTERIOR_ATTEMPTS} draws"
        assert record.length == 200
        assert record.eta_invariant
        assert all(eta == _level() for eta in record.etas)
        assert record.steps == [0, 50, 100, 150, 200]
        assert set(record.itinerary) <= {b.name for b in fish_map.branches}
        frame = record.to_frame()
        assert list(frame.columns[:2]) == ["step", "branch"]
        assert "y7" in frame.columns and "eta2" in frame.columns
        assert len(frame) == 5

    @allure.story("Iteration")
    @allure.title("Iteration without a level functional")
    def test_without_level(self, fish_map):
        witness = fish_map.branch("ξ1").witness
        record = iterate_skeleton(fish_map, witness, 1)
        assert record.itinerary == ["ξ1"]
        assert record.points[-1] == fish_map.branch("ξ1").apply(witness)
        assert record.etas == [(), ()]

    @allure.story("Iteration")
    @allure.title("Invalid starts and parameters")
    @pytest.mark.parametrize(
        "y, steps, stride",
        [
            ((1, 0, 0, 0, 0, 0, 0), 5, 1),
            ((0, 1, 1, 1, 1, 0), 5, 1),
            ((0, 1, 1, 1, 1, 0, 0), -1, 1),
            ((0, 1, 1, 1, 1, 0, 0), 5, 0),
        ],
    )
    def test_domain_errors(self, fish_map, y, steps, stride):
        with pytest.raises(DomainError):
            iterate_skeleton(fish_map, y, steps, stride=stride)

    @allure.story("Iteration")
    @allure.title("Period detection on a recorded orbit")
    def test_period(self, fish_map):
        witness = fish_map.branch("ξ1").witness
        record = iterate_skeleton(fish_map, witness, 0)
        assert record.length == 0
        assert record.period() is None
        assert record.steps == [0]


@pytest.mark.skeleton
@pytest.mark.unit
@allure.feature("Skeleton Orbits")
class TestSpectrum:
    """Eigenvalues of cycle matrices."""

    @allure.story("Spectrum")
    @allure.title("Diagonal matrix")
    def test_diagonal(self):
        matrix = ((F(0), F(0), F(0)), (F(0), F(1), F(0)), (F(0), F(0), F(2)))
        result = spectrum(matrix)
        assert result.zero_multiplicity == 1
        assert result.unit_multiplicity == 1
        assert len(result.others) == 1
        assert result.unstable == pytest.approx(2.0)
        assert result.stable is None

    @allure.story("Spectrum")
    @allure.title("Identity has only unit eigenvalues")
    def test_identity(self):
        result = spectrum(identity(4))
        assert (result.zero_multiplicity, result.unit_multiplicity, result.others) == (0, 4, ())

    @pytest.mark.golden
    @allure.story("Spectrum")
    @allure.title("Cycle matrix of the period-4 orbit is a saddle")
    def test_fish_cycle_spectrum(self, fish_map):
        """
        Validates:
        - eigenvalue 0 with multiplicity 3 and 1 with multiplicity 2
        - a real unstable eigenvalue near 5.31174
        - stable and unstable eigenvalues are reciprocal
        """
        result = spectrum(branch_matrix(fish_map, fish_reference("cycle_word")))
        log.info(f"Cycle spectrum: 0^{result.zero_multiplicity} 1^{result.unit_multiplicity} {result.others}")
        assert result.zero_multiplicity == 3
        assert result.unit_multiplicity == 2
        tolerance = float(fish_reference("eigenvalue_tolerance"))
        assert result.unstable == pytest.approx(float(fish_reference("unstable_eigenvalue")), abs=tolerance)
        assert result.unstable * result.stable == pytest.approx(1.0, abs=1e-9)


@pytest.mark.skeleton
@pytest.mark.slow
@allure.feature("Skeleton Orbits")
class TestPeriodSearch:
    @pytest.mark.golden
    @allure.story("Periodic points")
    @allure.title("A period-14 orbit on the reference level")
    def test_long_period(self, fish_map, fish_level, fish):
        """
        Validates:
        - the search finds an orbit of exact period 14
        - the orbit is certified and lies on the level
        """
        period = int(fish_reference("long_period"))
        result = find_periodic_points(fish_map, period, _level(), fish_level, fish.casimirs, limit=1)
        log.info(f"Period search visited {result.nodes} nodes")
        assert result.orbits, f"No period-{period} orbit in {result.nodes} nodes"
        orbit = result.orbits[0]
        assert len(orbit.word) == period
        assert len(set(orbit.points)) == period
        assert certify_periodic(fish_map, orbit.word, orbit.points[0]).valid
        assert all(eta_eval(fish_level, fish.casimirs, p) == _level() for p in orbit.points)

    @allure.story("Periodic points")
    @allure.title("Period must be positive")
    def test_invalid_period(self, fish_map, fish_level, fish):
        with pytest.raises(DomainError):
            find_periodic_points(fish_map, 0, _level(), fish_level, fish.casimirs)
