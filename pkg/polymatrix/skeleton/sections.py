"""
Invariant level functionals of the skeleton flow and their planar sections.

η_q(y) = Σ λ_{α(i)} q_i y_i and η_w(y) = Σ w_i y_i are preserved by every
branch map; a level set cut with a closed branch cone is a convex polygon
whenever the section is two dimensional.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.logger import log
from polymatrix.conservative import HamiltonianSpec
from polymatrix.cones import AffineSection, ConeSector, Point2, polygon_area, section_polygon
from polymatrix.errors import DomainError, LevelSetDimensionError
from polymatrix.linalg import Vector, dot, to_fraction
from polymatrix.skeleton.branches import PiecewiseLinearMap

Equality = Tuple[Vector, Fraction]


def eta_eval(spec: HamiltonianSpec, casimirs: Sequence[Sequence], y: Sequence) -> Tuple:
    """(η_q(y), η_w1(y), ...); exact for rational y, float otherwise."""
    if all(isinstance(v, (int, Fraction)) for v in y):
        values = [dot(spec.coefficients, y)]
        values += [dot(tuple(to_fraction(c) for c in w), y) for w in casimirs]
        return tuple(values)
    values = [float(sum(float(c) * float(v) for c, v in zip(spec.coefficients, y)))]
    values += [float(sum(float(c) * float(v) for c, v in zip(w, y))) for w in casimirs]
    return tuple(values)


def level_equalities(spec: HamiltonianSpec, casimirs: Sequence[Sequence], level: Sequence) -> List[Equality]:
    """
    The equations η(y) = c.

    Raises:
        DomainError: If the level has the wrong number of components
    """
    level = tuple(to_fraction(v) for v in level)
    if len(level) != 1 + len(casimirs):
        log.error(f"Level {level} has {len(level)} components, expected {1 + len(casimirs)}")
        raise DomainError(f"level needs {1 + len(casimirs)} components, got {len(level)}")
    rows = [tuple(spec.coefficients)] + [tuple(to_fraction(c) for c in w) for w in casimirs]
    return list(zip(rows, level))


@dataclass(frozen=True)
class LevelPolygon:
    """
    Closed cone ∩ η^{-1}(c) as an exact convex polygon.

    Vertices are cyclic, in the section's own 2-D coordinates.
    """

    name: str
    level: Tuple[Fraction, ...]
    section: Optional[AffineSection]
    vertices: Tuple[Point2, ...]

    @property
    def empty(self) -> bool:
        return len(self.vertices) < 3

    @property
    def area(self) -> Fraction:
        return polygon_area(self.vertices)

    @property
    def ambient(self) -> Tuple[Vector, ...]:
        return tuple(self.section.point(t) for t in self.vertices)

    def project(self, first: int, second: int) -> List[Tuple[float, float]]:
        """Ambient vertices projected onto two facet coordinates (0-based)."""
        return [(float(y[first]), float(y[second])) for y in self.ambient]


def _cut(name: str, cone: ConeSector, spec: HamiltonianSpec, casimirs, level) -> LevelPolygon:
    equalities = level_equalities(spec, casimirs, level)
    try:
        section, vertices = section_polygon(cone, equalities)
    except LevelSetDimensionError as e:
        log.error(f"Level set of {name} has dimension {e.dimension}, not 2")
        raise
    result = LevelPolygon(name, tuple(b for _, b in equalities), section, tuple(vertices))
    log.debug(f"Level polygon of {name}: {len(result.vertices)} vertices, area {result.area}")
    return result


def level_polygon(pl: PiecewiseLinearMap, branch: str, level: Sequence, spec: HamiltonianSpec, casimirs) -> LevelPolygon:
    """
    Δ_{ξ,c} for one branch; an empty vertex list when the level misses the cone.

    Raises:
        LevelSetDimensionError: If the cut is not two dimensional
    """
    record = pl.branch(branch)
    return _cut(record.name, record.domain, spec, casimirs, level)


def edge_polygon(pl: PiecewiseLinearMap, edge: str, level: Sequence, spec: HamiltonianSpec, casimirs) -> LevelPolygon:
    """Δ_{γ,c}: the whole section of an edge of S at level c."""
    cone = pl.section_cone(edge)
    return _cut(edge, cone, spec, casimirs, level)


@dataclass(frozen=True)
class CoverageReport:
    edge: str
    edge_area: Fraction
    branch_areas: Dict[str, Fraction]

    @property
    def covered(self) -> bool:
        """Branch polygons tile the edge polygon up to measure zero."""
        return sum(self.branch_areas.values(), Fraction(0)) == self.edge_area


def coverage(pl: PiecewiseLinearMap, edge: str, level: Sequence, spec: HamiltonianSpec, casimirs) -> CoverageReport:
    whole = edge_polygon(pl, edge, level, spec, casimirs)
    areas = {b.name: level_polygon(pl, b.name, level, spec, casimirs).area for b in pl.branches_from(edge)}
    report = CoverageReport(whole.name, whole.area, areas)
    if not report.covered:
        log.warning(f"Branch polygons cover {sum(areas.values())} of {whole.area} on {whole.name}")
    return report


def sample_section_point(polygon: LevelPolygon, rng: np.random.Generator, weight_range: int = 1000) -> Vector:
    """
    Exact interior point of a level polygon: a positive random convex
    combination of its vertices.

    Raises:
        DomainError: If the polygon is degenerate
    """
    if polygon.empty or polygon.area == 0:
        raise DomainError(f"level polygon of {polygon.name} has no interior")
    weights = [Fraction(int(w)) for w in rng.integers(1, weight_range, size=len(polygon.vertices))]
    total = sum(weights, Fraction(0))
    t = (
        sum((w * v[0] for w, v in zip(weights, polygon.vertices)), Fraction(0)) / total,
        sum((w * v[1] for w, v in zip(weights, polygon.vertices)), Fraction(0)) / total,
    )
    return polygon.section.point(t)
