"""
Exact iteration of the skeleton flow map, periodicity certificates and the
periodic-point search on a level section.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy as sp

from core.config import config
from core.logger import log
from core.utils import format_rational
from polymatrix.cones import Point2, clip_polygon, polygon_area
from polymatrix.conservative import HamiltonianSpec
from polymatrix.errors import DomainError
from polymatrix.linalg import Rows, Vector, integer_scaled, mat_vec, to_fraction, to_sympy
from polymatrix.skeleton.branches import Branch, PiecewiseLinearMap, branch_matrix
from polymatrix.skeleton.sections import edge_polygon


class OrbitStatus(str, Enum):
    OK = "ok"
    BOUNDARY_HIT = "boundary_hit"


@dataclass
class OrbitRecord:
    """
    An exact orbit of π_S.

    itinerary[k] is the branch taking step k to step k+1; points and etas are
    recorded at the indices in `steps` (every `stride` steps plus the last one).
    """

    start: Vector
    edge: str
    itinerary: List[str] = field(default_factory=list)
    steps: List[int] = field(default_factory=list)
    points: List[Vector] = field(default_factory=list)
    etas: List[Tuple[Fraction, ...]] = field(default_factory=list)
    status: OrbitStatus = OrbitStatus.OK
    eta_invariant: bool = True

    @property
    def length(self) -> int:
        return len(self.itinerary)

    def period(self) -> Optional[int]:
        """Smallest k > 0 with y_k = y_0 among the recorded points."""
        for step, point in zip(self.steps[1:], self.points[1:]):
            if point == self.start:
                return step
        return None

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for step, point, eta in zip(self.steps, self.points, self.etas or [()] * len(self.points)):
            row = {"step": step, "branch": self.itinerary[step] if step < len(self.itinerary) else ""}
            row.update({f"y{k + 1}": format_rational(v) for k, v in enumerate(point)})
            row.update({f"eta{k + 1}": format_rational(v) for k, v in enumerate(eta)})
            rows.append(row)
        return pd.DataFrame(rows)


class _IntegerBranch:
    """A branch with integer matrix and sparse integer cone rows for the iteration loop."""

    def __init__(self, branch: Branch):
        self.name = branch.name
        self.end = branch.end
        self.matrix, self.denominator = integer_scaled(branch.matrix)
        self.rows = branch.domain.integer_rows()
        self.zeros = tuple(sorted(branch.domain.zero_coordinates))

    def contains(self, numerators: Sequence[int]) -> bool:
        if any(numerators[z] for z in self.zeros):
            return False
        return all(sum(c * numerators[k] for k, c in row) > 0 for row in self.rows)

    def apply(self, numerators: Sequence[int], denominator: int) -> Tuple[List[int], int]:
        image = [sum(c * v for c, v in zip(row, numerators) if c and v) for row in self.matrix]
        denominator *= self.denominator
        divisor = math.gcd(denominator, *image)
        return [v // divisor for v in image], denominator // divisor


def _to_integers(y: Sequence[Fraction]) -> Tuple[List[int], int]:
    (numerators,), denominator = integer_scaled([y])
    return list(numerators), denominator


def _start_edge(pl: PiecewiseLinearMap, y: Vector) -> str:
    for edge in pl.structural:
        if pl.section_cone(edge).contains(y, closed=True):
            return edge
    log.error(f"Point {tuple(format_rational(v) for v in y)} lies in no section of S")
    raise DomainError("initial point is outside the closed sections of the structural set")


def iterate_skeleton(
    pl: PiecewiseLinearMap,
    y0: Sequence,
    steps: int,
    spec: Optional[HamiltonianSpec] = None,
    casimirs: Sequence[Sequence] = (),
    stride: int = 1,
) -> OrbitRecord:
    """
    Iterate π_S exactly for up to `steps` steps.

    The orbit stops with status boundary_hit when no branch cone strictly
    contains the current point.

    Raises:
        DomainError: If y0 is outside the closed section of every edge in S
    """
    if steps < 0 or stride < 1:
        raise DomainError(f"steps must be >= 0 and stride >= 1, got {steps} and {stride}")
    y0 = tuple(to_fraction(v) for v in y0)
    if len(y0) != pl.dim:
        raise DomainError(f"point has {len(y0)} coordinates, expected {pl.dim}")
    edge = _start_edge(pl, y0)
    fast = {e: [_IntegerBranch(b) for b in pl.branches_from(e)] for e in pl.structural}

    eta_rows: Optional[Tuple[Tuple[int, ...], ...]] = None
    if spec is not None:
        eta_rows, eta_denominator = integer_scaled([spec.coefficients] + [tuple(to_fraction(c) for c in w) for w in casimirs])

    def eta_of(numerators: Sequence[int], denominator: int) -> Tuple[Fraction, ...]:
        if eta_rows is None:
            return ()
        return tuple(Fraction(sum(c * v for c, v in zip(row, numerators)), eta_denominator * denominator) for row in eta_rows)

    record = OrbitRecord(start=y0, edge=edge)
    numerators, denominator = _to_integers(y0)
    initial_eta = eta_of(numerators, denominator)

    def keep(step: int) -> None:
        record.steps.append(step)
        record.points.append(tuple(Fraction(v, denominator) for v in numerators))
        record.etas.append(eta_of(numerators, denominator))

    keep(0)
    for step in range(1, steps + 1):
        chosen = next((b for b in fast[edge] if b.contains(numerators)), None)
        if chosen is None:
            record.status = OrbitStatus.BOUNDARY_HIT
            log.warning(f"Orbit reached a cone boundary after {step - 1} steps on {edge}")
            break
        numerators, denominator = chosen.apply(numerators, denominator)
        edge = chosen.end
        record.itinerary.append(chosen.name)
        if eta_rows is not None and eta_of(numerators, denominator) != initial_eta:
            record.eta_invariant = False
        if step % stride == 0 or step == steps:
            keep(step)
    if record.steps[-1] != record.length:
        keep(record.length)
    log.info(f"Iterated {record.length} of {steps} steps from {record.edge}: {record.status.value}")
    return record


@dataclass(frozen=True)
class PeriodicCertificate:
    """Exact check that y returns to itself along a branch word, through every intermediate cone."""

    word: Tuple[str, ...]
    points: Tuple[Vector, ...]
    in_cones: Tuple[bool, ...]
    returns: bool
    matrix_fixed: bool

    @property
    def valid(self) -> bool:
        return self.returns and self.matrix_fixed and all(self.in_cones)

    @property
    def period(self) -> int:
        return len(self.word)


def certify_periodic(pl: PiecewiseLinearMap, word: Sequence[str], y: Sequence, closed: bool = True) -> PeriodicCertificate:
    """
    Certify M_word y = y with y_k in the (closed by default) cone of the k-th branch.

    Raises:
        ItineraryError: If the word does not chain
    """
    y = tuple(to_fraction(v) for v in y)
    matrix = branch_matrix(pl, word)
    branches = [pl.branch(name) for name in word]
    points = [y]
    inside = []
    for branch in branches:
        inside.append(branch.domain.contains(points[-1], closed=closed))
        points.append(branch.apply(points[-1]))
    certificate = PeriodicCertificate(
        word=tuple(b.name for b in branches),
        points=tuple(points),
        in_cones=tuple(inside),
        returns=points[-1] == y,
        matrix_fixed=mat_vec(matrix, y) == y,
    )
    log.debug(f"Periodicity certificate for {' '.join(certificate.word)}: {certificate.valid}")
    return certificate


@dataclass(frozen=True)
class PeriodicOrbit:
    word: Tuple[str, ...]
    points: Tuple[Vector, ...]


@dataclass
class PeriodSearchResult:
    period: int
    orbits: List[PeriodicOrbit]
    nodes: int
    exhausted: bool


Affine2 = Tuple[Tuple[Tuple[Fraction, Fraction], Tuple[Fraction, Fraction]], Tuple[Fraction, Fraction]]


def _section_map(branch: Branch, start_section, end_section) -> Affine2:
    """The branch map in 2-D section coordinates: t -> A t + f."""
    f = end_section.coords(branch.apply(start_section.origin))
    columns = []
    for basis in start_section.basis:
        image = end_section.coords(branch.apply(tuple(o + b for o, b in zip(start_section.origin, basis))))
        columns.append((image[0] - f[0], image[1] - f[1]))
    matrix = ((columns[0][0], columns[1][0]), (columns[0][1], columns[1][1]))
    return matrix, (f[0], f[1])


def _apply2(m: Affine2, t: Point2) -> Point2:
    (a, b), f = m
    return (a[0] * t[0] + a[1] * t[1] + f[0], b[0] * t[0] + b[1] * t[1] + f[1])


def _compose2(outer: Affine2, inner: Affine2) -> Affine2:
    (a, b), f = outer
    (c, d), g = inner
    matrix = (
        (a[0] * c[0] + a[1] * d[0], a[0] * c[1] + a[1] * d[1]),
        (b[0] * c[0] + b[1] * d[0], b[0] * c[1] + b[1] * d[1]),
    )
    return matrix, _apply2(outer, g)


def _fixed_point(m: Affine2) -> Optional[Point2]:
    (a, b), f = m
    g00, g01, g10, g11 = a[0] - 1, a[1], b[0], b[1] - 1
    det = g00 * g11 - g01 * g10
    if det == 0:
        return None
    return ((-f[0] * g11 + g01 * f[1]) / det, (g10 * f[0] - g00 * f[1]) / det)


def _inside(polygon: Sequence[Point2], t: Point2) -> bool:
    signs = set()
    for k, a in enumerate(polygon):
        b = polygon[(k + 1) % len(polygon)]
        cross = (b[0] - a[0]) * (t[1] - a[1]) - (b[1] - a[1]) * (t[0] - a[0])
        if cross:
            signs.add(cross > 0)
    return len(signs) <= 1


_IDENTITY2: Affine2 = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), (Fraction(0), Fraction(0))


def find_periodic_points(
    pl: PiecewiseLinearMap,
    period: int,
    level: Sequence,
    spec: HamiltonianSpec,
    casimirs: Sequence[Sequence],
    max_nodes: Optional[int] = None,
    limit: Optional[int] = None,
) -> PeriodSearchResult:
    """
    Periodic orbits of exact period `period` on the level section Δ_{S,c}.

    Depth-first search over branch words: the image of the cell of points
    following the word so far is carried as an exact polygon, cells of zero
    area are pruned, and at full depth the affine fixed-point equation is
    solved exactly and certified in closed cones.
    """
    if period < 1:
        raise DomainError(f"period must be positive, got {period}")
    max_nodes = config.period_search_max_nodes if max_nodes is None else max_nodes
    sections = {}
    for edge in pl.structural:
        whole = edge_polygon(pl, edge, level, spec, casimirs)
        if not whole.empty:
            sections[edge] = whole

    half_planes: Dict[str, list] = {}
    maps: Dict[str, Affine2] = {}
    for branch in pl.branches:
        if branch.start in sections and branch.end in sections:
            start_section = sections[branch.start].section
            half_planes[branch.name] = [start_section.half_plane(row) for row in branch.domain.inequalities]
            maps[branch.name] = _section_map(branch, start_section, sections[branch.end].section)

    found: Dict[frozenset, PeriodicOrbit] = {}
    nodes = 0
    exhausted = False
    for start, whole in sections.items():
        stack = [(start, tuple(whole.vertices), _IDENTITY2, ())]
        while stack and not exhausted:
            edge, image, composed, word = stack.pop()
            for branch in reversed(pl.branches_from(edge)):
                if branch.name not in maps:
                    continue
                nodes += 1
                if nodes > max_nodes:
                    exhausted = True
                    break
                cell = list(image)
                for half_plane in half_planes[branch.name]:
                    cell = clip_polygon(cell, half_plane)
                    if not cell:
                        break
                if polygon_area(cell) == 0:
                    continue
                step = maps[branch.name]
                next_image = tuple(_apply2(step, t) for t in cell)
                next_composed = _compose2(step, composed)
                next_word = word + (branch.name,)
                if len(next_word) < period:
                    stack.append((branch.end, next_image, next_composed, next_word))
                    continue
                if branch.end != start:
                    continue
                t = _fixed_point(next_composed)
                if t is None or not _inside(next_image, t):
                    continue
                y = whole.section.point(t)
                certificate = certify_periodic(pl, next_word, y)
                orbit_points = certificate.points[:period]
                if not certificate.valid or len(set(orbit_points)) != period:
                    continue
                key = frozenset(orbit_points)
                if key not in found:
                    found[key] = PeriodicOrbit(next_word, orbit_points)
                    log.debug(f"Period-{period} orbit along {' '.join(next_word)}")
                if limit is not None and len(found) >= limit:
                    stack.clear()
                    break
        if exhausted:
            log.warning(f"Period search stopped after {max_nodes} nodes")
            break
        if limit is not None and len(found) >= limit:
            break
    result = PeriodSearchResult(period, list(found.values()), nodes, exhausted)
    log.info(f"Found {len(result.orbits)} period-{period} orbits in {nodes} nodes")
    return result


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenvalues of a rational matrix: exact multiplicities of 0 and 1 and the
    remaining roots computed from the deflated characteristic polynomial.
    """

    zero_multiplicity: int
    unit_multiplicity: int
    others: Tuple[complex, ...]

    @property
    def unstable(self) -> Optional[float]:
        real = [v.real for v in self.others if abs(v.imag) < 1e-12 and abs(v) > 1]
        return max(real) if real else None

    @property
    def stable(self) -> Optional[float]:
        real = [v.real for v in self.others if abs(v.imag) < 1e-12 and 0 < abs(v) < 1]
        return min(real, key=abs) if real else None


def spectrum(matrix: Rows) -> Spectrum:
    x = sp.Symbol("x")
    poly = sp.Poly(to_sympy(matrix).charpoly(x).as_expr(), x)
    zero = 0
    while poly.degree() > 0 and poly.eval(0) == 0:
        poly = sp.quo(poly, sp.Poly(x, x))
        zero += 1
    unit = 0
    while poly.degree() > 0 and poly.eval(1) == 0:
        poly = sp.quo(poly, sp.Poly(x - 1, x))
        unit += 1
    coefficients = [float(c) for c in poly.all_coeffs()]
    roots = np.roots(coefficients) if len(coefficients) > 1 else np.array([])
    others = tuple(sorted((complex(r) for r in roots), key=abs))
    return Spectrum(zero, unit, others)
