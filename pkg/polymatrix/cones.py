"""
Polyhedral cones and planar sections.

A ConeSector is an open polyhedral cone in ℝ^F: a set of strict linear
inequalities together with coordinates pinned to zero. A margin-maximising
linear program proposes a witness or an emptiness certificate; either is
verified in rationals, and inconclusive cases go to exact elimination.
Two-dimensional affine sections of cones are handled as exact convex
polygons.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from core.config import config
from core.logger import log
from polymatrix.errors import DomainError, LevelSetDimensionError
from polymatrix.linalg import Vector, dot, left_inverse, mat_vec, minimal_norm, primitive_integer, solve_affine

Point2 = Tuple[Fraction, Fraction]
HalfPlane = Tuple[Tuple[Fraction, Fraction], Fraction]
Inequality = Tuple[Tuple[Fraction, ...], Fraction]

SECTION_BOX = Fraction(2**40)


def _normalize_row(row: Sequence[Fraction], zero_coordinates: FrozenSet[int]) -> Tuple[int, ...]:
    reduced = [Fraction(0) if k in zero_coordinates else Fraction(v) for k, v in enumerate(row)]
    return tuple(int(v) for v in primitive_integer(reduced))


def _eliminate(system: Sequence[Inequality], position: int) -> List[Inequality]:
    """
    One Fourier-Motzkin step on rows a·y >= b: project out coordinate `position`.

    Rows are scaled to unit max-norm; among rows with equal coefficients only
    the largest right-hand side is kept, and satisfied constant rows are dropped.
    """
    positive = [row for row in system if row[0][position] > 0]
    negative = [row for row in system if row[0][position] < 0]
    combined = [row for row in system if row[0][position] == 0]
    for a_pos, b_pos in positive:
        for a_neg, b_neg in negative:
            p, n = a_pos[position], -a_neg[position]
            combined.append((tuple(n * u + p * v for u, v in zip(a_pos, a_neg)), n * b_pos + p * b_neg))
    strongest = {}
    for a, b in combined:
        norm = max(abs(c) for c in a)
        if norm == 0:
            if b > 0:
                return [(a, b)]
            continue
        a, b = tuple(c / norm for c in a), b / norm
        if a not in strongest or b > strongest[a]:
            strongest[a] = b
    return list(strongest.items())


def _pick_value(system: Sequence[Inequality], values: Sequence[Fraction], position: int) -> Fraction:
    """Value of coordinate `position` satisfying every row, the later coordinates being fixed."""
    lower: Optional[Fraction] = None
    upper: Optional[Fraction] = None
    for a, b in system:
        if a[position] == 0:
            continue
        bound = (b - sum((a[k] * values[k] for k in range(position + 1, len(a))), Fraction(0))) / a[position]
        if a[position] > 0:
            lower = bound if lower is None else max(lower, bound)
        else:
            upper = bound if upper is None else min(upper, bound)
    if lower is not None and upper is not None:
        return (lower + upper) / 2
    if lower is not None:
        return lower
    if upper is not None:
        return upper
    return Fraction(0)


@dataclass(frozen=True)
class ConeSector:
    """
    {y ∈ ℝ^dim : y_z = 0 for z in zero_coordinates, row·y > 0 for every row}.

    Rows are stored as primitive integer vectors with zero entries on the
    pinned coordinates, deduplicated and sorted.
    """

    dim: int
    inequalities: Tuple[Tuple[int, ...], ...]
    zero_coordinates: FrozenSet[int]

    @classmethod
    def build(cls, dim: int, inequalities: Iterable[Sequence[Fraction]], zero_coordinates: Iterable[int]) -> "ConeSector":
        zeros = frozenset(zero_coordinates)
        rows = sorted({_normalize_row(r, zeros) for r in inequalities})
        return cls(dim, tuple(rows), zeros)

    @property
    def free_coordinates(self) -> Tuple[int, ...]:
        return tuple(k for k in range(self.dim) if k not in self.zero_coordinates)

    @property
    def trivially_empty(self) -> bool:
        """A zero row reads 0 > 0."""
        return any(not any(r) for r in self.inequalities)

    def slacks(self, y: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        return tuple(dot(r, y) for r in self.inequalities)

    def contains(self, y: Sequence[Fraction], closed: bool = False) -> bool:
        if any(y[z] != 0 for z in self.zero_coordinates):
            return False
        if closed:
            return all(s >= 0 for s in self.slacks(y))
        return all(s > 0 for s in self.slacks(y))

    def intersect(self, other: "ConeSector") -> "ConeSector":
        return ConeSector.build(self.dim, self.inequalities + other.inequalities, self.zero_coordinates | other.zero_coordinates)

    def pullback(self, matrix: Sequence[Sequence[Fraction]], zero_coordinates: Iterable[int]) -> "ConeSector":
        """Preimage {y : M y satisfies the inequalities} on a domain with the given pinned coordinates."""
        cols = list(zip(*matrix))
        rows = [tuple(dot(r, c) for c in cols) for r in self.inequalities]
        return ConeSector.build(self.dim, rows, zero_coordinates)

    def integer_rows(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """Sparse (index, coefficient) form used by the exact iteration loop."""
        return tuple(tuple((k, c) for k, c in enumerate(r) if c) for r in self.inequalities)

    def max_margin(self) -> Tuple[float, Optional[np.ndarray]]:
        """
        Maximise s subject to r̂·y >= s with |y_k| <= 1 on the free coordinates.

        Rows are scaled to unit max-norm. Returns (margin, y) or (-inf, None)
        when the program fails.
        """
        free = self.free_coordinates
        if self.trivially_empty or not free:
            return float("-inf"), None
        if not self.inequalities:
            return 1.0, np.array([0.0 if k in self.zero_coordinates else 1.0 for k in range(self.dim)])

        scaled = []
        for r in self.inequalities:
            norm = max(abs(c) for c in r)
            scaled.append([r[k] / norm for k in free])
        a = np.array(scaled, dtype=float)
        m, k = a.shape
        c = np.zeros(k + 1)
        c[-1] = -1.0
        a_ub = np.hstack([-a, np.ones((m, 1))])
        b_ub = np.zeros(m)
        bounds = [(-1.0, 1.0)] * k + [(None, 1.0)]
        result = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        if result.status != 0:
            log.debug(f"Cone margin LP ended with status {result.status}: {result.message}")
            return float("-inf"), None
        y = np.zeros(self.dim)
        y[list(free)] = result.x[:-1]
        return float(-result.fun), y

    def witness(self, tol: Optional[float] = None, max_denominator: Optional[int] = None) -> Optional[Vector]:
        """
        Exact rational interior point, or None when the cone is empty.

        The LP solution is rounded with growing denominators until the strict
        inequalities verify in exact arithmetic. A thin margin or a failed
        rounding is inconclusive: an exact emptiness certificate is tried
        first, then exact elimination decides.
        """
        if self.trivially_empty or not self.free_coordinates:
            return None
        tol = config.lp_margin_tol if tol is None else tol
        max_denominator = config.rational_max_denominator if max_denominator is None else max_denominator
        margin, y = self.max_margin()
        if y is not None and margin > tol:
            for denominator in (max_denominator, max_denominator * 1000, max_denominator * 10**6):
                candidate = tuple(
                    Fraction(0) if k in self.zero_coordinates else Fraction(float(y[k])).limit_denominator(denominator)
                    for k in range(self.dim)
                )
                if self.contains(candidate):
                    return candidate
            log.debug(f"LP margin {margin:.3e} did not survive exact rounding")
        if self.farkas_certificate() is not None:
            return None
        return self.exact_witness()

    def certifies_emptiness(self, weights: Sequence[Fraction]) -> bool:
        """Nonnegative, not all zero, and the weighted row sum vanishes."""
        if len(weights) != len(self.inequalities) or any(w < 0 for w in weights) or not any(weights):
            return False
        return all(sum((w * r[k] for w, r in zip(weights, self.inequalities)), Fraction(0)) == 0 for k in range(self.dim))

    def farkas_certificate(self, max_denominator: Optional[int] = None) -> Optional[Tuple[Fraction, ...]]:
        """
        Exact proof of emptiness: weights w >= 0, not all zero, with Σ w_i r_i = 0.

        HiGHS proposes the weights; they are re-solved exactly on their support
        (or rationalised) and verified. None means no certificate was found,
        not that the cone is nonempty.
        """
        max_denominator = config.rational_max_denominator if max_denominator is None else max_denominator
        free = self.free_coordinates
        m = len(self.inequalities)
        if m == 0:
            return None
        a_eq = np.array([[r[k] for r in self.inequalities] for k in free] + [[1.0] * m], dtype=float)
        b_eq = np.zeros(len(free) + 1)
        b_eq[-1] = 1.0
        result = linprog(np.zeros(m), A_eq=a_eq, b_eq=b_eq, bounds=[(0.0, None)] * m, method="highs")
        if result.status != 0:
            return None
        support = [i for i in range(m) if result.x[i] > 1e-12]
        if not support:
            return None

        candidates = []
        rows = [[Fraction(self.inequalities[i][k]) for i in support] for k in free] + [[Fraction(1)] * len(support)]
        solved = solve_affine(rows, [Fraction(0)] * len(free) + [Fraction(1)], len(support))
        if solved is not None and not solved[1]:
            candidates.append(solved[0])
        candidates.append(tuple(Fraction(float(result.x[i])).limit_denominator(max_denominator) for i in support))
        for candidate in candidates:
            weights = [Fraction(0)] * m
            for i, w in zip(support, candidate):
                weights[i] = w
            if self.certifies_emptiness(weights):
                log.debug(f"Cone in ℝ^{self.dim} is empty: certificate on {len(support)} rows")
                return tuple(weights)
        return None

    def exact_witness(self) -> Optional[Vector]:
        """
        Fourier-Motzkin decision of r·y >= 1 for every row, in rationals.

        The cone is nonempty exactly when this system is, so None is a proof of
        emptiness: elimination produced a row reading 0 >= b with b > 0.
        """
        if self.trivially_empty:
            return None
        free = self.free_coordinates
        system = [(tuple(Fraction(r[k]) for k in free), Fraction(1)) for r in self.inequalities]
        stages = []
        for position in range(len(free)):
            stages.append(system)
            system = _eliminate(system, position)
            if any(not any(a) and b > 0 for a, b in system):
                log.debug(f"Cone in ℝ^{self.dim} is empty: elimination reached 0 >= b > 0")
                return None
        values: List[Fraction] = [Fraction(0)] * len(free)
        for position in reversed(range(len(free))):
            values[position] = _pick_value(stages[position], values, position)
        point = [Fraction(0)] * self.dim
        for k, v in zip(free, values):
            point[k] = v
        candidate = tuple(point)
        if not self.contains(candidate):
            raise DomainError("exact elimination produced a point outside the cone")
        log.debug(f"Cone in ℝ^{self.dim} settled by exact elimination")
        return candidate

    def is_feasible(self) -> bool:
        return self.witness() is not None


@dataclass(frozen=True)
class AffineSection:
    """Affine subspace {origin + Σ t_k basis_k} of ℝ^dim with an exact parametrisation."""

    origin: Vector
    basis: Tuple[Vector, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def point(self, t: Sequence[Fraction]) -> Vector:
        return tuple(o + sum((tk * b[i] for tk, b in zip(t, self.basis)), Fraction(0)) for i, o in enumerate(self.origin))

    def coords(self, y: Sequence[Fraction]) -> Tuple[Fraction, ...]:
        """Section coordinates of an ambient point; raises DomainError off the subspace."""
        shifted = tuple(a - b for a, b in zip(y, self.origin))
        t = mat_vec(left_inverse(list(zip(*self.basis))), shifted)
        if self.point(t) != tuple(y):
            raise DomainError("point does not lie on the section")
        return t

    def half_plane(self, row: Sequence[Fraction]) -> HalfPlane:
        """row·y >= 0 rewritten as a·t >= b."""
        a = tuple(dot(row, b) for b in self.basis)
        return (a[0], a[1]), -dot(row, self.origin)


def affine_section(dim: int, equalities: Sequence[Tuple[Sequence[Fraction], Fraction]]) -> Optional[AffineSection]:
    """Solve the equality system exactly; None when it is inconsistent."""
    rows = [tuple(Fraction(v) for v in r) for r, _ in equalities]
    rhs = [Fraction(b) for _, b in equalities]
    solved = solve_affine(rows, rhs, dim)
    if solved is None:
        return None
    particular, kernel = solved
    basis = tuple(primitive_integer(v) for v in kernel)
    return AffineSection(minimal_norm(particular, basis), basis)


def cone_section(cone: ConeSector, equalities: Sequence[Tuple[Sequence[Fraction], Fraction]]) -> Optional[AffineSection]:
    """Affine hull of the pinned coordinates together with extra equalities."""
    pinned = [(tuple(Fraction(int(k == z)) for k in range(cone.dim)), Fraction(0)) for z in sorted(cone.zero_coordinates)]
    return affine_section(cone.dim, pinned + list(equalities))


def clip_polygon(vertices: Sequence[Point2], half_plane: HalfPlane) -> List[Point2]:
    """Exact Sutherland-Hodgman clip of a convex polygon by a·t >= b."""
    (a0, a1), b = half_plane
    if not vertices:
        return []
    result: List[Point2] = []
    count = len(vertices)
    for k in range(count):
        current = vertices[k]
        following = vertices[(k + 1) % count]
        value_current = a0 * current[0] + a1 * current[1] - b
        value_following = a0 * following[0] + a1 * following[1] - b
        if value_current >= 0:
            result.append(current)
        if (value_current > 0 > value_following) or (value_current < 0 < value_following):
            ratio = value_current / (value_current - value_following)
            result.append((current[0] + ratio * (following[0] - current[0]), current[1] + ratio * (following[1] - current[1])))
    deduped: List[Point2] = []
    for point in result:
        if not deduped or deduped[-1] != point:
            deduped.append(point)
    if len(deduped) > 1 and deduped[0] == deduped[-1]:
        deduped.pop()
    return deduped


def polygon_area(vertices: Sequence[Point2]) -> Fraction:
    """Unsigned exact shoelace area."""
    count = len(vertices)
    if count < 3:
        return Fraction(0)
    twice = sum(
        (vertices[k][0] * vertices[(k + 1) % count][1] - vertices[(k + 1) % count][0] * vertices[k][1] for k in range(count)),
        Fraction(0),
    )
    return abs(twice) / 2


def box_polygon(bound: Fraction = SECTION_BOX) -> List[Point2]:
    return [(-bound, -bound), (bound, -bound), (bound, bound), (-bound, bound)]


def polygon_from_half_planes(half_planes: Iterable[HalfPlane], bound: Fraction = SECTION_BOX) -> List[Point2]:
    """
    Exact bounded intersection of half-planes.

    Raises:
        DomainError: If the intersection reaches the bounding box
    """
    polygon = box_polygon(bound)
    for half_plane in half_planes:
        polygon = clip_polygon(polygon, half_plane)
        if not polygon:
            return []
    if any(abs(c) == bound for point in polygon for c in point):
        raise DomainError("section polygon is unbounded")
    return polygon


def section_polygon(cone: ConeSector, equalities: Sequence[Tuple[Sequence[Fraction], Fraction]]) -> Tuple[Optional[AffineSection], List[Point2]]:
    """
    Closed cone intersected with an affine level set, as an exact polygon.

    Raises:
        LevelSetDimensionError: If the affine section is not two dimensional
    """
    section = cone_section(cone, equalities)
    if section is None:
        return None, []
    if section.dimension != 2:
        raise LevelSetDimensionError(section.dimension)
    polygon = polygon_from_half_planes(section.half_plane(r) for r in cone.inequalities)
    return section, polygon

