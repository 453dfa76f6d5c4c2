"""
Asymptotic Poisson geometry of the skeleton.

Every vertex v carries a constant Poisson structure B_v = E_v A0 E_vᵀ on its
chart ℝ^{F_v} (facets of v in ascending order). Restricting to the level of
η and to one constraint coordinate gives a Dirac bracket; the branch maps of
the skeleton flow carry the incoming bracket to the outgoing one.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

from core.logger import log
from core.utils import format_rational_vector
from polymatrix.conservative import HamiltonianSpec, SkewDecomposition
from polymatrix.errors import AdjacencyError, ConstraintError, VerificationError
from polymatrix.game_core import CellComplex
from polymatrix.linalg import Rows, Vector, dot, from_sympy, identity, is_skew, mat_mul, mat_vec, to_fraction, to_sympy, transpose
from polymatrix.skeleton.branches import PiecewiseLinearMap, branch_matrix
from polymatrix.skeleton.character import CharacterTable


@dataclass(frozen=True)
class SectorPoisson:
    """E_v and B_v = E_v A0 E_vᵀ in the chart of a vertex."""

    vertex: int
    chart: Tuple[int, ...]
    embedding: Rows
    matrix: Rows

    def position(self, facet: int) -> int:
        return self.chart.index(facet)

    def restrict(self, vector: Sequence) -> Vector:
        """An ℝ^F vector read in this chart."""
        return tuple(to_fraction(vector[sigma]) for sigma in self.chart)


def _embedding(complex_: CellComplex, v: int) -> Rows:
    """E_v: row k has +1 at the strategy v plays in the group of k and -1 at k."""
    game = complex_.game
    vertex = complex_.vertices[v]
    rows = []
    for k in complex_.facets_at(v):
        row = [Fraction(0)] * game.n
        row[vertex.strategies[game.group_of[k]]] = Fraction(1)
        row[k] = Fraction(-1)
        rows.append(tuple(row))
    return tuple(rows)


def sector_poisson(decomposition: SkewDecomposition, complex_: CellComplex, v: int) -> SectorPoisson:
    chart = complex_.facets_at(v)
    embedding = _embedding(complex_, v)
    matrix = mat_mul(mat_mul(embedding, decomposition.skew), transpose(embedding))
    return SectorPoisson(v, chart, embedding, matrix)


def check_skeleton_hamiltonian(sector: SectorPoisson, character: CharacterTable, spec: HamiltonianSpec) -> bool:
    """χ^v = B_v ∇η_v in the chart of v, exactly."""
    gradient = sector.restrict(spec.coefficients)
    chi = sector.restrict(character.vector(sector.vertex))
    passed = mat_vec(sector.matrix, gradient) == chi
    if not passed:
        log.warning(f"Skeleton character of v{sector.vertex + 1} is not B_v ∇η_v")
    return passed


@dataclass(frozen=True)
class DiracStructure:
    """
    Dirac bracket at a vertex for the level of η and one constraint coordinate.

    kind is "r" for the constraint of an incoming edge and "s" for an outgoing
    one; the matrix lives in the full vertex chart with the constrained row and
    column equal to zero.
    """

    vertex: int
    kind: str
    facet: int
    chart: Tuple[int, ...]
    matrix: Rows

    def embedded(self, n: int) -> Rows:
        """The matrix on ℝ^F, zero off the chart."""
        full = [[Fraction(0)] * n for _ in range(n)]
        for a, sigma in enumerate(self.chart):
            for b, tau in enumerate(self.chart):
                full[sigma][tau] = self.matrix[a][b]
        return tuple(tuple(row) for row in full)


def dirac_matrix(sector: SectorPoisson, character: CharacterTable, kind: str, facet: int) -> DiracStructure:
    """
    (π^v_*)^♯ = B_v - C with c_lf = (χ_l b_{*f} + b_{l*} χ_f) / χ_*.

    Raises:
        ConstraintError: If the corner character at the constrained facet vanishes
    """
    if kind not in ("r", "s"):
        raise ValueError(f"constraint kind must be 'r' or 's', got {kind!r}")
    if facet not in sector.chart:
        raise ConstraintError(f"σ{facet + 1} is not a coordinate of the chart of v{sector.vertex + 1}")
    chi = sector.restrict(character.vector(sector.vertex))
    star = sector.position(facet)
    if chi[star] == 0:
        log.error(f"Corner character vanishes at (v{sector.vertex + 1}, σ{facet + 1})")
        raise ConstraintError(f"constraint not second-class at v{sector.vertex + 1}, σ{facet + 1}")
    b = sector.matrix
    size = len(sector.chart)
    matrix = tuple(
        tuple(b[l][f] - (chi[l] * b[star][f] + b[l][star] * chi[f]) / chi[star] for f in range(size)) for l in range(size)
    )
    return DiracStructure(sector.vertex, kind, facet, sector.chart, matrix)


def dirac_matrix_generic(sector: SectorPoisson, spec: HamiltonianSpec, facet: int) -> Rows:
    """B - B Gᵀ (G B Gᵀ)^{-1} G B with constraint rows (∇η_v, e_*)."""
    size = len(sector.chart)
    star = sector.position(facet)
    unit = [0] * size
    unit[star] = 1
    G = to_sympy([sector.restrict(spec.coefficients), unit])
    B = to_sympy(sector.matrix)
    brackets = G * B * G.T
    if brackets.det() == 0:
        raise ConstraintError(f"constraint not second-class at v{sector.vertex + 1}, σ{facet + 1}")
    return from_sympy(B - B * G.T * brackets.inv() * G * B)


def edge_dirac(sector: SectorPoisson, character: CharacterTable, edge: str, outgoing: bool) -> DiracStructure:
    """Dirac structure for the constraint of an edge at one of its ends."""
    complex_ = character.complex
    facet = complex_.opposite_facet(sector.vertex, complex_.edge(edge))
    return dirac_matrix(sector, character, "s" if outgoing else "r", facet)


@dataclass(frozen=True)
class TransitionMap:
    """
    Chart change P(y) = dP·y + t·e_r between adjacent vertices v and v'.

    In the changing group, v plays r and v' plays s: y_l -> y_l - y_s for
    l ∉ {r, s} and y_r -> -y_s + t; other groups are unchanged.
    """

    source: int
    target: int
    edge: str
    group: int
    r: int
    s: int
    source_chart: Tuple[int, ...]
    target_chart: Tuple[int, ...]
    linear: Rows

    def apply(self, y: Sequence, t: Fraction = Fraction(0)) -> Vector:
        image = list(mat_vec(self.linear, [to_fraction(v) for v in y]))
        image[self.target_chart.index(self.r)] += to_fraction(t)
        return tuple(image)


def transition_map(complex_: CellComplex, v: int, w: int) -> TransitionMap:
    """
    Build P_{v,w} and check dP·E_v = E_w exactly.

    Raises:
        AdjacencyError: If v and w do not share an edge
    """
    try:
        edge = complex_.edge_between(v, w)
    except AdjacencyError:
        log.error(f"No transition map between v{v + 1} and v{w + 1}")
        raise
    game = complex_.game
    r = complex_.vertices[v].strategies[edge.group]
    s = complex_.vertices[w].strategies[edge.group]
    source_chart, target_chart = complex_.facets_at(v), complex_.facets_at(w)
    position = {sigma: k for k, sigma in enumerate(source_chart)}
    rows = []
    for sigma in target_chart:
        row = [Fraction(0)] * len(source_chart)
        if game.group_of[sigma] != edge.group:
            row[position[sigma]] = Fraction(1)
        elif sigma == r:
            row[position[s]] = Fraction(-1)
        else:
            row[position[sigma]] = Fraction(1)
            row[position[s]] = Fraction(-1)
        rows.append(tuple(row))
    result = TransitionMap(v, w, edge.name, edge.group, r, s, source_chart, target_chart, tuple(rows))
    if mat_mul(result.linear, _embedding(complex_, v)) != _embedding(complex_, w):
        raise VerificationError(f"dP·E_v differs from E_w across {edge.name}")
    return result


def ambient_bracket_transport(transition: TransitionMap, source: SectorPoisson, target: SectorPoisson) -> bool:
    """dP·B_v·dPᵀ = B_w."""
    return mat_mul(mat_mul(transition.linear, source.matrix), transpose(transition.linear)) == target.matrix


def constraint_identities(transition: TransitionMap, spec: HamiltonianSpec, y: Sequence, t: Fraction) -> Dict[str, bool]:
    """
    Evaluate at one chart point y of v:

    - constraint: G_r(P y) = -G_s(y) + t
    - level: η_w(P y) = η_v(y) - λ_ξ G_s(y) + λ_ξ q_r t
    """
    y = tuple(to_fraction(v) for v in y)
    t = to_fraction(t)
    image = transition.apply(y, t)
    y_s = y[transition.source_chart.index(transition.s)]
    lam = spec.scaling[transition.group]
    eta_source = dot([spec.coefficients[sigma] for sigma in transition.source_chart], y)
    eta_target = dot([spec.coefficients[sigma] for sigma in transition.target_chart], image)
    return {
        "constraint": image[transition.target_chart.index(transition.r)] == -y_s + t,
        "level": eta_target == eta_source - lam * y_s + lam * spec.equilibrium[transition.r] * t,
    }


@dataclass(frozen=True)
class IdentityCheck:
    """One exact matrix identity with its residual."""

    label: str
    passed: bool
    residual: Rows

    @property
    def max_residual(self) -> Fraction:
        return max((abs(v) for row in self.residual for v in row), default=Fraction(0))


@dataclass(frozen=True)
class PathPoissonReport:
    word: Tuple[str, ...]
    vertex_checks: Tuple[IdentityCheck, ...]
    edge_checks: Tuple[IdentityCheck, ...]
    composed: IdentityCheck

    @property
    def passed(self) -> bool:
        return self.composed.passed and all(c.passed for c in self.vertex_checks + self.edge_checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "branch": " ".join(self.word),
            "vertices": {c.label: c.passed for c in self.vertex_checks},
            "edges": {c.label: c.passed for c in self.edge_checks},
            "composed": self.composed.passed,
            "max_residual": str(max([c.max_residual for c in self.vertex_checks + self.edge_checks + (self.composed,)])),
        }


def _check(label: str, left: Rows, right: Rows) -> IdentityCheck:
    residual = tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(left, right))
    return IdentityCheck(label, left == right, residual)


def _conjugate(matrix: Rows, structure: Rows) -> Rows:
    return mat_mul(mat_mul(matrix, structure), transpose(matrix))


class _Structures:
    """Sector brackets and Dirac structures computed on demand."""

    def __init__(self, character: CharacterTable, decomposition: SkewDecomposition):
        self.character = character
        self.decomposition = decomposition
        self._sectors: Dict[int, SectorPoisson] = {}

    def sector(self, v: int) -> SectorPoisson:
        if v not in self._sectors:
            self._sectors[v] = sector_poisson(self.decomposition, self.character.complex, v)
        return self._sectors[v]

    def dirac(self, v: int, edge: str, outgoing: bool) -> DiracStructure:
        return edge_dirac(self.sector(v), self.character, edge, outgoing)


def verify_path_poisson(
    pl: PiecewiseLinearMap,
    word: Union[str, Sequence[str]],
    decomposition: SkewDecomposition,
    structures: Optional[_Structures] = None,
) -> PathPoissonReport:
    """
    Check that a branch, or a chained word of branches, is a Poisson map.

    Per vertex: L π_r Lᵀ = π_s. Per edge between consecutive vertices:
    dP π_s dPᵀ = π_r in the chart of the next vertex. Composed:
    M π_start Mᵀ = π_end on ℝ^F. The empty word passes trivially.
    """
    word = (word,) if isinstance(word, str) else tuple(word)
    n = pl.dim
    if not word:
        return PathPoissonReport((), (), (), IdentityCheck("composed", True, identity(0)))
    structures = structures or _Structures(pl.graph.character, decomposition)
    complex_ = pl.graph.complex
    branches = [pl.branch(name) for name in word]
    matrix = branch_matrix(pl, word)
    steps = [step for branch in branches for step in branch.steps]

    vertex_checks = []
    for step in steps:
        incoming = structures.dirac(step.vertex, step.incoming, outgoing=False)
        outgoing = structures.dirac(step.vertex, step.outgoing, outgoing=True)
        pushed = _conjugate(step.matrix, incoming.embedded(n))
        vertex_checks.append(_check(f"v{step.vertex + 1}:{step.incoming}->{step.outgoing}", pushed, outgoing.embedded(n)))

    edge_checks = []
    for before, after in zip(steps, steps[1:]):
        transition = transition_map(complex_, before.vertex, after.vertex)
        leaving = structures.dirac(before.vertex, before.outgoing, outgoing=True)
        arriving = structures.dirac(after.vertex, after.incoming, outgoing=False)
        edge_checks.append(_check(before.outgoing, _conjugate(transition.linear, leaving.matrix), arriving.matrix))

    start = structures.dirac(steps[0].vertex, steps[0].incoming, outgoing=False)
    end = structures.dirac(steps[-1].vertex, steps[-1].outgoing, outgoing=True)
    composed = _check("composed", _conjugate(matrix, start.embedded(n)), end.embedded(n))
    report = PathPoissonReport(tuple(b.name for b in branches), tuple(vertex_checks), tuple(edge_checks), composed)
    log.debug(f"Poisson check of {' '.join(report.word)}: {report.passed}")
    return report


def hamiltonian_checks(character: CharacterTable, decomposition: SkewDecomposition, spec: HamiltonianSpec) -> Dict[int, bool]:
    """check_skeleton_hamiltonian at every vertex."""
    complex_ = character.complex
    return {
        v.index: check_skeleton_hamiltonian(sector_poisson(decomposition, complex_, v.index), character, spec) for v in complex_.vertices
    }


def poisson_report(pl: PiecewiseLinearMap, decomposition: SkewDecomposition, spec: HamiltonianSpec) -> Dict[str, Any]:
    """Full verification record: Hamiltonian identity per vertex, skewness, Dirac cross-check and every branch."""
    character = pl.graph.character
    complex_ = character.complex
    structures = _Structures(character, decomposition)
    hamiltonian = hamiltonian_checks(character, decomposition, spec)

    skew = {}
    cross = {}
    for vertex in complex_.vertices:
        sector = structures.sector(vertex.index)
        skew[vertex.name] = is_skew(sector.matrix)
        for facet in sector.chart:
            if character.chi(vertex.index, facet) == 0:
                continue
            closed_form = dirac_matrix(sector, character, "s", facet).matrix
            cross[f"{vertex.name}:σ{facet + 1}"] = closed_form == dirac_matrix_generic(sector, spec, facet)

    branches = [verify_path_poisson(pl, b.name, decomposition, structures) for b in pl.branches]
    passed = all(hamiltonian.values()) and all(skew.values()) and all(cross.values()) and all(r.passed for r in branches)
    log.info(f"Poisson verification over {len(branches)} branches: {'passed' if passed else 'FAILED'}")
    return {
        "passed": passed,
        "hamiltonian": {f"v{v + 1}": ok for v, ok in hamiltonian.items()},
        "skew": skew,
        "dirac_cross_check": cross,
        "branches": [r.to_dict() for r in branches],
    }


def format_matrix(matrix: Rows) -> List[str]:
    """Rows as '[a, b, ...]' with rationals as p/q."""
    return [format_rational_vector(row) for row in matrix]


def sector_table(decomposition: SkewDecomposition, complex_: CellComplex) -> List[str]:
    """Human-readable listing of every B_v."""
    lines = []
    for vertex in complex_.vertices:
        sector = sector_poisson(decomposition, complex_, vertex.index)
        chart = ", ".join(f"y{sigma + 1}" for sigma in sector.chart)
        lines.append(f"B_{vertex.name} in ({chart}):")
        lines.extend(f"  {row}" for row in format_matrix(sector.matrix))
    return lines
