"""
Reproduction of the reference fish-network values.

Every golden item is checked independently against the reference section of
the bundled fish.yaml; an item that raises is reported as failed with the
error, and the remaining items still run. The text report contains no
timings or random output, so it is byte-identical across runs.
"""

import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from core.config import config
from core.logger import log
from core.utils import format_rational, format_rational_vector, parse_rational, parse_rational_vector
from polymatrix.analysis import Analysis
from polymatrix.conservative import is_formal_equilibrium, rational_matrix, verify_skew_decomposition
from polymatrix.game_core import GameSpec
from polymatrix.linalg import mat_mul, mat_vec, nullspace, transpose
from polymatrix.poisson_asym import edge_dirac, hamiltonian_checks, sector_poisson, verify_path_poisson
from polymatrix.skeleton.branches import branch_label, branch_matrix, branch_table, vertex_branch
from polymatrix.skeleton.orbits import OrbitStatus, certify_periodic, find_periodic_points, iterate_skeleton, spectrum
from polymatrix.skeleton.sections import edge_polygon, eta_eval, sample_section_point
from polymatrix.test_data import fish_document

Outcome = Tuple[bool, str, str]


@dataclass(frozen=True)
class GoldenItem:
    name: str
    passed: bool
    expected: str = ""
    actual: str = ""


@dataclass
class ReproduceReport:
    game: str
    items: List[GoldenItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    @property
    def failed(self) -> List[str]:
        return [item.name for item in self.items if not item.passed]

    def lines(self) -> List[str]:
        lines = [f"Reproduction report for '{self.game}'", ""]
        for item in self.items:
            lines.append(f"{'PASS' if item.passed else 'FAIL'}  {item.name}")
            if not item.passed:
                lines.append(f"      expected: {item.expected}")
                lines.append(f"      actual:   {item.actual}")
        lines += ["", f"{len(self.items) - len(self.failed)}/{len(self.items)} items passed"]
        return lines

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"


def _rows(matrix) -> str:
    return "[" + "; ".join(format_rational_vector(row) for row in matrix) + "]"


def _restrict(matrix, chart) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(matrix[a][b] for b in chart) for a in chart)


class _Golden:
    """Golden checks over one analysis and the reference mapping, in report order."""

    def __init__(self, analysis: Analysis, reference: Dict[str, Any], orbit_steps: int):
        self.analysis = analysis
        self.ref = reference
        self.orbit_steps = orbit_steps

    def vertices(self) -> Outcome:
        expected = {name: list(label) for name, label in self.ref["vertices"].items()}
        actual = {v.name: list(v.label) for v in self.analysis.complex.vertices}
        return expected == actual, str(expected), str(actual)

    def cell_counts(self) -> Outcome:
        complex_ = self.analysis.complex
        expected = (self.ref["facet_count"], self.ref["edge_count"])
        actual = (len(complex_.facets), len(complex_.edges))
        return expected == actual, f"facets={expected[0]} edges={expected[1]}", f"facets={actual[0]} edges={actual[1]}"

    def character_table(self) -> Outcome:
        character = self.analysis.character
        mismatches = []
        for vertex in self.analysis.complex.vertices:
            expected = ["∗" if v == "*" else format_rational(parse_rational(v)) for v in self.ref["character"][vertex.name]]
            values = [character.get(vertex.index, sigma) for sigma in self.analysis.complex.facets]
            actual = ["∗" if v is None else format_rational(v) for v in values]
            if expected != actual:
                mismatches.append((vertex.name, expected, actual))
        if not mismatches:
            return True, "", ""
        name, expected, actual = mismatches[0]
        return False, f"{name}: {expected}", f"{name}: {actual} ({len(mismatches)} rows differ)"

    def saddle_vertices(self) -> Outcome:
        non_saddles = [f"v{v + 1}" for v, saddle in self.analysis.graph.saddles.items() if not saddle]
        return not non_saddles, "every vertex a saddle", f"not saddles: {non_saddles}"

    def flowing_edges(self) -> Outcome:
        expected = list(self.ref["flowing_edges"])
        actual = self.analysis.graph.flowing
        return expected == actual, str(expected), str(actual)

    def neutral_edges(self) -> Outcome:
        printed = list(self.ref["neutral_edges_printed"])
        repeated = sorted(name for name, count in Counter(printed).items() if count > 1)
        if repeated:
            log.warning(f"Printed neutral-edge list repeats {', '.join(repeated)}; compared as a set")
        expected = list(self.ref["neutral_edges"])
        actual = self.analysis.graph.neutral
        passed = expected == actual and set(printed) == set(actual)
        return passed, f"{expected} (printed list repeats {repeated})", str(actual)

    def skew_decomposition(self) -> Outcome:
        game = self.analysis.game
        scaling = (1,) * game.p
        verify_skew_decomposition(game, game.payoff, scaling)
        found = self.analysis.decomposition
        passed = found.skew == game.payoff and found.scaling == tuple(Fraction(v) for v in scaling)
        return passed, f"A0 = A, λ = {format_rational_vector(scaling)}", f"λ = {format_rational_vector(found.scaling)}"

    def formal_equilibrium(self) -> Outcome:
        q = self.analysis.conservative.formal_equilibrium
        return is_formal_equilibrium(self.analysis.game, q), format_rational_vector(q), "not a formal equilibrium"

    def casimir(self) -> Outcome:
        game = self.analysis.game
        failures = []
        for w in self.analysis.conservative.casimirs:
            in_kernel = not any(mat_vec(game.payoff, w))
            balanced = all(sum(w[i] for i in game.members(a)) == 0 for a in range(game.p))
            if not (in_kernel and balanced):
                failures.append(format_rational_vector(w))
        return not failures, "Casimirs in Ker(A) ∩ H0", f"outside: {failures}"

    def kernel_dimension(self) -> Outcome:
        dimension = len(nullspace([list(row) for row in self.analysis.game.payoff]))
        return dimension == 3, "3", str(dimension)

    def structural_set(self) -> Outcome:
        certificate = self.analysis.structural
        expected = list(self.ref["structural_set"])
        return certificate.valid and list(certificate.edges) == expected, str(expected), str(list(certificate.edges))

    def branches(self) -> Outcome:
        expected = {branch_label(k): tuple(v) for k, v in self.ref["branches"].items()}
        actual = branch_table(self.analysis.skeleton_map)
        return expected == actual, str(expected), str(actual)

    def sector_brackets(self) -> Outcome:
        analysis = self.analysis
        for name, data in self.ref["sector_brackets"].items():
            vertex = analysis.complex.vertex(name)
            sector = sector_poisson(analysis.decomposition, analysis.complex, vertex.index)
            chart = [sigma + 1 for sigma in sector.chart]
            expected = rational_matrix(data["matrix"])
            if chart != list(data["chart"]) or sector.matrix != expected:
                return False, f"B_{name} on {data['chart']} = {_rows(expected)}", f"B_{name} on {chart} = {_rows(sector.matrix)}"
        return True, "", ""

    def dirac_brackets(self) -> Outcome:
        analysis = self.analysis
        sector = sector_poisson(analysis.decomposition, analysis.complex, 0)
        for kind, outgoing in (("outgoing", True), ("incoming", False)):
            data = self.ref["dirac_v1"][kind]
            structure = edge_dirac(sector, analysis.character, data["edge"], outgoing)
            expected = rational_matrix(data["matrix"])
            if structure.matrix != expected:
                return False, f"{kind} {data['edge']}: {_rows(expected)}", f"{kind} {data['edge']}: {_rows(structure.matrix)}"
        return True, "", ""

    def vertex_map(self) -> Outcome:
        """L for the incoming edge, with the column of its constrained coordinate zeroed, in the chart of v1."""
        data = self.ref["vertex_map_v1"]
        step = vertex_branch(self.analysis.graph, data["incoming"], data["outgoing"])
        kept = self.analysis.complex.edge(data["incoming"]).facets
        projected = tuple(tuple(v if k in kept else Fraction(0) for k, v in enumerate(row)) for row in step.matrix)
        actual = _restrict(projected, self.analysis.complex.facets_at(step.vertex))
        expected = rational_matrix(data["matrix"])
        return actual == expected, _rows(expected), _rows(actual)

    def vertex_map_poisson(self) -> Outcome:
        data = self.ref["vertex_map_v1"]
        analysis = self.analysis
        step = vertex_branch(analysis.graph, data["incoming"], data["outgoing"])
        sector = sector_poisson(analysis.decomposition, analysis.complex, step.vertex)
        n = analysis.game.n
        incoming = edge_dirac(sector, analysis.character, step.incoming, outgoing=False).embedded(n)
        outgoing = edge_dirac(sector, analysis.character, step.outgoing, outgoing=True).embedded(n)
        pushed = mat_mul(mat_mul(step.matrix, incoming), transpose(step.matrix))
        return pushed == outgoing, _rows(outgoing), _rows(pushed)

    def hamiltonian_identity(self) -> Outcome:
        analysis = self.analysis
        checks = hamiltonian_checks(analysis.character, analysis.decomposition, analysis.hamiltonian)
        failing = [f"v{v + 1}" for v, ok in checks.items() if not ok]
        return not failing, f"χ^v = B_v ∇η_v at all {len(checks)} vertices", f"fails at {failing}"

    def branch_poisson_maps(self) -> Outcome:
        pl = self.analysis.skeleton_map
        reports = [verify_path_poisson(pl, b.name, self.analysis.decomposition) for b in pl.branches]
        failing = [" ".join(r.word) for r in reports if not r.passed]
        return not failing, f"all {len(reports)} branches are Poisson maps", f"failing: {failing}"

    def cycle_matrix(self) -> Outcome:
        matrix = branch_matrix(self.analysis.skeleton_map, self.ref["cycle_word"])
        expected = rational_matrix(self.ref["cycle_matrix"])
        return matrix == expected, _rows(expected), _rows(matrix)

    def cycle_spectrum(self) -> Outcome:
        result = spectrum(branch_matrix(self.analysis.skeleton_map, self.ref["cycle_word"]))
        expected_unstable = float(self.ref["unstable_eigenvalue"])
        tolerance = float(self.ref["eigenvalue_tolerance"])
        unstable, stable = result.unstable, result.stable
        passed = (
            result.zero_multiplicity == 3
            and result.unit_multiplicity == 2
            and unstable is not None
            and stable is not None
            and abs(unstable - expected_unstable) < tolerance
            and abs(unstable * stable - 1) < 1e-9
        )
        actual = (
            f"0^{result.zero_multiplicity} 1^{result.unit_multiplicity} "
            f"others={[f'{v.real:.6f}' for v in result.others]}"
        )
        return passed, f"0^3 1^2 λ_u={expected_unstable:.5f} λ_u·λ_s=1", actual

    def periodic_point(self) -> Outcome:
        point = parse_rational_vector(self.ref["periodic_point"])
        certificate = certify_periodic(self.analysis.skeleton_map, self.ref["cycle_word"], point)
        expected = [parse_rational_vector(p) for p in self.ref["periodic_orbit"]]
        actual = list(certificate.points[: certificate.period])
        passed = certificate.valid and actual == expected
        return passed, _rows(expected), f"{_rows(actual)} valid={certificate.valid}"

    def periodic_point_level(self) -> Outcome:
        point = parse_rational_vector(self.ref["periodic_point"])
        expected = parse_rational_vector(self.ref["level"])
        actual = eta_eval(self.analysis.level_functional, self.analysis.casimirs, point)
        return tuple(actual) == expected, format_rational_vector(expected), format_rational_vector(actual)

    def long_period_orbit(self) -> Outcome:
        analysis = self.analysis
        period = int(self.ref["long_period"])
        level = parse_rational_vector(self.ref["level"])
        result = find_periodic_points(analysis.skeleton_map, period, level, analysis.level_functional, analysis.casimirs, limit=1)
        return bool(result.orbits), f"a period-{period} orbit on the level section", f"none in {result.nodes} nodes"

    def orbit_level_invariance(self) -> Outcome:
        analysis = self.analysis
        pl = analysis.skeleton_map
        level = parse_rational_vector(self.ref["level"])
        polygon = edge_polygon(pl, pl.structural[0], level, analysis.level_functional, analysis.casimirs)
        start = sample_section_point(polygon, np.random.default_rng(config.random_seed))
        steps = self.orbit_steps
        record = iterate_skeleton(pl, start, steps, analysis.level_functional, analysis.casimirs, stride=max(steps, 1))
        passed = record.status is OrbitStatus.OK and record.length == steps and record.eta_invariant
        return passed, f"{steps} steps with η constant", f"{record.length} steps, {record.status.value}, invariant={record.eta_invariant}"


GOLDEN_ITEMS: Tuple[str, ...] = (
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
    "sector_brackets",
    "dirac_brackets",
    "vertex_map",
    "vertex_map_poisson",
    "hamiltonian_identity",
    "branch_poisson_maps",
    "cycle_matrix",
    "cycle_spectrum",
    "periodic_point",
    "periodic_point_level",
    "long_period_orbit",
    "orbit_level_invariance",
)


def reproduce_example(
    game: Optional[GameSpec] = None,
    orbit_steps: int = 20000,
    items: Optional[Tuple[str, ...]] = None,
) -> ReproduceReport:
    """
    Run the golden items against the bundled fish network.

    Args:
        game: replaces the bundled payoff (negative controls); the conservative
              and reference sections of the bundled file are kept
        orbit_steps: length of the exact orbit checked for level invariance
        items: subset of GOLDEN_ITEMS to run, in report order
    """
    document = fish_document()
    analysis = Analysis.from_document(document)
    if game is not None:
        analysis = Analysis(game, analysis.conservative)
    golden = _Golden(analysis, document["reference"], orbit_steps)
    report = ReproduceReport(analysis.game.name)
    selected = GOLDEN_ITEMS if items is None else tuple(name for name in GOLDEN_ITEMS if name in set(items))
    for name in selected:
        check: Callable[[], Outcome] = getattr(golden, name)
        started = time.perf_counter()
        try:
            passed, expected, actual = check()
        except Exception as e:
            log.error(f"Golden item {name} raised {type(e).__name__}: {e}")
            passed, expected, actual = False, "no error", f"{type(e).__name__}: {e}"
        report.items.append(GoldenItem(name, passed, expected, actual))
        log.info(f"{'PASS' if passed else 'FAIL'} {name} ({time.perf_counter() - started:.2f}s)")
    log.info(f"Reproduction: {len(report.items) - len(report.failed)}/{len(report.items)} items passed")
    return report
