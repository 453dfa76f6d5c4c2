"""
Command line front end.

    polymatrix analyze fish.yaml --out out/
    polymatrix iterate fish.yaml --start "0,1/2,1,0,0,0,0" --steps 20000 --level "1/3,-1/2"
    polymatrix reproduce-example

Exit status: 0 on success, 1 when a verification fails, 2 on bad input.
Summaries go to stdout, logs to stderr, artifacts to the output directory.
"""

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.config import config
from core.logger import log, set_console_level
from core.utils import format_float, format_rational_vector, parse_rational_vector
from polymatrix import reports
from polymatrix.analysis import Analysis
from polymatrix.conservative import HamiltonianSpec, conservativity_record
from polymatrix.errors import PolymatrixError, VerificationError
from polymatrix.game_core import barycenter
from polymatrix.linalg import Vector
from polymatrix.ode_flow import ControlRecord, convergence_study, integrate, sample_branch_points, tube_overlap_check
from polymatrix.poisson_asym import poisson_report, sector_table, verify_path_poisson
from polymatrix.reproduce import reproduce_example
from polymatrix.skeleton.graph import heteroclinic_cycles
from polymatrix.skeleton.orbits import iterate_skeleton
from polymatrix.skeleton.sections import eta_eval, level_polygon

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_INPUT = 2
FORMATS = ("csv", "dot", "svg")


class VerificationFailed(Exception):
    """A mathematical identity that did not hold; carries a printable witness."""


@dataclass
class RunConfig:
    """
    One validated invocation.

    Numeric controls default to the configuration; `validate` checks the
    ranges that do not need the game, the commands check the rest.
    """

    command: str
    game: Optional[Path] = None
    out: Path = field(default_factory=lambda: config.output_dir)
    formats: Tuple[str, ...] = FORMATS
    seed: int = field(default_factory=lambda: config.random_seed)
    epsilons: Tuple[float, ...] = field(default_factory=lambda: tuple(config.epsilons))
    delta: float = field(default_factory=lambda: config.tube_delta)
    steps: int = 0
    stride: int = 1
    level: Optional[Vector] = None
    projection: Optional[Tuple[int, int]] = None
    start: Optional[Vector] = None
    duration: float = 100.0
    branch: Optional[str] = None
    structural: Optional[Tuple[str, ...]] = None
    find: bool = False
    samples: int = 5
    orbit_steps: int = 20000

    def validate(self) -> "RunConfig":
        """
        Raises:
            ValueError: On the first control outside its range
        """
        if any(eps <= 0 for eps in self.epsilons):
            raise ValueError(f"every ε must be positive, got {list(self.epsilons)}")
        if not 0 < self.delta < 1:
            raise ValueError(f"δ must lie in (0, 1), got {self.delta}")
        if self.steps < 0 or self.orbit_steps < 0:
            raise ValueError("step counts must be non-negative")
        if self.stride < 1:
            raise ValueError(f"stride must be at least 1, got {self.stride}")
        if self.samples < 1:
            raise ValueError(f"sample count must be at least 1, got {self.samples}")
        if self.duration < 0:
            raise ValueError(f"duration must be non-negative, got {self.duration}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        unknown = [f for f in self.formats if f not in FORMATS]
        if unknown:
            raise ValueError(f"unknown output format(s) {unknown}, use {', '.join(FORMATS)}")
        if self.structural is not None and self.find:
            raise ValueError("--structural-set and --find are mutually exclusive")
        return self

    def check_projection(self, n: int) -> Tuple[int, int]:
        """0-based projection coordinates; defaults to the first two facets."""
        first, second = self.projection or (1, 2)
        if not (1 <= first <= n and 1 <= second <= n) or first == second:
            raise ValueError(f"projection indices must be distinct and within 1..{n}, got {first},{second}")
        return first - 1, second - 1

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = {"command": args.command}
        if getattr(args, "game", None):
            values["game"] = Path(args.game)
        if args.out:
            values["out"] = Path(args.out)
        if args.format:
            values["formats"] = tuple(args.format)
        if args.seed is not None:
            values["seed"] = args.seed
        if getattr(args, "eps", None):
            values["epsilons"] = tuple(float(v) for v in args.eps.split(",") if v.strip())
        if getattr(args, "delta", None) is not None:
            values["delta"] = args.delta
        for name in ("steps", "stride", "branch", "find", "samples", "orbit_steps"):
            if getattr(args, name, None) is not None:
                values[name] = getattr(args, name)
        if getattr(args, "T", None) is not None:
            values["duration"] = args.T
        if getattr(args, "level", None):
            values["level"] = parse_rational_vector(args.level)
        if getattr(args, "start", None):
            values["start"] = parse_rational_vector(args.start)
        if getattr(args, "proj", None):
            first, second = (int(v) for v in args.proj.split(","))
            values["projection"] = (first, second)
        if getattr(args, "structural_set", None):
            values["structural"] = tuple(e for item in args.structural_set for e in item.split(",") if e.strip())
        return cls(**values).validate()


def _analysis(run: RunConfig) -> Analysis:
    return Analysis.from_file(run.game, structural=run.structural, search=run.find)


def _hamiltonian_or_none(analysis: Analysis) -> Optional[HamiltonianSpec]:
    try:
        return analysis.hamiltonian
    except PolymatrixError as e:
        log.warning(f"No Hamiltonian audit for '{analysis.game.name}': {e}")
        return None


def _report_path(run: RunConfig, name: str) -> Path:
    return run.out / name


def cmd_analyze(run: RunConfig) -> int:
    analysis = _analysis(run)
    graph = analysis.graph
    if "csv" in run.formats:
        reports.write_frame(reports.character_frame(analysis.character), _report_path(run, "character.csv"))
        reports.write_frame(reports.edges_frame(graph), _report_path(run, "edges.csv"))
    if "dot" in run.formats:
        reports.write_text(reports.flow_dot(graph), _report_path(run, "flow.dot"))
    reports.write_yaml(conservativity_record(analysis.game), _report_path(run, "conservative.yaml"))
    print(f"game '{analysis.game.name}': {len(analysis.complex.vertices)} vertices, {len(analysis.complex.edges)} edges")
    print(f"flowing: {' '.join(graph.flowing)}")
    print(f"neutral: {' '.join(graph.neutral)}")
    if graph.singular:
        print(f"singular: {' '.join(graph.singular)}")
    print(f"regular: {graph.regular}, all saddles: {all(graph.saddles.values())}")
    return EXIT_OK


def cmd_skeleton(run: RunConfig) -> int:
    analysis = _analysis(run)
    certificate = analysis.structural
    cycles = heteroclinic_cycles(analysis.graph)
    if "csv" in run.formats:
        reports.write_frame(reports.edges_frame(analysis.graph), _report_path(run, "edges.csv"))
    if "dot" in run.formats:
        reports.write_text(reports.flow_dot(analysis.graph), _report_path(run, "flow.dot"))
    print(f"structural set: {{{', '.join(certificate.edges)}}}")
    print(f"heteroclinic cycles: {len(cycles)}")
    if not certificate.valid:
        raise VerificationFailed(f"cycle avoiding the set: {' -> '.join(certificate.cycle)}")
    print(f"acyclic order without S: {' '.join(f'v{v + 1}' for v in certificate.order)}")
    return EXIT_OK


def cmd_branches(run: RunConfig) -> int:
    analysis = _analysis(run)
    pl = analysis.skeleton_map
    reports.write_frame(reports.branches_frame(pl), _report_path(run, "branches.csv"))
    print(repr(pl))
    for branch in pl.branches:
        print(f"{branch.name}: {' '.join(str(v) for v in branch.label)}")
    return EXIT_OK


def cmd_iterate(run: RunConfig) -> int:
    if run.start is None:
        raise ValueError("iterate needs --start")
    analysis = _analysis(run)
    pl = analysis.skeleton_map
    spec = _hamiltonian_or_none(analysis)
    if spec is not None:
        spec = analysis.level_functional
    casimirs = analysis.casimirs if spec is not None else ()
    if run.level is not None:
        if spec is None:
            raise ValueError("--level needs a conservative game")
        eta = eta_eval(spec, casimirs, run.start)
        if tuple(eta) != tuple(run.level):
            raise VerificationFailed(f"start lies on level {format_rational_vector(eta)}, not {format_rational_vector(run.level)}")
    record = iterate_skeleton(pl, run.start, run.steps, spec, casimirs, stride=run.stride)
    reports.write_frame(record.to_frame(), _report_path(run, "orbit.csv"))
    print(f"{record.length} steps from {record.edge}: {record.status.value}")
    if record.period() is not None:
        print(f"period: {record.period()}")
    if spec is not None:
        print(f"level {format_rational_vector(record.etas[0])} invariant: {record.eta_invariant}")
        if not record.eta_invariant:
            raise VerificationFailed("the level functional changed along the orbit")
    return EXIT_OK


def _poisson_text(analysis: Analysis, report: dict) -> List[str]:
    lines = sector_table(analysis.decomposition, analysis.complex)
    lines.append("")
    lines.append("Hamiltonian identity χ^v = B_v ∇η_v:")
    lines += [f"  {v}: {'ok' if ok else 'FAILED'}" for v, ok in report["hamiltonian"].items()]
    lines.append("Branch Poisson maps:")
    lines += [f"  {b['branch']}: {'ok' if b['composed'] else 'FAILED'}" for b in report["branches"]]
    return lines


def cmd_poisson(run: RunConfig) -> int:
    analysis = _analysis(run)
    report = poisson_report(analysis.skeleton_map, analysis.decomposition, analysis.hamiltonian)
    reports.write_lines(_poisson_text(analysis, report), _report_path(run, "poisson.txt"))
    reports.write_yaml(report, _report_path(run, "poisson_report.yaml"))
    print(f"Poisson verification: {'passed' if report['passed'] else 'FAILED'}")
    if not report["passed"]:
        raise VerificationFailed("see poisson_report.yaml for the failing identities")
    return EXIT_OK


def cmd_verify_poisson(run: RunConfig) -> int:
    if not run.branch:
        raise ValueError("verify-poisson needs --branch")
    analysis = _analysis(run)
    word = [b for b in run.branch.replace(",", " ").split() if b]
    result = verify_path_poisson(analysis.skeleton_map, word, analysis.decomposition)
    record = result.to_dict()
    reports.write_yaml({"passed": result.passed, "branches": [record]}, _report_path(run, "poisson_report.yaml"))
    print(f"{record['branch']}: {'passed' if result.passed else 'FAILED'} (max residual {record['max_residual']})")
    if not result.passed:
        failing = [c.label for c in result.vertex_checks + result.edge_checks + (result.composed,) if not c.passed]
        raise VerificationFailed(f"failing identities: {', '.join(failing)}")
    return EXIT_OK


def cmd_simulate(run: RunConfig) -> int:
    analysis = _analysis(run)
    game = analysis.game
    start = run.start if run.start is not None else barycenter(game)
    spec = _hamiltonian_or_none(analysis)
    casimirs = analysis.casimirs if spec is not None else ()
    trajectory = integrate(game, start, run.duration, ControlRecord.from_config(), spec, casimirs)
    reports.write_frame(trajectory.to_frame(), _report_path(run, "trajectory.csv"), exact=False)
    print(f"{len(trajectory.times) - 1} steps to t={format_float(trajectory.times[-1])}")
    print(f"simplex drift: {trajectory.simplex_drift:.3e}")
    if spec is not None:
        print(f"h drift: {trajectory.hamiltonian_drift:.3e}, Casimir drift: {trajectory.casimir_drift:.3e}")
    return EXIT_OK


def cmd_converge(run: RunConfig) -> int:
    if not run.branch:
        raise ValueError("converge needs --branch")
    analysis = _analysis(run)
    tube_overlap_check(analysis.game, run.delta)
    pl = analysis.skeleton_map
    rng = np.random.default_rng(run.seed)
    samples = sample_branch_points(pl, run.branch, run.samples, rng)
    table = convergence_study(pl, run.branch, run.epsilons, samples, delta=run.delta)
    reports.write_frame(table.frame, _report_path(run, "convergence.csv"), exact=False)
    verdicts = table.monotone()
    print(f"{table.branch}: {len(samples)} samples over ε = {', '.join(str(e) for e in run.epsilons)}")
    if verdicts is not None:
        print(f"errors weakly decreasing: {sum(verdicts.values())}/{len(verdicts)} samples")
    return EXIT_OK


def cmd_level_polygon(run: RunConfig) -> int:
    if not run.branch or run.level is None:
        raise ValueError("level-polygon needs --branch and --level")
    analysis = _analysis(run)
    projection = run.check_projection(analysis.game.n)
    polygon = level_polygon(analysis.skeleton_map, run.branch, run.level, analysis.level_functional, analysis.casimirs)
    if "csv" in run.formats:
        reports.write_frame(reports.polygon_frame(polygon), _report_path(run, "polygon.csv"))
    if "svg" in run.formats:
        reports.plot_polygons([polygon], projection, _report_path(run, "polygon.svg"))
    state = "empty" if polygon.empty else f"{len(polygon.vertices)} vertices, area {polygon.area}"
    print(f"{polygon.name} at level {format_rational_vector(polygon.level)}: {state}")
    return EXIT_OK


def cmd_reproduce(run: RunConfig) -> int:
    report = reproduce_example(orbit_steps=run.orbit_steps)
    reports.write_text(report.text(), _report_path(run, "reproduce_report.txt"))
    sys.stdout.write(report.text())
    if not report.passed:
        raise VerificationFailed(f"failed items: {', '.join(report.failed)}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "analyze": cmd_analyze,
    "skeleton": cmd_skeleton,
    "branches": cmd_branches,
    "iterate": cmd_iterate,
    "poisson": cmd_poisson,
    "verify-poisson": cmd_verify_poisson,
    "simulate": cmd_simulate,
    "converge": cmd_converge,
    "level-polygon": cmd_level_polygon,
    "reproduce-example": cmd_reproduce,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: {config.output_dir})")
    common.add_argument("--format", action="append", choices=FORMATS, help="artifact formats to write (repeatable)")
    common.add_argument("--seed", type=int, help=f"sampling seed (default: {config.random_seed})")
    common.add_argument("--log-level", help=f"console log level (default: {config.log_level})")

    game = argparse.ArgumentParser(add_help=False, parents=[common])
    game.add_argument("game", help="game file (YAML)")
    game.add_argument("--structural-set", action="append", metavar="EDGES", help="edges of S, e.g. γ1 or g1,g5")

    parser = argparse.ArgumentParser(prog="polymatrix", description="Skeleton flow analysis of polymatrix replicators")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[game], help="character table, edge classes and conservativity")
    skeleton = sub.add_parser("skeleton", parents=[game], help="verify or find a structural set")
    skeleton.add_argument("--find", action="store_true", help="search for a minimum structural set")
    sub.add_parser("branches", parents=[game], help="enumerate the S-branches")

    iterate = sub.add_parser("iterate", parents=[game], help="exact orbit of the skeleton flow map")
    iterate.add_argument("--start", required=True, help="initial point, e.g. '0,1/2,1,0,0,0,0'")
    iterate.add_argument("--steps", type=int, default=1000)
    iterate.add_argument("--stride", type=int, help="record every k-th point")
    iterate.add_argument("--level", help="expected level c1,c2,... of the start point")

    sub.add_parser("poisson", parents=[game], help="sector brackets, Dirac brackets and every identity")
    verify = sub.add_parser("verify-poisson", parents=[game], help="Poisson property of one branch or branch word")
    verify.add_argument("--branch", required=True, help="branch name or chained word, e.g. 'ξ4 ξ1'")

    simulate = sub.add_parser("simulate", parents=[game], help="integrate the replicator ODE")
    simulate.add_argument("--start", help="initial point (default: barycenter)")
    simulate.add_argument("-T", type=float, default=100.0, help="duration")

    converge = sub.add_parser("converge", parents=[game], help="numerical Poincaré maps against a branch map")
    converge.add_argument("--branch", required=True)
    converge.add_argument("--eps", help="comma separated ε values")
    converge.add_argument("--samples", type=int)
    converge.add_argument("--delta", type=float, help="tube parameter δ")

    polygon = sub.add_parser("level-polygon", parents=[game], help="branch cone cut with a level set")
    polygon.add_argument("--branch", required=True)
    polygon.add_argument("--level", required=True)
    polygon.add_argument("--proj", help="two 1-based facet coordinates for the plot, e.g. 2,3")

    reproduce = sub.add_parser("reproduce-example", parents=[common], help="check every reference fish-network value")
    reproduce.add_argument("--orbit-steps", type=int, help="length of the level-invariance orbit")
    return parser


def run(run_config: RunConfig) -> int:
    """Execute one command; exceptions map to exit statuses."""
    try:
        return COMMANDS[run_config.command](run_config)
    except (VerificationFailed, VerificationError) as e:
        witness = getattr(e, "witness", None)
        print(f"verification failed: {e}" + (f" (witness: {witness})" if witness is not None else ""), file=sys.stderr)
        return EXIT_VERIFICATION
    except (PolymatrixError, FileNotFoundError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        set_console_level(args.log_level)
    try:
        run_config = RunConfig.from_args(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    log.debug(f"Running {run_config.command} with {run_config}")
    return run(run_config)


if __name__ == "__main__":
    sys.exit(main())
