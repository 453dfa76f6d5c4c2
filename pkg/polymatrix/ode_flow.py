"""
Numerical replicator flow and its comparison with the skeleton flow map.

The ODE is integrated in simplex coordinates with an explicit Runge-Kutta
stepper from scipy, renormalising every group after each accepted step.
Rescaling charts y_σ = -ε² log(x_σ / δ) take points near a vertex to the
skeleton's coordinates; the numerical Poincaré map of an S-branch runs the
flow from the entry section of its first edge to the entry section of its
last edge and reads the result back in rescaled coordinates.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import DOP853, RK45
from scipy.optimize import brentq

from core.config import config
from core.logger import log
from polymatrix.conservative import HamiltonianSpec
from polymatrix.errors import DomainError, IntegrationError, SaturationError, TubeOverlapError
from polymatrix.game_core import CellComplex, GameSpec
from polymatrix.linalg import Vector, rationalize
from polymatrix.skeleton.branches import Branch, PiecewiseLinearMap

STEPPERS = {"DOP853": DOP853, "RK45": RK45}
ENVELOPE_TOL = 1e-6
NEGATIVITY_TOL = 1e-12


@dataclass(frozen=True)
class ControlRecord:
    """Integrator settings; defaults come from the configuration."""

    method: str = "DOP853"
    rtol: float = 1e-10
    atol: float = 1e-300
    max_step: float = 1.0
    time_budget: float = 5000.0
    event_tol: float = 1e-12

    @classmethod
    def from_config(cls, **overrides) -> "ControlRecord":
        values = dict(
            method=config.ode_method,
            rtol=config.ode_rtol,
            atol=config.ode_atol,
            max_step=config.ode_max_step,
            time_budget=config.poincare_time_budget,
            event_tol=config.event_tol,
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        if values["method"] not in STEPPERS:
            raise ValueError(f"unknown integration method '{values['method']}', use one of {', '.join(STEPPERS)}")
        return cls(**values)


class _Field:
    """Vectorised replicator field for one game."""

    def __init__(self, game: GameSpec):
        self.game = game
        self.payoff = game.payoff_float
        self.groups = np.array(game.group_of)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        ax = self.payoff @ x
        averages = np.bincount(self.groups, weights=x * ax, minlength=self.game.p)
        return x * (ax - averages[self.groups])

    def group_sums(self, x: np.ndarray) -> np.ndarray:
        return np.bincount(self.groups, weights=x, minlength=self.game.p)

    def renormalise(self, x: np.ndarray) -> np.ndarray:
        return x / self.group_sums(x)[self.groups]


def replicator_rhs(game: GameSpec):
    """The field x ↦ X_A(x) as a callable f(t, x) for scipy steppers."""
    return _Field(game)


@dataclass
class Trajectory:
    """Accepted integration steps with conservation audits."""

    times: np.ndarray
    states: np.ndarray
    group_sums: np.ndarray
    hamiltonian: np.ndarray
    casimirs: np.ndarray

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.states, columns=[f"x{k + 1}" for k in range(self.states.shape[1])])
        frame.insert(0, "t", self.times)
        frame["h"] = self.hamiltonian
        for k in range(self.casimirs.shape[1]):
            frame[f"h_w{k + 1}"] = self.casimirs[:, k]
        return frame

    @property
    def hamiltonian_drift(self) -> float:
        return float(np.nanmax(np.abs(self.hamiltonian - self.hamiltonian[0]))) if len(self.times) else 0.0

    @property
    def casimir_drift(self) -> float:
        if not self.casimirs.size:
            return 0.0
        return float(np.nanmax(np.abs(self.casimirs - self.casimirs[0])))

    @property
    def simplex_drift(self) -> float:
        return float(np.max(np.abs(self.group_sums - 1.0)))


def _log_functional(coefficients: Sequence, x: np.ndarray) -> float:
    weights = np.array([float(c) for c in coefficients])
    support = weights != 0
    if np.any(x[support] <= 0):
        return math.nan
    return float(weights[support] @ np.log(x[support]))


def _check_envelope(replicator: _Field, x: np.ndarray, t: float) -> None:
    deviation = np.max(np.abs(replicator.group_sums(x) - 1.0))
    if deviation > ENVELOPE_TOL or np.any(x < -NEGATIVITY_TOL):
        log.error(f"State left the simplex envelope at t={t:.6g}: group-sum deviation {deviation:.3e}, min {x.min():.3e}")
        raise IntegrationError(f"state escaped the simplex envelope at t={t:.6g}")


def _stepper(replicator: _Field, x0: np.ndarray, t_bound: float, control: ControlRecord):
    return STEPPERS[control.method](
        replicator, 0.0, x0, t_bound, rtol=control.rtol, atol=control.atol, max_step=control.max_step
    )


def _advance(solver, replicator: _Field) -> np.ndarray:
    """One accepted step followed by group renormalisation."""
    message = solver.step()
    if solver.status == "failed":
        log.error(f"Integrator failed at t={solver.t:.6g}: {message}")
        raise IntegrationError(f"integration failed at t={solver.t:.6g}: {message}")
    _check_envelope(replicator, solver.y, solver.t)
    x = replicator.renormalise(solver.y)
    solver.y = x
    solver.f = solver.fun(solver.t, x)
    return x


def integrate(
    game: GameSpec,
    x0: Sequence[float],
    duration: float,
    control: Optional[ControlRecord] = None,
    spec: Optional[HamiltonianSpec] = None,
    casimirs: Sequence[Sequence] = (),
) -> Trajectory:
    """
    Integrate the replicator ODE from x0 for the given duration.

    Raises:
        DomainError: If x0 is not a point of the polytope
        IntegrationError: On step failure or loss of the simplex envelope
    """
    control = control or ControlRecord.from_config()
    replicator = _Field(game)
    x = np.array([float(v) for v in x0])
    if x.shape != (game.n,) or np.any(x < 0) or np.max(np.abs(replicator.group_sums(x) - 1.0)) > ENVELOPE_TOL:
        raise DomainError("initial state is not a point of the polytope")
    x = replicator.renormalise(x)

    times, states = [0.0], [x]
    if duration > 0:
        solver = _stepper(replicator, x, duration, control)
        while solver.status == "running":
            x = _advance(solver, replicator)
            times.append(solver.t)
            states.append(x)
    states = np.array(states)
    hamiltonian = np.array([_log_functional(spec.coefficients, s) if spec else math.nan for s in states])
    audit = np.array([[_log_functional(w, s) for w in casimirs] for s in states]).reshape(len(states), len(casimirs))
    trajectory = Trajectory(np.array(times), states, np.array([replicator.group_sums(s) for s in states]), hamiltonian, audit)
    log.info(f"Integrated '{game.name}' to t={times[-1]:.6g} in {len(times) - 1} steps")
    return trajectory


def tube_overlap_check(game: GameSpec, delta: float) -> None:
    """
    Vertex tubes {x_σ <= δ for σ in F_v} are pairwise disjoint when δ < 1/max n_α.

    Raises:
        TubeOverlapError: Otherwise
    """
    bound = 1.0 / max(game.groups)
    if not 0 < delta < bound:
        log.error(f"Tube parameter {delta} outside (0, {bound:.6g})")
        raise TubeOverlapError(f"delta must lie in (0, {bound:.6g}) for '{game.name}', got {delta}")


@dataclass(frozen=True)
class RescaleChart:
    """Ψ_{v,ε}: y_σ = -ε² log(x_σ / δ) on F_v, zero elsewhere."""

    complex: CellComplex
    vertex: int
    epsilon: float
    delta: float

    @property
    def chart(self) -> Tuple[int, ...]:
        return self.complex.facets_at(self.vertex)

    def forward(self, x: Sequence[float]) -> np.ndarray:
        """
        Raises:
            SaturationError: If some chart coordinate of x is not positive
        """
        x = np.asarray(x, dtype=float)
        chart = list(self.chart)
        if np.any(x[chart] <= 0):
            raise SaturationError(f"rescaling at v{self.vertex + 1} saturates on the boundary")
        y = np.zeros(self.complex.game.n)
        y[chart] = -self.epsilon**2 * np.log(x[chart] / self.delta)
        return y

    def inverse(self, y: Sequence[float]) -> np.ndarray:
        """
        Raises:
            DomainError: If a chart coordinate is negative or the vertex strategies leave the simplex
        """
        y = np.asarray([float(v) for v in y])
        game = self.complex.game
        chart = list(self.chart)
        if np.any(y[chart] < 0):
            raise DomainError(f"point is outside the closed sector of v{self.vertex + 1}")
        x = np.zeros(game.n)
        x[chart] = self.delta * np.exp(-y[chart] / self.epsilon**2)
        for alpha, j in enumerate(self.complex.vertices[self.vertex].strategies):
            x[j] = 1.0 - sum(x[i] for i in game.members(alpha) if i != j)
            if x[j] <= 0:
                raise DomainError(f"rescaled point leaves the simplex at v{self.vertex + 1}")
        return x


def rescale(chart: RescaleChart, direction: str, point: Sequence[float]) -> np.ndarray:
    if direction == "forward":
        return chart.forward(point)
    if direction == "inverse":
        return chart.inverse(point)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


class PoincareStatus(str, Enum):
    OK = "ok"
    ITINERARY_MISMATCH = "itinerary_mismatch"
    STALLED = "stalled"
    DOMAIN_FAILURE = "domain_failure"


@dataclass
class PoincareResult:
    branch: str
    epsilon: float
    status: PoincareStatus
    image: Optional[np.ndarray] = None
    time: float = 0.0
    visited: List[int] = field(default_factory=list)
    expected: List[int] = field(default_factory=list)


def _tube_vertex(complex_: CellComplex, x: np.ndarray, delta: float) -> Optional[int]:
    game = complex_.game
    strategies = []
    for alpha in range(game.p):
        members = list(game.members(alpha))
        j = members[int(np.argmax(x[members]))]
        if any(x[i] > delta for i in members if i != j):
            return None
        strategies.append(j)
    return complex_.vertex(tuple(strategies)).index


def _strictly_inside(branch: Branch, y: Sequence) -> bool:
    if all(isinstance(v, (int, Fraction)) for v in y):
        return branch.domain.contains(tuple(Fraction(v) for v in y))
    if any(float(y[z]) != 0.0 for z in branch.domain.zero_coordinates):
        return False
    return all(sum(c * float(y[k]) for k, c in enumerate(row)) > 0 for row in branch.domain.inequalities)


def numerical_poincare(
    pl: PiecewiseLinearMap,
    branch: str,
    epsilon: float,
    y0: Sequence,
    delta: Optional[float] = None,
    control: Optional[ControlRecord] = None,
) -> PoincareResult:
    """
    F^ε_ξ(y0): from the entry section of the first edge to the entry section of the last one.

    The flow starts at Ψ^{-1}(y0) in the chart of the first visited vertex;
    vertex tubes entered on the way are compared with the branch itinerary
    and the exit event x_r = δ (r the strategy left along the last edge) is
    armed once the last vertex of the itinerary has been reached.

    Raises:
        TubeOverlapError: If δ is too large for the game
    """
    record = pl.branch(branch)
    complex_ = pl.graph.complex
    game = complex_.game
    delta = config.tube_delta if delta is None else delta
    control = control or ControlRecord.from_config()
    tube_overlap_check(game, delta)
    if epsilon <= 0:
        raise DomainError(f"epsilon must be positive, got {epsilon}")

    expected = [step.vertex for step in record.steps]
    result = PoincareResult(record.name, epsilon, PoincareStatus.DOMAIN_FAILURE, expected=expected)
    if not _strictly_inside(record, y0):
        log.warning(f"Sample is not inside the open domain of {record.name}")
        return result

    last_edge = complex_.edge(record.end)
    leaving = expected[-1]
    r = complex_.vertices[leaving].strategies[last_edge.group]
    arrival = RescaleChart(complex_, last_edge.other(leaving), epsilon, delta)

    replicator = _Field(game)
    x = replicator.renormalise(RescaleChart(complex_, expected[0], epsilon, delta).inverse(y0))
    solver = _stepper(replicator, x, control.time_budget, control)
    result.visited = [expected[0]]
    armed = len(expected) == 1
    previous = x
    while solver.status == "running":
        x = _advance(solver, replicator)
        if armed and previous[r] > delta >= x[r]:
            dense = solver.dense_output()
            if dense(solver.t)[r] - delta > 0:
                t_cross = solver.t
            else:
                t_cross = brentq(lambda t: dense(t)[r] - delta, solver.t_old, solver.t, xtol=control.event_tol)
            crossing = replicator.renormalise(dense(t_cross))
            image = np.zeros(game.n)
            facets = sorted(last_edge.facets)
            image[facets] = arrival.forward(crossing)[facets]
            result.image, result.time, result.status = image, float(t_cross), PoincareStatus.OK
            break
        previous = x
        vertex = _tube_vertex(complex_, x, delta)
        if vertex is not None and vertex != result.visited[-1]:
            result.visited.append(vertex)
            position = len(result.visited) - 1
            if position >= len(expected) or vertex != expected[position]:
                result.status = PoincareStatus.ITINERARY_MISMATCH
                result.time = float(solver.t)
                log.warning(f"{record.name} at ε={epsilon}: entered v{vertex + 1}, expected itinerary {[v + 1 for v in expected]}")
                return result
            armed = position == len(expected) - 1
    else:
        result.status = PoincareStatus.STALLED
        result.time = float(solver.t)
        log.warning(f"{record.name} at ε={epsilon}: no exit event within t={control.time_budget}")
    log.debug(f"Poincaré map of {record.name} at ε={epsilon}: {result.status.value} at t={result.time:.6g}")
    return result


def sample_branch_points(
    pl: PiecewiseLinearMap,
    branch: str,
    count: int,
    rng: np.random.Generator,
    margin: Optional[float] = None,
    attempts: int = 10000,
) -> List[Vector]:
    """
    Rational interior points of a branch cone with ‖y‖∞ = 1 and every
    normalised cone inequality at least `margin`.

    Perturbs the maximum-margin point of the cone; when the cone cannot
    reach the requested margin, half of its maximum margin is used.
    """
    record = pl.branch(branch)
    margin = config.sample_margin if margin is None else margin
    best, center = record.domain.max_margin()
    if center is None:
        raise DomainError(f"branch {record.name} has an empty domain")
    center = center / np.max(np.abs(center))
    rows = np.array([[c / max(abs(v) for v in row) for c in row] for row in record.domain.inequalities], dtype=float)
    reach = float(np.min(rows @ center)) if len(rows) else 1.0
    if reach < margin:
        log.warning(f"{record.name} reaches margin {reach:.4g} only; sampling at {reach / 2:.4g}")
        margin = reach / 2
    free = list(record.domain.free_coordinates)

    samples: List[Vector] = []
    spread = (reach - margin) / (2 * max(len(free), 1))
    for _ in range(attempts):
        if len(samples) >= count:
            break
        y = center.copy()
        y[free] += spread * rng.uniform(-1.0, 1.0, size=len(free))
        y /= np.max(np.abs(y))
        candidate = tuple(
            Fraction(0) if k in record.domain.zero_coordinates else rationalize(float(y[k]), config.rational_max_denominator)
            for k in range(pl.dim)
        )
        values = rows @ np.array([float(v) for v in candidate]) if len(rows) else np.array([1.0])
        if np.min(values) >= margin and record.domain.contains(candidate):
            samples.append(candidate)
    if len(samples) < count:
        log.warning(f"Only {len(samples)} of {count} samples found in {record.name}")
    return samples


@dataclass
class ConvergenceTable:
    """Sup-norm errors of F^ε_ξ against π_ξ per (ε, sample)."""

    branch: str
    epsilons: Tuple[float, ...]
    frame: pd.DataFrame

    def monotone(self) -> Optional[dict]:
        """Per sample: are errors weakly decreasing as ε decreases? None for a single ε."""
        if len(self.epsilons) < 2:
            return None
        verdicts = {}
        for sample, group in self.frame.groupby("sample"):
            ordered = group.sort_values("epsilon", ascending=False)
            if (ordered["status"] != PoincareStatus.OK.value).any():
                verdicts[int(sample)] = False
                continue
            errors = ordered["error"].to_numpy()
            verdicts[int(sample)] = bool(np.all(np.diff(errors) <= 0))
        return verdicts

    def smallest_epsilon_errors(self) -> pd.Series:
        smallest = min(self.epsilons)
        return self.frame[self.frame["epsilon"] == smallest].set_index("sample")["error"]


def convergence_study(
    pl: PiecewiseLinearMap,
    branch: str,
    epsilons: Sequence[float],
    samples: Sequence[Sequence],
    delta: Optional[float] = None,
    control: Optional[ControlRecord] = None,
) -> ConvergenceTable:
    """‖F^ε_ξ(y) - π_ξ(y)‖∞ for every ε and sample; failures are kept as flagged rows."""
    record = pl.branch(branch)
    exact = [np.array([float(v) for v in record.apply([Fraction(v) for v in y])]) for y in samples]
    jobs = [(eps, k) for eps in epsilons for k in range(len(samples))]

    def run(job):
        eps, k = job
        result = numerical_poincare(pl, record.name, eps, samples[k], delta=delta, control=control)
        error = float(np.max(np.abs(result.image - exact[k]))) if result.image is not None else math.nan
        return {"epsilon": eps, "sample": k, "error": error, "status": result.status.value, "time": result.time}

    if config.parallel_workers > 1:
        with ThreadPoolExecutor(max_workers=config.parallel_workers) as pool:
            rows = list(pool.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]
    table = ConvergenceTable(record.name, tuple(epsilons), pd.DataFrame(rows, columns=["epsilon", "sample", "error", "status", "time"]))
    log.info(f"Convergence study of {record.name} over ε={list(epsilons)} and {len(samples)} samples")
    return table
