"""
Conservative polymatrix games.

A game is conservative when its payoff matrix is equal-rows equivalent to
A0·D with A0 skew-symmetric and D a nonzero group scaling, and it
has a formal equilibrium. Such games carry a Hamiltonian built from the
equilibrium and a Poisson structure built from A0; the Casimirs come from
the kernel of A.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from scipy.optimize import linprog

from core.config import config
from core.logger import log
from core.utils import format_rational_vector, parse_rational, parse_rational_vector
from polymatrix.errors import DomainError, GameSpecError, HamiltonianDomainError, VerificationError
from polymatrix.game_core import GameSpec, equal_rows_equivalent
from polymatrix.linalg import (
    Rows,
    Vector,
    dot,
    is_skew,
    minimal_norm,
    nullspace,
    primitive_integer,
    solve_affine,
    to_fraction,
    to_sympy,
)


@dataclass(frozen=True)
class FormalEquilibriumSet:
    """
    The affine set of q with (Aq)_i constant on each group and Σ_{j∈α} q_j = 1.

    Attributes:
        particular: an interior point when one exists, the minimal-norm point otherwise
        minimal_norm: the point of the set closest to the origin
        kernel: basis of the direction space
        interior: whether the set meets the open polytope
        group_payoffs: the group constants (Aq)_α at the particular point
    """

    particular: Vector
    minimal_norm: Vector
    kernel: Tuple[Vector, ...]
    interior: bool
    group_payoffs: Vector

    @property
    def dimension(self) -> int:
        return len(self.kernel)

    def contains(self, q: Sequence[Fraction]) -> bool:
        shifted = [to_fraction(a) - b for a, b in zip(q, self.particular)]
        if not any(shifted):
            return True
        if not self.kernel:
            return False
        return solve_affine([list(col) for col in zip(*self.kernel)], shifted, len(self.kernel)) is not None


def is_formal_equilibrium(game: GameSpec, q: Sequence[Fraction]) -> bool:
    """Exact check of the equilibrium conditions, positivity not required."""
    q = [to_fraction(v) for v in q]
    if len(q) != game.n:
        return False
    aq = [dot(row, q) for row in game.payoff]
    for alpha in range(game.p):
        members = game.members(alpha)
        if sum(q[i] for i in members) != 1:
            return False
        if len({aq[i] for i in members}) != 1:
            return False
    return True


def _interior_shift(base: Vector, kernel: Sequence[Vector]) -> Optional[Vector]:
    """Maximise min_i q_i over base + span(kernel); exact rational point with positive entries or None."""
    if all(v > 0 for v in base):
        if not kernel:
            return base
    if not kernel:
        return None
    n = len(base)
    k = len(kernel)
    basis = np.array([[float(v[i]) for v in kernel] for i in range(n)])
    c = np.zeros(k + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-basis, np.ones((n, 1))])
    b_ub = np.array([float(v) for v in base])
    bounds = [(None, None)] * k + [(None, 1.0)]
    result = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if result.status != 0 or -result.fun <= config.lp_margin_tol:
        return None
    for denominator in (config.rational_max_denominator, config.rational_max_denominator * 1000):
        t = [Fraction(float(v)).limit_denominator(denominator) for v in result.x[:-1]]
        point = tuple(b + sum((tj * vec[i] for tj, vec in zip(t, kernel)), Fraction(0)) for i, b in enumerate(base))
        if all(v > 0 for v in point):
            return point
    return None


def formal_equilibria(game: GameSpec) -> Optional[FormalEquilibriumSet]:
    """
    Solve the formal equilibrium conditions exactly.

    Returns None when the linear system is inconsistent.
    """
    n, p = game.n, game.p
    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    for i in range(n):
        row = list(game.payoff[i]) + [Fraction(0)] * p
        row[n + game.group_of[i]] = Fraction(-1)
        rows.append(row)
        rhs.append(Fraction(0))
    for alpha in range(p):
        row = [Fraction(int(game.group_of[j] == alpha)) for j in range(n)] + [Fraction(0)] * p
        rows.append(row)
        rhs.append(Fraction(1))

    solved = solve_affine(rows, rhs, n + p)
    if solved is None:
        log.info(f"Game '{game.name}' has no formal equilibrium")
        return None
    particular, kernel = solved
    kernel_q = tuple(primitive_integer(v[:n]) for v in kernel)
    nearest = minimal_norm(particular[:n], kernel_q)
    interior_point = _interior_shift(nearest, kernel_q)
    chosen = interior_point if interior_point is not None else nearest
    aq = [dot(row, chosen) for row in game.payoff]
    payoffs = tuple(aq[game.offsets[alpha]] for alpha in range(p))
    log.debug(f"Formal equilibria of '{game.name}': dimension {len(kernel_q)}, interior={interior_point is not None}")
    return FormalEquilibriumSet(chosen, nearest, kernel_q, interior_point is not None, payoffs)


@dataclass(frozen=True)
class SkewDecomposition:
    """A ~ skew · D with D = diag(λ_α I_{n_α})."""

    skew: Rows
    scaling: Vector

    def diagonal(self, game: GameSpec) -> Vector:
        return tuple(self.scaling[game.group_of[i]] for i in range(game.n))

    def scaled(self, game: GameSpec) -> Rows:
        """The product A0·D."""
        d = self.diagonal(game)
        return tuple(tuple(a * d[j] for j, a in enumerate(row)) for row in self.skew)


def verify_skew_decomposition(game: GameSpec, skew: Sequence[Sequence], scaling: Sequence) -> SkewDecomposition:
    """
    Check a proposed decomposition.

    Raises:
        VerificationError: Naming the first invariant that fails
    """
    skew = tuple(tuple(to_fraction(v) for v in row) for row in skew)
    scaling = tuple(to_fraction(v) for v in scaling)
    if len(scaling) != game.p:
        raise VerificationError(f"scaling has {len(scaling)} entries, game has {game.p} groups")
    if len(skew) != game.n or any(len(row) != game.n for row in skew):
        raise VerificationError(f"skew matrix must be {game.n}x{game.n}")
    if not is_skew(skew):
        witness = next((i, j) for i in range(game.n) for j in range(game.n) if skew[i][j] != -skew[j][i])
        raise VerificationError("matrix is not skew-symmetric", witness=(witness[0] + 1, witness[1] + 1))
    zero_groups = [alpha + 1 for alpha, lam in enumerate(scaling) if lam == 0]
    if zero_groups:
        raise VerificationError("scaling vanishes on some group", witness=zero_groups)
    decomposition = SkewDecomposition(skew, scaling)
    if not equal_rows_equivalent(game, game.payoff, decomposition.scaled(game)):
        raise VerificationError("A is not equal-rows equivalent to A0·D")
    return decomposition


def _decomposition_system(game: GameSpec) -> Tuple[List[List[Fraction]], Dict[Tuple[int, int, int], int]]:
    """Rows of λ_α a_ij + λ_β a_ji - d^{αβ}_j - d^{βα}_i = 0 over the unknowns (λ, d)."""
    n, p = game.n, game.p
    index: Dict[Tuple[int, int, int], int] = {}
    for alpha in range(p):
        for j in range(n):
            index[(alpha, game.group_of[j], j)] = p + len(index)
    size = p + len(index)
    rows = []
    for i in range(n):
        for j in range(i, n):
            alpha, beta = game.group_of[i], game.group_of[j]
            row = [Fraction(0)] * size
            row[alpha] += game.payoff[i][j]
            row[beta] += game.payoff[j][i]
            row[index[(alpha, beta, j)]] -= 1
            row[index[(beta, alpha, i)]] -= 1
            rows.append(row)
    return rows, index


def _nonvanishing_combination(vectors: Sequence[Vector]) -> Optional[Vector]:
    """A combination with every coordinate nonzero, trying sign patterns before a Vandermonde sweep."""
    if not vectors:
        return None
    dim = len(vectors[0])
    if any(all(v[k] == 0 for v in vectors) for k in range(dim)):
        return None
    count = len(vectors)
    for pattern in itertools.product((1, -1, 0), repeat=count):
        if not any(pattern):
            continue
        combo = tuple(sum((c * v[k] for c, v in zip(pattern, vectors)), Fraction(0)) for k in range(dim))
        if all(combo):
            return combo
    for t in range(2, dim * count + 3):
        combo = tuple(sum((Fraction(t) ** e * v[k] for e, v in enumerate(vectors)), Fraction(0)) for k in range(dim))
        if all(combo):
            return combo
    return None


def find_skew_decomposition(game: GameSpec) -> Optional[SkewDecomposition]:
    """
    Search for A0 skew and λ with every entry nonzero such that A ~ A0·D.

    λ is normalised to coprime integers with λ_1 > 0; the equal-rows part is
    the minimal-norm one for that λ.
    """
    if is_skew(game.payoff):
        return SkewDecomposition(game.payoff, tuple(Fraction(1) for _ in range(game.p)))

    rows, index = _decomposition_system(game)
    p = game.p
    kernel = nullspace(rows)
    lam = _nonvanishing_combination([v[:p] for v in kernel])
    if lam is None:
        log.info(f"Game '{game.name}' admits no skew decomposition")
        return None
    lam = primitive_integer(lam)
    if lam[0] < 0:
        lam = tuple(-v for v in lam)

    d_rows = [row[p:] for row in rows]
    d_rhs = [-dot(row[:p], lam) for row in rows]
    solved = solve_affine(d_rows, d_rhs, len(index))
    if solved is None:
        raise VerificationError("scaling from the kernel does not admit an equal-rows correction", witness=lam)
    d = minimal_norm(*solved)

    skew = []
    for i in range(game.n):
        alpha = game.group_of[i]
        row = []
        for j in range(game.n):
            beta = game.group_of[j]
            correction = d[index[(alpha, beta, j)] - p] / lam[alpha]
            row.append((game.payoff[i][j] - correction) / lam[beta])
        skew.append(tuple(row))
    return verify_skew_decomposition(game, skew, lam)


def skew_decomposition(
    game: GameSpec, mode: str = "find", skew: Optional[Sequence[Sequence]] = None, scaling: Optional[Sequence] = None
) -> Optional[SkewDecomposition]:
    """Dispatch to find or verify mode."""
    if mode == "verify":
        if skew is None or scaling is None:
            raise ValueError("verify mode needs both the skew matrix and the scaling")
        return verify_skew_decomposition(game, skew, scaling)
    if mode == "find":
        return find_skew_decomposition(game)
    raise ValueError(f"unknown skew decomposition mode '{mode}'")


@dataclass(frozen=True)
class HamiltonianSpec:
    """h(x) = Σ_i λ_{α(i)} q_i log x_i."""

    equilibrium: Vector
    scaling: Vector
    coefficients: Vector

    @classmethod
    def build(cls, game: GameSpec, equilibrium: Sequence, scaling: Sequence) -> "HamiltonianSpec":
        q = tuple(to_fraction(v) for v in equilibrium)
        lam = tuple(to_fraction(v) for v in scaling)
        if len(q) != game.n or len(lam) != game.p:
            raise DomainError("equilibrium or scaling does not match the game dimensions")
        return cls(q, lam, tuple(lam[game.group_of[i]] * q[i] for i in range(game.n)))

    def value(self, x: Sequence[float]) -> float:
        """Float value; the boundary of the polytope is outside the domain."""
        if any(v <= 0 for v in x):
            raise HamiltonianDomainError("Hamiltonian is undefined on the boundary")
        return float(sum(float(c) * math.log(float(v)) for c, v in zip(self.coefficients, x) if c))

    def gradient(self, x: Sequence) -> tuple:
        if any(v <= 0 for v in x):
            raise HamiltonianDomainError("Hamiltonian gradient is undefined on the boundary")
        return tuple(c / v for c, v in zip(self.coefficients, x))


def hamiltonian_eval(spec: HamiltonianSpec, x: Sequence[float]) -> float:
    return spec.value(x)


def poisson_field_at(decomposition: SkewDecomposition, game: GameSpec, x: Sequence) -> sp.Matrix:
    """π_x = -T_x D_x A0 D_x T_xᵀ with T_x = blockdiag(x^α 1ᵀ - I)."""
    n = game.n
    xs = [sp.Rational(to_fraction(v).numerator, to_fraction(v).denominator) for v in x]
    T = sp.zeros(n, n)
    for alpha in range(game.p):
        for i in game.members(alpha):
            for j in game.members(alpha):
                T[i, j] = xs[i] - (1 if i == j else 0)
    Dx = sp.diag(*xs)
    A0 = to_sympy(decomposition.skew)
    return -T * Dx * A0 * Dx * T.T


def casimir_basis(game: GameSpec) -> List[Vector]:
    """Basis of Ker(A) ∩ H0, H0 the vectors with zero sum on every group, as coprime integer vectors."""
    rows = [list(r) for r in game.payoff]
    rows += [[Fraction(int(game.group_of[j] == alpha)) for j in range(game.n)] for alpha in range(game.p)]
    return [primitive_integer(v) for v in nullspace(rows)]


def casimir_eval(w: Sequence, x: Sequence[float]) -> float:
    """h_w(x) = Σ w_i log x_i."""
    if any(v <= 0 for v in x):
        raise HamiltonianDomainError("Casimir is undefined on the boundary")
    return float(sum(float(c) * math.log(float(v)) for c, v in zip(w, x) if c))


def conservativity_record(game: GameSpec) -> Dict[str, Any]:
    """YAML-ready summary of the conservativity analysis."""
    equilibria = formal_equilibria(game)
    decomposition = find_skew_decomposition(game)
    casimirs = casimir_basis(game)
    conservative = equilibria is not None and decomposition is not None
    record: Dict[str, Any] = {
        "game": game.name,
        "conservative": conservative,
        "formal_equilibria": None,
        "skew_decomposition": None,
        "casimirs": [format_rational_vector(w) for w in casimirs],
        "kernel_dimension": len(nullspace([list(r) for r in game.payoff])),
    }
    if equilibria is not None:
        record["formal_equilibria"] = {
            "particular": format_rational_vector(equilibria.particular),
            "minimal_norm": format_rational_vector(equilibria.minimal_norm),
            "direction_basis": [format_rational_vector(v) for v in equilibria.kernel],
            "interior": equilibria.interior,
            "group_payoffs": format_rational_vector(equilibria.group_payoffs),
        }
    if decomposition is not None:
        record["skew_decomposition"] = {
            "scaling": format_rational_vector(decomposition.scaling),
            "skew": [format_rational_vector(row) for row in decomposition.skew],
        }
    log.info(f"Game '{game.name}' conservative={conservative}, {len(casimirs)} Casimir(s)")
    return record



def rational_matrix(rows: Sequence[Sequence[Any]]) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(parse_rational(v) for v in row) for row in rows)


@dataclass(frozen=True)
class ConservativeData:
    """
    Conservativity data declared in a game file.

    Attributes:
        formal_equilibrium: interior equilibrium for the Hamiltonian
        level_equilibrium: equilibrium whose skeleton fixes the section level
        scaling: group scaling λ
        casimirs: Casimir vectors
        structural_set: edge names of a declared structural set
        skew_model: declared skew-symmetric model A0, verified before use
    """

    formal_equilibrium: Tuple[Fraction, ...]
    level_equilibrium: Tuple[Fraction, ...]
    scaling: Tuple[Fraction, ...]
    casimirs: Tuple[Tuple[Fraction, ...], ...]
    structural_set: Tuple[str, ...]
    skew_model: Optional[Tuple[Tuple[Fraction, ...], ...]] = None


def parse_conservative_section(section: Optional[Dict[str, Any]]) -> Optional[ConservativeData]:
    """
    Typed view of a game file's 'conservative' section, None when absent.

    Raises:
        GameSpecError: If the section is not a mapping or an entry is missing or not rational
    """
    if not section:
        return None
    try:
        formal = parse_rational_vector(section["formal_equilibrium"])
        return ConservativeData(
            formal_equilibrium=formal,
            level_equilibrium=parse_rational_vector(section.get("level_equilibrium", formal)),
            scaling=parse_rational_vector(section.get("scaling", [1])),
            casimirs=tuple(parse_rational_vector(w) for w in section.get("casimirs", [])),
            structural_set=tuple(str(e) for e in section.get("structural_set", [])),
            skew_model=rational_matrix(section["skew_model"]) if "skew_model" in section else None,
        )
    except (AttributeError, KeyError, TypeError, ValueError) as e:
        log.error(f"Malformed 'conservative' section: {e}")
        raise GameSpecError(f"malformed 'conservative' section: {e}") from e
