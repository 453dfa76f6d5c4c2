"""
Polymatrix games, the replicator vector field and the cell complex of the prism.

A game is a partition of n strategies into p groups plus an n×n payoff
matrix. Strategies, facets and vertices are 0-based inside the package and
1-based in every file or printed label.
"""

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
import yaml

from core.data import read_yaml_file
from core.logger import log
from core.utils import format_rational, normalize_label, parse_rational
from polymatrix.errors import AdjacencyError, DomainError, FaceError, GameSpecError
from polymatrix.linalg import Rows, Vector

EDGE_PREFIX = "γ"
EDGE_ALIASES = ("g", "gamma")
FLOAT_SIMPLEX_TOL = 1e-9


def _spec_error(message: str) -> GameSpecError:
    log.error(f"Invalid game: {message}")
    return GameSpecError(message)


def edge_label(text: str) -> str:
    """Canonical edge name: 'g3', 'gamma3' and '3' all become 'γ3'."""
    return normalize_label(text, EDGE_PREFIX, EDGE_ALIASES)


@dataclass(frozen=True)
class GameSpec:
    """
    A polymatrix game.

    Attributes:
        groups: group sizes n_1..n_p, each at least 1
        payoff: the n×n payoff matrix as exact rationals
        name: display name
        edge_labels: optional (name, (v, v')) pairs with 1-based vertex numbers
    """

    groups: Tuple[int, ...]
    payoff: Rows
    name: str = "game"
    edge_labels: Tuple[Tuple[str, Tuple[int, int]], ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.groups:
            raise _spec_error("a game needs at least one group")
        for size in self.groups:
            if not isinstance(size, int) or isinstance(size, bool) or size < 1:
                raise _spec_error(f"group sizes must be positive integers, got {size!r}")
        n = sum(self.groups)
        if len(self.payoff) != n or any(len(row) != n for row in self.payoff):
            raise _spec_error(f"payoff matrix must be {n}x{n} for groups {list(self.groups)}")

    @property
    def n(self) -> int:
        return sum(self.groups)

    @property
    def p(self) -> int:
        return len(self.groups)

    @cached_property
    def offsets(self) -> Tuple[int, ...]:
        return tuple(itertools.accumulate((0,) + self.groups[:-1]))

    @cached_property
    def group_of(self) -> Tuple[int, ...]:
        return tuple(alpha for alpha, size in enumerate(self.groups) for _ in range(size))

    def members(self, alpha: int) -> range:
        return range(self.offsets[alpha], self.offsets[alpha] + self.groups[alpha])

    def block(self, alpha: int, beta: int) -> Rows:
        return tuple(tuple(self.payoff[i][j] for j in self.members(beta)) for i in self.members(alpha))

    @cached_property
    def matrix(self) -> sp.ImmutableMatrix:
        return sp.ImmutableMatrix([[sp.Rational(v.numerator, v.denominator) for v in row] for row in self.payoff])

    @cached_property
    def payoff_float(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.payoff], dtype=float)

    def to_yaml_dict(self) -> Dict[str, Any]:
        """Round-trippable mapping using canonical 'p/q' text for non-integers."""
        data: Dict[str, Any] = {
            "name": self.name,
            "groups": list(self.groups),
            "payoff": [[v.numerator if v.denominator == 1 else format_rational(v) for v in row] for row in self.payoff],
        }
        if self.edge_labels:
            data["edges"] = {name: list(ends) for name, ends in self.edge_labels}
        return data


def parse_game(source: Union[str, Mapping[str, Any]], name: Optional[str] = None) -> GameSpec:
    """
    Build a GameSpec from YAML text or an already parsed mapping.

    Raises:
        GameSpecError: On any structural problem or non-rational payoff entry
    """
    if isinstance(source, str):
        try:
            source = yaml.safe_load(source)
        except yaml.YAMLError as e:
            raise _spec_error(f"game text is not valid YAML: {e}") from e
    if not isinstance(source, Mapping):
        raise _spec_error("game description must be a mapping with 'groups' and 'payoff'")

    for key in ("groups", "payoff"):
        if key not in source:
            raise _spec_error(f"game description is missing '{key}'")

    groups = source["groups"]
    if not isinstance(groups, (list, tuple)) or not all(isinstance(s, int) and not isinstance(s, bool) for s in groups):
        raise _spec_error(f"'groups' must be a list of integers, got {groups!r}")

    raw_payoff = source["payoff"]
    if not isinstance(raw_payoff, (list, tuple)) or not all(isinstance(r, (list, tuple)) for r in raw_payoff):
        raise _spec_error("'payoff' must be a list of rows")
    payoff = []
    for i, row in enumerate(raw_payoff):
        parsed = []
        for j, entry in enumerate(row):
            try:
                parsed.append(parse_rational(entry))
            except ValueError as e:
                raise _spec_error(f"payoff entry ({i + 1},{j + 1}) is not rational: {entry!r}") from e
        payoff.append(tuple(parsed))

    edge_labels: Tuple[Tuple[str, Tuple[int, int]], ...] = ()
    edges = source.get("edges")
    if edges:
        if not isinstance(edges, Mapping):
            raise _spec_error("'edges' must map edge names to vertex pairs")
        try:
            edge_labels = tuple((edge_label(str(k)), (int(v[0]), int(v[1]))) for k, v in edges.items())
        except (TypeError, ValueError, IndexError) as e:
            raise _spec_error(f"'edges' entries must be [v, v'] pairs: {e}") from e

    game = GameSpec(
        groups=tuple(groups),
        payoff=tuple(payoff),
        name=str(name or source.get("name", "game")),
        edge_labels=edge_labels,
    )
    log.debug(f"Parsed game '{game.name}' with groups {list(game.groups)}")
    return game


def load_game_file(path: Union[Path, str]) -> GameSpec:
    """Parse a game file from disk."""
    data = read_yaml_file(path)
    return parse_game(data, name=data.get("name", Path(path).stem))


def barycenter(game: GameSpec) -> Vector:
    return tuple(Fraction(1, game.groups[game.group_of[i]]) for i in range(game.n))


def _check_point(game: GameSpec, x: Sequence) -> None:
    if len(x) != game.n:
        raise DomainError(f"point has {len(x)} coordinates, game has {game.n} strategies")
    exact = all(isinstance(v, (int, Fraction)) for v in x)
    tol = 0 if exact else FLOAT_SIMPLEX_TOL
    if any(v < -tol for v in x):
        raise DomainError("point has a negative coordinate")
    for alpha in range(game.p):
        total = sum(x[i] for i in game.members(alpha))
        if abs(total - 1) > tol:
            raise DomainError(f"group {alpha + 1} of the point sums to {total}, not 1")


def vector_field(game: GameSpec, x: Sequence, check: bool = True) -> tuple:
    """
    Replicator vector field X_i = x_i((Ax)_i - Σ_β (x^α)ᵀ A^{αβ} x^β).

    Exact for Fraction input, floating point for float input.
    """
    if check:
        _check_point(game, x)
    ax = [sum(a * xj for a, xj in zip(row, x) if a) for row in game.payoff]
    result = [0] * game.n
    for alpha in range(game.p):
        members = game.members(alpha)
        mean = sum(x[i] * ax[i] for i in members)
        for i in members:
            result[i] = x[i] * (ax[i] - mean)
    return tuple(result)


def payoff_excess(game: GameSpec, x: Sequence, i: int) -> Any:
    """H_i(x) = (Ax)_i - Σ_β (x^α)ᵀ A^{αβ} x^β for strategy i in group α."""
    ax = [sum(a * xj for a, xj in zip(row, x) if a) for row in game.payoff]
    alpha = game.group_of[i]
    return ax[i] - sum(x[k] * ax[k] for k in game.members(alpha))


def equal_rows_equivalent(game: GameSpec, first: Sequence[Sequence], second: Sequence[Sequence]) -> bool:
    """True when every block of first - second has equal rows."""
    n = game.n
    if len(first) != n or len(second) != n or any(len(r) != n for r in (*first, *second)):
        raise _spec_error(f"both matrices must be {n}x{n}")
    for alpha in range(game.p):
        rows = list(game.members(alpha))
        for beta in range(game.p):
            cols = game.members(beta)
            reference = [first[rows[0]][j] - second[rows[0]][j] for j in cols]
            for i in rows[1:]:
                if any(first[i][j] - second[i][j] != ref for j, ref in zip(cols, reference)):
                    return False
    return True


def restrict_to_face(game: GameSpec, strategies: Iterable[int]) -> GameSpec:
    """
    Sub-game on the face spanned by the given 0-based strategies.

    Raises:
        FaceError: If some group keeps no strategy
    """
    kept = sorted(set(strategies))
    if any(i < 0 or i >= game.n for i in kept):
        raise FaceError(f"strategy indices out of range: {[i + 1 for i in kept]}")
    sizes = []
    for alpha in range(game.p):
        count = sum(1 for i in kept if game.group_of[i] == alpha)
        if count == 0:
            raise FaceError(f"face misses group {alpha + 1}")
        sizes.append(count)
    if len(kept) == game.n:
        return game
    payoff = tuple(tuple(game.payoff[i][j] for j in kept) for i in kept)
    return GameSpec(groups=tuple(sizes), payoff=payoff, name=f"{game.name}|face")


@dataclass(frozen=True)
class Vertex:
    """A vertex of the prism: one pure strategy per group."""

    index: int
    strategies: Tuple[int, ...]

    @property
    def name(self) -> str:
        return f"v{self.index + 1}"

    @property
    def label(self) -> Tuple[int, ...]:
        return tuple(s + 1 for s in self.strategies)


@dataclass(frozen=True)
class Edge:
    """
    An edge of the prism: two vertices that differ in exactly one group.

    Attributes:
        ends: vertex indices, in listing order (the flow graph orients edges separately)
        group: the group whose strategy changes along the edge
        strategies: the strategies of both endpoints
        facets: the facets containing the edge
    """

    index: int
    name: str
    ends: Tuple[int, int]
    group: int
    strategies: FrozenSet[int]
    facets: FrozenSet[int]

    def other(self, vertex: int) -> int:
        if vertex == self.ends[0]:
            return self.ends[1]
        if vertex == self.ends[1]:
            return self.ends[0]
        raise AdjacencyError(f"vertex v{vertex + 1} is not an endpoint of {self.name}")


class CellComplex:
    """Vertices, edges and facets of Γ_G."""

    def __init__(self, game: GameSpec, vertices: Sequence[Vertex], edges: Sequence[Edge]):
        self.game = game
        self.vertices: Tuple[Vertex, ...] = tuple(vertices)
        self.edges: Tuple[Edge, ...] = tuple(edges)
        self.facets: Tuple[int, ...] = tuple(range(game.n))
        self._by_label = {v.strategies: v for v in self.vertices}
        self._edge_by_name = {e.name: e for e in self.edges}
        self._edge_by_ends = {frozenset(e.ends): e for e in self.edges}

    def vertex(self, key: Union[int, str, Sequence[int]]) -> Vertex:
        """Look up a vertex by 0-based index, name 'v3' or 0-based strategy tuple."""
        if isinstance(key, Vertex):
            return key
        if isinstance(key, int):
            return self.vertices[key]
        if isinstance(key, str):
            text = key.strip().lower()
            if text.startswith("v") and text[1:].isdigit() and 1 <= int(text[1:]) <= len(self.vertices):
                return self.vertices[int(text[1:]) - 1]
            raise KeyError(f"unknown vertex '{key}'")
        return self._by_label[tuple(key)]

    def edge(self, name: str) -> Edge:
        label = edge_label(name)
        if label not in self._edge_by_name:
            raise KeyError(f"unknown edge '{name}', available: {', '.join(self._edge_by_name)}")
        return self._edge_by_name[label]

    def edge_between(self, u: int, v: int) -> Edge:
        key = frozenset((u, v))
        if key not in self._edge_by_ends:
            raise AdjacencyError(f"v{u + 1} and v{v + 1} are not adjacent")
        return self._edge_by_ends[key]

    def edges_at(self, v: int) -> List[Edge]:
        return [e for e in self.edges if v in e.ends]

    def facets_at(self, v: int) -> Tuple[int, ...]:
        """F_v: the facets containing vertex v, in ascending order."""
        strategies = set(self.vertices[v].strategies)
        return tuple(i for i in self.facets if i not in strategies)

    def opposite_facet(self, v: int, edge: Edge) -> int:
        """The facet of F_v that does not contain the edge."""
        other = self.vertices[edge.other(v)]
        return other.strategies[edge.group]

    def facet_vertices(self, sigma: int) -> List[Vertex]:
        return [v for v in self.vertices if sigma not in v.strategies]

    def face_vertices(self, strategies: Iterable[int]) -> List[Vertex]:
        kept = set(strategies)
        return [v for v in self.vertices if set(v.strategies) <= kept]

    def __repr__(self) -> str:
        return f"CellComplex(vertices={len(self.vertices)}, edges={len(self.edges)}, facets={len(self.facets)})"


def _edge_record(game: GameSpec, index: int, name: str, first: Vertex, second: Vertex) -> Edge:
    changed = [alpha for alpha in range(game.p) if first.strategies[alpha] != second.strategies[alpha]]
    if len(changed) != 1:
        raise AdjacencyError(f"{first.name} and {second.name} differ in {len(changed)} groups")
    strategies = frozenset(first.strategies) | frozenset(second.strategies)
    facets = frozenset(i for i in range(game.n) if i not in strategies)
    return Edge(index, name, (first.index, second.index), changed[0], strategies, facets)


def enumerate_cells(game: GameSpec) -> CellComplex:
    """
    Vertices in lexicographic order of their strategy tuples, edges named γ1..γE.

    Edge names follow the game's explicit edge labels when present, otherwise
    the lexicographic order of the endpoint pairs.
    """
    vertices = [Vertex(k, tuple(s)) for k, s in enumerate(itertools.product(*(game.members(a) for a in range(game.p))))]
    pairs = [
        (a, b)
        for a, b in itertools.combinations(vertices, 2)
        if sum(1 for x, y in zip(a.strategies, b.strategies) if x != y) == 1
    ]

    if game.edge_labels:
        expected = {frozenset((a.index, b.index)) for a, b in pairs}
        given = {}
        for name, (u, v) in game.edge_labels:
            if not (1 <= u <= len(vertices) and 1 <= v <= len(vertices)):
                raise _spec_error(f"edge {name} refers to a missing vertex")
            key = frozenset((u - 1, v - 1))
            if key not in expected:
                raise _spec_error(f"edge {name} joins non-adjacent vertices v{u} and v{v}")
            if key in given.values():
                raise _spec_error(f"edge {name} duplicates another labelled edge")
            given[name] = key
        if len(given) != len(expected):
            raise _spec_error(f"edge labels cover {len(given)} of {len(expected)} edges")
        ordered = sorted(game.edge_labels, key=lambda item: (len(item[0]), item[0]))
        edges = [
            _edge_record(game, k, name, vertices[u - 1], vertices[v - 1]) for k, (name, (u, v)) in enumerate(ordered)
        ]
    else:
        edges = [_edge_record(game, k, f"{EDGE_PREFIX}{k + 1}", a, b) for k, (a, b) in enumerate(pairs)]

    complex_ = CellComplex(game, vertices, edges)
    log.debug(f"Enumerated {complex_!r} for game '{game.name}'")
    return complex_
