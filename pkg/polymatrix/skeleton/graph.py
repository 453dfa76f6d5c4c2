"""
Edge classification and the flowing-edge digraph.

An edge γ = (v, v') is flowing from v to v' when the character at the
corner of v opposite γ is negative and the one at v' is positive, neutral
when both vanish and singular otherwise.
"""

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import sympy as sp

from core.config import config
from core.logger import log
from polymatrix.errors import StructuralSetError
from polymatrix.game_core import Edge, GameSpec, edge_label, payoff_excess
from polymatrix.skeleton.character import CharacterTable


class EdgeClass(str, Enum):
    FLOWING = "flowing"
    NEUTRAL = "neutral"
    SINGULAR = "singular"


class FacetAudit(str, Enum):
    NONZERO_CHARACTER = "nonzero-character"
    NONZERO_SYMBOLIC = "nonzero-symbolic"
    DEGENERATE = "degenerate"
    EMPTY = "empty"


@dataclass(frozen=True)
class EdgeStatus:
    """Classification of one edge; source and target are set for flowing edges."""

    edge: Edge
    kind: EdgeClass
    corner_values: Tuple[Fraction, Fraction]
    source: Optional[int] = None
    target: Optional[int] = None


class FlowGraph:
    """Classified edges, the flowing-edge digraph and the per-vertex saddle flags."""

    def __init__(self, character: CharacterTable, statuses: Sequence[EdgeStatus], facet_audit: Dict[int, FacetAudit]):
        self.character = character
        self.complex = character.complex
        self.statuses: Tuple[EdgeStatus, ...] = tuple(statuses)
        self.facet_audit = dict(facet_audit)
        self._by_name = {s.edge.name: s for s in self.statuses}
        self.digraph = nx.DiGraph()
        self.digraph.add_nodes_from(v.index for v in self.complex.vertices)
        for status in self.statuses:
            if status.kind is EdgeClass.FLOWING:
                self.digraph.add_edge(status.source, status.target, name=status.edge.name)
        self.saddles = {v.index: character.is_saddle(v.index) for v in self.complex.vertices}

    def status(self, name: str) -> EdgeStatus:
        return self._by_name[edge_label(name)]

    def names(self, kind: EdgeClass) -> List[str]:
        return [s.edge.name for s in self.statuses if s.kind is kind]

    @property
    def flowing(self) -> List[str]:
        return self.names(EdgeClass.FLOWING)

    @property
    def neutral(self) -> List[str]:
        return self.names(EdgeClass.NEUTRAL)

    @property
    def singular(self) -> List[str]:
        return self.names(EdgeClass.SINGULAR)

    @property
    def flow_regular(self) -> bool:
        return not self.singular

    @property
    def regular(self) -> bool:
        """No singular edge and no facet on which the payoff excess vanishes identically."""
        return self.flow_regular and all(a is not FacetAudit.DEGENERATE for a in self.facet_audit.values())

    def source(self, name: str) -> int:
        return self._flowing_status(name).source

    def target(self, name: str) -> int:
        return self._flowing_status(name).target

    def _flowing_status(self, name: str) -> EdgeStatus:
        status = self.status(name)
        if status.kind is not EdgeClass.FLOWING:
            raise StructuralSetError(f"{status.edge.name} is {status.kind.value}, not flowing")
        return status

    def out_edges(self, v: int) -> List[str]:
        """Names of the flowing edges leaving v, in edge order."""
        names = [data["name"] for _, _, data in self.digraph.out_edges(v, data=True)]
        return sorted(names, key=lambda n: self.complex.edge(n).index)

    def in_edges(self, v: int) -> List[str]:
        names = [data["name"] for _, _, data in self.digraph.in_edges(v, data=True)]
        return sorted(names, key=lambda n: self.complex.edge(n).index)

    def edge_between(self, u: int, v: int) -> str:
        return self.digraph.edges[u, v]["name"]

    def __repr__(self) -> str:
        return f"FlowGraph(flowing={len(self.flowing)}, neutral={len(self.neutral)}, singular={len(self.singular)})"


def _facet_barycenter(game: GameSpec, sigma: int) -> Optional[List[Fraction]]:
    x = []
    for alpha in range(game.p):
        members = [i for i in game.members(alpha) if i != sigma]
        if not members:
            return None
        for i in game.members(alpha):
            x.append(Fraction(0) if i == sigma else Fraction(1, len(members)))
    return x


def regularity_audit(character: CharacterTable, sigma: int) -> FacetAudit:
    """
    Decide whether H_σ vanishes identically on the facet σ.

    A nonzero character entry settles it; otherwise H_σ is evaluated at the
    facet vertices and barycenter and, if all vanish, expanded symbolically
    in affine coordinates of the facet.
    """
    game = character.game
    complex_ = character.complex
    vertices = complex_.facet_vertices(sigma)
    if not vertices:
        return FacetAudit.EMPTY
    if any(character.chi(v.index, sigma) != 0 for v in vertices):
        return FacetAudit.NONZERO_CHARACTER

    barycenter = _facet_barycenter(game, sigma)
    if barycenter is not None and payoff_excess(game, barycenter, sigma) != 0:
        return FacetAudit.NONZERO_SYMBOLIC

    symbols = sp.symbols(f"x0:{game.n}")
    x: List[sp.Expr] = list(symbols)
    for alpha in range(game.p):
        members = [i for i in game.members(alpha) if i != sigma]
        pivot = members[0]
        for i in game.members(alpha):
            if i == sigma:
                x[i] = sp.Integer(0)
        x[pivot] = 1 - sum(x[i] for i in members if i != pivot)
    A = game.matrix
    ax = A * sp.Matrix(x)
    alpha = game.group_of[sigma]
    h = ax[sigma] - sum(x[k] * ax[k] for k in game.members(alpha))
    if sp.expand(h) == 0:
        log.debug(f"Payoff excess vanishes identically on σ{sigma + 1}")
        return FacetAudit.DEGENERATE
    return FacetAudit.NONZERO_SYMBOLIC


def classify_edges(character: CharacterTable) -> FlowGraph:
    """Label every edge flowing, neutral or singular and audit every facet."""
    complex_ = character.complex
    statuses = []
    for edge in complex_.edges:
        u, v = edge.ends
        at_u = character.chi(u, complex_.opposite_facet(u, edge))
        at_v = character.chi(v, complex_.opposite_facet(v, edge))
        if at_u < 0 < at_v:
            statuses.append(EdgeStatus(edge, EdgeClass.FLOWING, (at_u, at_v), u, v))
        elif at_v < 0 < at_u:
            statuses.append(EdgeStatus(edge, EdgeClass.FLOWING, (at_u, at_v), v, u))
        elif at_u == 0 and at_v == 0:
            statuses.append(EdgeStatus(edge, EdgeClass.NEUTRAL, (at_u, at_v)))
        else:
            statuses.append(EdgeStatus(edge, EdgeClass.SINGULAR, (at_u, at_v)))
    audit = {sigma: regularity_audit(character, sigma) for sigma in complex_.facets}
    graph = FlowGraph(character, statuses, audit)
    log.info(f"Classified edges of '{character.game.name}': {graph!r}")
    return graph


@dataclass(frozen=True)
class StructuralSetCertificate:
    """
    Outcome of a structural set check.

    A valid set comes with a topological order of the digraph without it; an
    invalid one with a cycle that avoids it.
    """

    edges: Tuple[str, ...]
    valid: bool
    order: Tuple[int, ...] = ()
    cycle: Tuple[str, ...] = ()


def _without(graph: FlowGraph, edges: Iterable[str]) -> nx.DiGraph:
    removed = set(edges)
    reduced = graph.digraph.copy()
    reduced.remove_edges_from([(u, v) for u, v, data in graph.digraph.edges(data=True) if data["name"] in removed])
    return reduced


def verify_structural_set(graph: FlowGraph, edges: Iterable[str]) -> StructuralSetCertificate:
    """
    Every heteroclinic cycle meets the set iff the digraph without it is acyclic.

    Raises:
        StructuralSetError: If some edge is not flowing
    """
    names = tuple(sorted({edge_label(e) for e in edges}, key=lambda n: graph.complex.edge(n).index))
    not_flowing = [n for n in names if n not in set(graph.flowing)]
    if not_flowing:
        raise StructuralSetError(f"edges {', '.join(not_flowing)} are not flowing edges")
    reduced = _without(graph, names)
    if nx.is_directed_acyclic_graph(reduced):
        return StructuralSetCertificate(names, True, order=tuple(nx.lexicographical_topological_sort(reduced)))
    cycle = nx.find_cycle(reduced)
    return StructuralSetCertificate(names, False, cycle=tuple(reduced.edges[u, v]["name"] for u, v in cycle))


def find_structural_set(graph: FlowGraph, exhaustive_max: Optional[int] = None) -> StructuralSetCertificate:
    """
    Minimum-size structural set by exhaustive search up to exhaustive_max edges,
    then a greedy feedback-edge cover pruned back to a minimal one.
    """
    exhaustive_max = config.structural_exhaustive_max if exhaustive_max is None else exhaustive_max
    flowing = graph.flowing
    for size in range(0, min(exhaustive_max, len(flowing)) + 1):
        for subset in itertools.combinations(flowing, size):
            certificate = verify_structural_set(graph, subset)
            if certificate.valid:
                log.info(f"Structural set of size {size}: {{{', '.join(subset)}}}")
                return certificate

    chosen: List[str] = []
    reduced = graph.digraph.copy()
    while not nx.is_directed_acyclic_graph(reduced):
        cycle = nx.find_cycle(reduced)

        def weight(e):
            return reduced.out_degree(e[0]) + reduced.in_degree(e[1]), -graph.complex.edge(reduced.edges[e]["name"]).index

        u, v = max(cycle, key=weight)
        chosen.append(reduced.edges[u, v]["name"])
        reduced.remove_edge(u, v)
    for name in list(chosen):
        trial = [c for c in chosen if c != name]
        if verify_structural_set(graph, trial).valid:
            chosen = trial
    certificate = verify_structural_set(graph, chosen)
    log.info(f"Greedy structural set of size {len(chosen)}: {{{', '.join(certificate.edges)}}}")
    return certificate


def structural_set(graph: FlowGraph, edges: Optional[Iterable[str]] = None) -> StructuralSetCertificate:
    """Verify the given set, or find one when none is given."""
    if edges is None:
        return find_structural_set(graph)
    return verify_structural_set(graph, edges)


def heteroclinic_cycles(graph: FlowGraph, limit: int = 1000) -> List[Tuple[str, ...]]:
    """Simple cycles of the flowing-edge digraph as edge-name tuples."""
    cycles = []
    for cycle in nx.simple_cycles(graph.digraph):
        names = tuple(graph.edge_between(cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle)))
        cycles.append(names)
        if len(cycles) >= limit:
            break
    return cycles
