"""
Vertex transitions, S-branches and the piecewise linear skeleton flow map.

All maps act on ℝ^F with global facet coordinates; points of the section of
an edge γ vanish on the facets that do not contain γ.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from core.config import config
from core.logger import log
from core.utils import normalize_label
from polymatrix.cones import ConeSector
from polymatrix.errors import DegenerateCornerError, ItineraryError, StructuralSetError
from polymatrix.game_core import edge_label
from polymatrix.linalg import Rows, Vector, identity, mat_mul, mat_vec
from polymatrix.skeleton.graph import FlowGraph, verify_structural_set

BRANCH_PREFIX = "ξ"
BRANCH_ALIASES = ("xi", "x")


def branch_label(text: str) -> str:
    """Canonical branch name: 'xi2', 'x2' and '2' all become 'ξ2'."""
    return normalize_label(text, BRANCH_PREFIX, BRANCH_ALIASES)


@dataclass(frozen=True)
class VertexBranch:
    """
    The asymptotic transition at a vertex from an incoming to an outgoing flowing edge.

    Attributes:
        pivot: the facet σ* opposite the outgoing edge
        entry: the facet opposite the incoming edge
        matrix: L = I - χ^v e_{σ*}ᵀ / χ^v_{σ*} on ℝ^F
        sector: the cone of incoming section points that leave along the outgoing edge
    """

    vertex: int
    incoming: str
    outgoing: str
    pivot: int
    entry: int
    pivot_character: Fraction
    character: Vector
    matrix: Rows
    sector: ConeSector

    def flow_time(self, y: Sequence[Fraction]) -> Fraction:
        """t(y) = -y_{σ*} / χ^v_{σ*}, so that L(y) = y + t(y) χ^v."""
        return -Fraction(y[self.pivot]) / self.pivot_character


def section_cone(graph: FlowGraph, edge: str) -> ConeSector:
    """Π_γ: positive on the facets containing γ, zero elsewhere."""
    record = graph.complex.edge(edge)
    n = graph.character.game.n
    rows = [tuple(Fraction(int(k == sigma)) for k in range(n)) for sigma in sorted(record.facets)]
    return ConeSector.build(n, rows, set(range(n)) - set(record.facets))


def vertex_branch(graph: FlowGraph, incoming: str, outgoing: str) -> VertexBranch:
    """
    Build L_{γ,γ'} and Π_{γ,γ'} at the common vertex of two flowing edges.

    Raises:
        ItineraryError: If the edges do not meet head to tail
        DegenerateCornerError: If the pivot character vanishes
    """
    incoming, outgoing = edge_label(incoming), edge_label(outgoing)
    v = graph.target(incoming)
    if graph.source(outgoing) != v:
        raise ItineraryError(f"{incoming} ends at v{v + 1} but {outgoing} starts at v{graph.source(outgoing) + 1}")
    complex_ = graph.complex
    character = graph.character
    n = character.game.n
    in_edge, out_edge = complex_.edge(incoming), complex_.edge(outgoing)
    pivot = complex_.opposite_facet(v, out_edge)
    entry = complex_.opposite_facet(v, in_edge)
    chi = character.vector(v)
    pivot_value = chi[pivot]
    if pivot_value == 0:
        raise DegenerateCornerError(f"character vanishes at the corner (v{v + 1}, {outgoing}, σ{pivot + 1})")

    matrix = [list(row) for row in identity(n)]
    for sigma in complex_.facets_at(v):
        matrix[sigma][pivot] -= chi[sigma] / pivot_value
    matrix = tuple(tuple(row) for row in matrix)

    facets_in = sorted(in_edge.facets)
    rows = [tuple(Fraction(int(k == sigma)) for k in range(n)) for sigma in facets_in]
    rows += [matrix[sigma] for sigma in complex_.facets_at(v) if sigma != pivot]
    sector = ConeSector.build(n, rows, set(range(n)) - set(in_edge.facets))
    return VertexBranch(v, incoming, outgoing, pivot, entry, pivot_value, chi, matrix, sector)


@dataclass(frozen=True)
class Branch:
    """
    An S-branch: a path γ0, ..., γm of flowing edges with γ0, γm in S and no
    interior edge in S, with its composed map and open domain in Π_{γ0}.
    """

    name: str
    edges: Tuple[str, ...]
    vertices: Tuple[int, ...]
    matrix: Rows
    domain: ConeSector
    witness: Vector
    steps: Tuple[VertexBranch, ...]

    @property
    def start(self) -> str:
        return self.edges[0]

    @property
    def end(self) -> str:
        return self.edges[-1]

    @property
    def label(self) -> Tuple[int, ...]:
        """1-based vertex itinerary."""
        return tuple(v + 1 for v in self.vertices)

    def apply(self, y: Sequence[Fraction]) -> Vector:
        return mat_vec(self.matrix, y)


class PiecewiseLinearMap:
    """The skeleton flow map π_S as a list of S-branches."""

    def __init__(self, graph: FlowGraph, structural: Sequence[str], branches: Sequence[Branch]):
        self.graph = graph
        self.structural: Tuple[str, ...] = tuple(structural)
        self.branches: Tuple[Branch, ...] = tuple(branches)
        self._by_name = {b.name: b for b in self.branches}
        self.dim = graph.character.game.n

    def branch(self, name: str) -> Branch:
        label = branch_label(name)
        if label not in self._by_name:
            raise KeyError(f"unknown branch '{name}', available: {', '.join(self._by_name)}")
        return self._by_name[label]

    def branches_from(self, edge: str) -> List[Branch]:
        edge = edge_label(edge)
        return [b for b in self.branches if b.start == edge]

    def section_cone(self, edge: str) -> ConeSector:
        return section_cone(self.graph, edge)

    def select(self, y: Sequence[Fraction]) -> Optional[Branch]:
        """The branch whose open domain contains y, or None on a boundary."""
        for branch in self.branches:
            if branch.domain.contains(y):
                return branch
        return None

    def __repr__(self) -> str:
        return f"PiecewiseLinearMap(S={{{', '.join(self.structural)}}}, branches={len(self.branches)})"


def _compose(graph: FlowGraph, edges: Sequence[str]) -> Tuple[Rows, ConeSector, Tuple[VertexBranch, ...]]:
    steps = tuple(vertex_branch(graph, a, b) for a, b in zip(edges, edges[1:]))
    zeros = steps[0].sector.zero_coordinates
    domain = steps[0].sector
    matrix = steps[0].matrix
    for step in steps[1:]:
        domain = domain.intersect(step.sector.pullback(matrix, zeros))
        matrix = mat_mul(step.matrix, matrix)
    return matrix, domain, steps


def _paths(graph: FlowGraph, start: str, structural: Sequence[str]) -> List[Tuple[str, ...]]:
    """Depth-first paths from start to the next edge of the structural set."""
    members = set(structural)
    found: List[Tuple[str, ...]] = []
    stack: List[Tuple[str, ...]] = [(start,)]
    while stack:
        path = stack.pop()
        for name in reversed(graph.out_edges(graph.target(path[-1]))):
            if name in members:
                found.append(path + (name,))
            else:
                stack.append(path + (name,))
    return found


def enumerate_branches(graph: FlowGraph, structural: Iterable[str]) -> PiecewiseLinearMap:
    """
    All S-branches with nonempty domain, named ξ1, ξ2, ... in order of start
    edge, path length and vertex itinerary.

    Raises:
        StructuralSetError: If the edge set is not a structural set
    """
    certificate = verify_structural_set(graph, structural)
    if not certificate.valid:
        raise StructuralSetError(f"{{{', '.join(certificate.edges)}}} misses the cycle {' -> '.join(certificate.cycle)}")
    structural = certificate.edges

    paths = [p for start in structural for p in _paths(graph, start, structural)]

    def build(path: Tuple[str, ...]):
        matrix, domain, steps = _compose(graph, path)
        return path, matrix, domain, steps, domain.witness()

    if config.parallel_workers > 1:
        with ThreadPoolExecutor(max_workers=config.parallel_workers) as pool:
            built = list(pool.map(build, paths))
    else:
        built = [build(p) for p in paths]

    def order(item):
        path = item[0]
        return graph.complex.edge(path[0]).index, len(path), tuple(s.vertex for s in item[3])

    branches = []
    for path, matrix, domain, steps, witness in sorted(built, key=order):
        if witness is None:
            log.debug(f"Discarding empty branch {' -> '.join(path)}")
            continue
        vertices = (graph.source(path[0]),) + tuple(graph.target(e) for e in path)
        branches.append(Branch(f"{BRANCH_PREFIX}{len(branches) + 1}", path, vertices, matrix, domain, witness, steps))
    result = PiecewiseLinearMap(graph, structural, branches)
    log.info(f"Enumerated {result!r} from {len(paths)} candidate paths")
    return result


def branch_matrix(pl: PiecewiseLinearMap, word: Sequence[str]) -> Rows:
    """
    Product of branch matrices in flow order; the empty word gives the identity.

    Raises:
        ItineraryError: If consecutive branches do not chain
    """
    branches = [pl.branch(name) for name in word]
    for first, second in zip(branches, branches[1:]):
        if first.end != second.start:
            raise ItineraryError(f"{first.name} ends on {first.end} but {second.name} starts on {second.start}")
    matrix = identity(pl.dim)
    for branch in branches:
        matrix = mat_mul(branch.matrix, matrix)
    return matrix


def branch_table(pl: PiecewiseLinearMap) -> Dict[str, Tuple[int, ...]]:
    """Branch name to 1-based vertex itinerary."""
    return {b.name: b.label for b in pl.branches}


def branch_digraph(pl: PiecewiseLinearMap) -> nx.DiGraph:
    """Branch ξ → ξ′ whenever ξ ends on the edge where ξ′ starts."""
    digraph = nx.DiGraph()
    digraph.add_nodes_from(b.name for b in pl.branches)
    for branch in pl.branches:
        digraph.add_edges_from((branch.name, nxt.name) for nxt in pl.branches_from(branch.end))
    return digraph
