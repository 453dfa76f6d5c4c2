"""
Skeleton Package

The asymptotic dynamics of a heteroclinic network on the dual cone:
- character: the skeleton character table χ
- graph: edge classification, flow digraph and structural sets
- branches: vertex transitions, S-branches and the piecewise linear map π_S
- sections: invariant level functionals and their planar sections
- orbits: exact iteration, periodic points and spectra
"""

from polymatrix.skeleton.branches import (
    Branch,
    PiecewiseLinearMap,
    VertexBranch,
    branch_digraph,
    branch_label,
    branch_matrix,
    branch_table,
    enumerate_branches,
    section_cone,
    vertex_branch,
)
from polymatrix.skeleton.character import CharacterTable, skeleton_character
from polymatrix.skeleton.graph import (
    EdgeClass,
    FacetAudit,
    FlowGraph,
    classify_edges,
    find_structural_set,
    heteroclinic_cycles,
    regularity_audit,
    structural_set,
    verify_structural_set,
)
from polymatrix.skeleton.orbits import (
    OrbitRecord,
    OrbitStatus,
    certify_periodic,
    find_periodic_points,
    iterate_skeleton,
    spectrum,
)
from polymatrix.skeleton.sections import (
    LevelPolygon,
    coverage,
    edge_polygon,
    eta_eval,
    level_polygon,
    sample_section_point,
)

__all__ = [
    "Branch",
    "CharacterTable",
    "EdgeClass",
    "FacetAudit",
    "FlowGraph",
    "LevelPolygon",
    "OrbitRecord",
    "OrbitStatus",
    "PiecewiseLinearMap",
    "VertexBranch",
    "branch_digraph",
    "branch_label",
    "branch_matrix",
    "branch_table",
    "certify_periodic",
    "classify_edges",
    "coverage",
    "edge_polygon",
    "enumerate_branches",
    "eta_eval",
    "find_periodic_points",
    "find_structural_set",
    "heteroclinic_cycles",
    "iterate_skeleton",
    "level_polygon",
    "regularity_audit",
    "sample_section_point",
    "section_cone",
    "skeleton_character",
    "spectrum",
    "structural_set",
    "verify_structural_set",
    "vertex_branch",
]
