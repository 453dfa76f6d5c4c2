"""
Report writers for the analysis artifacts.

Tables go through pandas and are written as CSV with "\\n" line endings;
exact values are printed as "p/q", floats with 17 significant digits. The
flow digraph is emitted as Graphviz DOT text and level polygons are plotted
to SVG with matplotlib. Every writer produces byte-identical files for
identical inputs.
"""

from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple

import matplotlib
import pandas as pd
import yaml
from matplotlib.figure import Figure

from core.logger import log
from core.utils import format_rational
from polymatrix.skeleton.branches import PiecewiseLinearMap
from polymatrix.skeleton.character import CharacterTable
from polymatrix.skeleton.graph import EdgeClass, FlowGraph
from polymatrix.skeleton.sections import LevelPolygon

UNDEFINED = "∗"
SVG_SALT = "polymatrix"


def character_frame(character: CharacterTable) -> pd.DataFrame:
    """Rows v1..vN, columns σ1..σn; entries off the facet are marked ∗."""
    complex_ = character.complex
    rows = []
    for vertex in complex_.vertices:
        row = {"vertex": vertex.name, "label": ",".join(str(s) for s in vertex.label)}
        for sigma in complex_.facets:
            value = character.get(vertex.index, sigma)
            row[f"σ{sigma + 1}"] = UNDEFINED if value is None else format_rational(value)
        rows.append(row)
    return pd.DataFrame(rows)


def edges_frame(graph: FlowGraph) -> pd.DataFrame:
    rows = []
    for status in graph.statuses:
        edge = status.edge
        u, v = edge.ends
        rows.append(
            {
                "edge": edge.name,
                "ends": f"v{u + 1}-v{v + 1}",
                "group": edge.group + 1,
                "class": status.kind.value,
                "source": "" if status.source is None else f"v{status.source + 1}",
                "target": "" if status.target is None else f"v{status.target + 1}",
                "chi_first": format_rational(status.corner_values[0]),
                "chi_second": format_rational(status.corner_values[1]),
            }
        )
    return pd.DataFrame(rows)


def flow_dot(graph: FlowGraph) -> str:
    """
    The heteroclinic network as a DOT digraph.

    Flowing edges are solid arrows from source to target, neutral edges dashed
    and undirected, singular edges dotted.
    """
    complex_ = graph.complex
    lines = [f'digraph "{complex_.game.name}" {{', "  node [shape=circle];"]
    for vertex in complex_.vertices:
        saddle = "" if graph.saddles[vertex.index] else ", style=filled"
        lines.append(f'  {vertex.name} [label="{vertex.name}\\n({",".join(str(s) for s in vertex.label)})"{saddle}];')
    for status in graph.statuses:
        u, v = status.edge.ends
        if status.kind is EdgeClass.FLOWING:
            lines.append(f'  v{status.source + 1} -> v{status.target + 1} [label="{status.edge.name}"];')
        elif status.kind is EdgeClass.NEUTRAL:
            lines.append(f'  v{u + 1} -> v{v + 1} [label="{status.edge.name}", style=dashed, dir=none];')
        else:
            lines.append(f'  v{u + 1} -> v{v + 1} [label="{status.edge.name}", style=dotted, dir=none];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def branches_frame(pl: PiecewiseLinearMap) -> pd.DataFrame:
    rows = []
    for branch in pl.branches:
        rows.append(
            {
                "branch": branch.name,
                "start": branch.start,
                "end": branch.end,
                "edges": " ".join(branch.edges),
                "vertices": " ".join(f"v{v}" for v in branch.label),
                "witness": ",".join(format_rational(v) for v in branch.witness),
            }
        )
    return pd.DataFrame(rows, columns=["branch", "start", "end", "edges", "vertices", "witness"])


def polygon_frame(polygon: LevelPolygon) -> pd.DataFrame:
    """Ambient vertices of a level polygon, in cyclic order."""
    rows = []
    for k, point in enumerate(polygon.ambient if polygon.section is not None else ()):
        row = {"vertex": k + 1}
        row.update({f"y{i + 1}": format_rational(v) for i, v in enumerate(point)})
        rows.append(row)
    return pd.DataFrame(rows)


def write_frame(frame: pd.DataFrame, path: Path, exact: bool = True) -> Path:
    """CSV without index; float columns use 17 significant digits unless the frame is exact."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    float_format = None if exact else "%.17g"
    frame.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
    log.debug(f"Wrote {len(frame)} rows to {path}")
    return path


def write_text(text: str, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    log.debug(f"Wrote {path}")
    return path


def write_lines(lines: Iterable[str], path: Path) -> Path:
    return write_text("\n".join(lines) + "\n", path)


def write_yaml(data: Dict[str, Any], path: Path) -> Path:
    return write_text(yaml.safe_dump(data, sort_keys=False, allow_unicode=True), path)


def plot_polygons(
    polygons: Sequence[LevelPolygon],
    projection: Tuple[int, int],
    path: Path,
    points: Optional[Sequence[Sequence]] = None,
) -> Path:
    """
    Level polygons projected onto two facet coordinates (0-based), with an
    optional point cloud on top, as a deterministic SVG.
    """
    first, second = projection
    matplotlib.rcParams["svg.hashsalt"] = SVG_SALT
    fig = Figure(figsize=(6, 6))
    ax = fig.subplots()
    for polygon in polygons:
        if polygon.empty:
            continue
        corners = polygon.project(first, second)
        xs = [c[0] for c in corners] + [corners[0][0]]
        ys = [c[1] for c in corners] + [corners[0][1]]
        ax.fill(xs, ys, alpha=0.25)
        ax.plot(xs, ys, linewidth=1.0, label=polygon.name)
    if points:
        ax.scatter([float(p[first]) for p in points], [float(p[second]) for p in points], s=2, color="black")
    ax.set_xlabel(f"y{first + 1}")
    ax.set_ylabel(f"y{second + 1}")
    ax.set_aspect("equal", adjustable="datalim")
    if any(not p.empty for p in polygons):
        ax.legend(loc="best", fontsize="small")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    log.debug(f"Plotted {len(polygons)} polygon(s) to {path}")
    return path

