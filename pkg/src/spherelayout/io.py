"""Reading trees, writing layouts and meshes, and the comparison report."""

from __future__ import annotations

import json
import os
import warnings
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .errors import CycleError, InvalidTree, IoError, NotConverged, ParseError, SphereLayoutError
from .geometry import FULL_SPHERE, SphericalPolygon, spherical_excess
from .lloyd import LloydConfig, run_wscvt
from .tree import Layout, TreeNode, validate_tree
from .trisphere import IcoSphere, waste_stats
from .voronoi import Tessellation

KNOWN_FIELDS = {"id", "label", "weight", "children"}


class IngestWarning(UserWarning):
    """Input was accepted but something in it was ignored or skipped."""


# ---------------------------------------------------------------- trees


def tree_from_dict(doc, where="$") -> TreeNode:
    """Build a :class:`TreeNode` from parsed JSON.

    Missing ids become the node's path of child indices (``"n0.2.1"``).
    Unknown keys are ignored with an :class:`IngestWarning`.
    """
    root = _node_from_dict(doc, where, "n0")
    try:
        validate_tree(root)
    except InvalidTree as exc:
        raise ParseError(str(exc)) from exc
    return root


def _node_from_dict(doc, where, auto_id):
    if not isinstance(doc, dict):
        raise ParseError(f"{where}: expected an object, got {type(doc).__name__}")
    extra = sorted(set(doc) - KNOWN_FIELDS)
    if extra:
        warnings.warn(f"{where}: ignoring unknown fields {extra}", IngestWarning, stacklevel=3)
    node_id = doc.get("id", auto_id)
    if not isinstance(node_id, str):
        raise ParseError(f"{where}.id: expected a string")
    label = doc.get("label", node_id)
    if not isinstance(label, str):
        raise ParseError(f"{where}.label: expected a string")
    weight = doc.get("weight")
    if weight is not None:
        if isinstance(weight, bool) or not isinstance(weight, (int, float)) or not weight > 0:
            raise ParseError(f"{where}.weight: expected a positive number, got {weight!r}")
        weight = float(weight)
    children = doc.get("children", [])
    if not isinstance(children, list):
        raise ParseError(f"{where}.children: expected an array")
    kids = [
        _node_from_dict(c, f"{where}.children[{i}]", f"{auto_id}.{i}")
        for i, c in enumerate(children)
    ]
    return TreeNode(node_id, label, weight, kids)


def read_tree_json(path) -> TreeNode:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return tree_from_dict(doc)


def tree_from_directory(path, max_depth: Optional[int] = None) -> TreeNode:
    """Directory hierarchy as a tree: directories are internal nodes,
    files (and empty directories) are leaves.

    Children are sorted by name.  Ids are paths relative to ``path``
    (``"."`` for the root).  Directories deeper than ``max_depth`` are
    cut to leaves.  Symlinks that lead back into an ancestor are skipped
    with an :class:`IngestWarning`.
    """
    root = Path(path)
    if not root.is_dir():
        raise IoError(f"{path} is not a directory")
    return _dir_node(root, ".", root.name or str(root), (os.path.realpath(root),), 0, max_depth)


def _dir_node(path, rel, label, ancestors, depth, max_depth):
    node = TreeNode(rel, label)
    if max_depth is not None and depth >= max_depth:
        return node
    try:
        entries = sorted(os.scandir(path), key=lambda e: e.name)
    except OSError as exc:
        raise IoError(f"cannot list {path}: {exc}") from exc
    for e in entries:
        child_rel = e.name if rel == "." else f"{rel}/{e.name}"
        try:
            is_dir = e.is_dir(follow_symlinks=True)
        except OSError:
            is_dir = False
        if not is_dir:
            if e.is_symlink() and not os.path.exists(e.path):
                warnings.warn(f"skipping dangling symlink {e.path}", IngestWarning, stacklevel=2)
                continue
            node.children.append(TreeNode(child_rel, e.name))
            continue
        real = os.path.realpath(e.path)
        if real in ancestors:
            warnings.warn(
                f"skipping {e.path}: {CycleError.__name__}, link back to {real}",
                IngestWarning,
                stacklevel=2,
            )
            continue
        node.children.append(_dir_node(e.path, child_rel, e.name, ancestors + (real,), depth + 1, max_depth))
    return node


def ingest_tree(source, max_depth: Optional[int] = None) -> TreeNode:
    """Tree from a JSON document or from a directory walk."""
    p = Path(source)
    if not p.exists():
        raise IoError(f"{source} does not exist")
    if p.is_dir():
        return tree_from_directory(p, max_depth)
    return read_tree_json(p)


def tree_to_dict(tree: TreeNode):
    out = {"id": tree.id, "label": tree.label}
    if tree.explicit_weight is not None:
        out["weight"] = tree.explicit_weight
    out["children"] = [tree_to_dict(c) for c in tree.children]
    return out


# ---------------------------------------------------------------- layouts


def _floats(a):
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def _finite_or_none(x):
    return float(x) if x is not None and np.isfinite(x) else None


def layout_header(layout: Layout):
    cfg = layout.config.lloyd
    report = layout.report
    level1 = layout.level_of(1)
    if layout.algorithm == "trisphere":
        waste = float(layout.waste.waste_percent) if layout.waste is not None else None
    else:
        areas = [n.region.area if n.region is not None else FULL_SPHERE for n in level1]
        # cells tile the sphere, so the unused share is only the numerical residual
        waste = abs(sum(areas) / FULL_SPHERE - 1.0) * 100.0
    return {
        "algorithm": layout.algorithm,
        "seed": cfg.seed,
        "epsilon": cfg.epsilon,
        "delta": cfg.delta,
        "error_mode": cfg.error_mode,
        "max_iterations": cfg.max_iterations,
        "radius_scale": layout.config.radius_scale,
        "iterations": report.iterations if report is not None else 0,
        "final_error": _finite_or_none(report.final_error) if report is not None else None,
        "waste_percent": waste,
    }


def layout_to_dict(layout: Layout, labels=None):
    nodes = []
    for n in layout.nodes.values():
        entry = {
            "id": n.id,
            "level": n.level,
            "parent": n.parent,
            "position": _floats(n.position),
            "radius": float(n.radius),
            "region": None if n.region is None else [_floats(v) for v in n.region.vertices],
        }
        if labels is not None:
            entry["label"] = labels.get(n.id, "")
        nodes.append(entry)
    return {"header": layout_header(layout), "radii": [float(r) for r in layout.radii], "nodes": nodes}


def dumps_layout(layout: Layout, labels=None) -> str:
    """Layout as JSON text.

    Floats are written with Python's shortest round-trip representation,
    so reading them back gives the identical doubles.
    """
    return json.dumps(layout_to_dict(layout, labels), indent=1, allow_nan=False) + "\n"


def write_layout(layout: Layout, path, labels=None):
    _write_text(path, dumps_layout(layout, labels))


def read_layout(path):
    """Parse a layout document; positions and regions come back as arrays."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    for n in doc.get("nodes", []):
        n["position"] = np.array(n["position"], dtype=float)
        if n["region"] is not None:
            n["region"] = np.array(n["region"], dtype=float)
    return doc


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------- meshes

MESH_FORMATS = ("cell-mesh", "wireframe")


def _mesh_parts(obj):
    """Shared vertex array and a list of ``(name, polygon index list)``."""
    if isinstance(obj, IcoSphere):
        return obj.vertices, [("icosphere", [list(map(int, f)) for f in obj.faces])], True
    if isinstance(obj, Tessellation):
        cells = [("cell_%d" % i, [list(map(int, c))]) for i, c in enumerate(obj.cells)]
        return obj.vertices, cells, False
    if isinstance(obj, (list, tuple)) and all(isinstance(p, SphericalPolygon) for p in obj):
        verts, parts, base = [], [], 0
        for i, p in enumerate(obj):
            verts.extend(p.vertices)
            parts.append(("cell_%d" % i, [list(range(base, base + len(p)))]))
            base += len(p)
        return np.array(verts).reshape(-1, 3), parts, False
    raise TypeError(f"cannot export {type(obj).__name__} as a mesh")


def mesh_text(obj, fmt="cell-mesh") -> str:
    """Wavefront OBJ text for a tessellation, icosphere or polygon list.

    ``cell-mesh`` emits one object per cell, fan-triangulated from the
    cell's first vertex (an icosphere is a single object of its faces).
    ``wireframe`` emits each cell boundary, or each icosphere edge, as an
    ``l`` polyline.  Counts go in a header comment.
    """
    if fmt not in MESH_FORMATS:
        raise ValueError(f"format must be one of {MESH_FORMATS}")
    verts, parts, is_ico = _mesh_parts(obj)
    body = []
    n_faces = n_lines = 0
    if fmt == "cell-mesh":
        for name, polys in parts:
            body.append(f"o {name}")
            for poly in polys:
                for k in range(1, len(poly) - 1):
                    body.append(f"f {poly[0] + 1} {poly[k] + 1} {poly[k + 1] + 1}")
                    n_faces += 1
    elif is_ico:
        edges = sorted({tuple(sorted((f[k], f[(k + 1) % 3]))) for f in parts[0][1] for k in range(3)})
        body.append("o icosphere")
        for i, j in edges:
            body.append(f"l {i + 1} {j + 1}")
        n_lines = len(edges)
    else:
        for name, polys in parts:
            body.append(f"o {name}")
            for poly in polys:
                body.append("l " + " ".join(str(i + 1) for i in poly + poly[:1]))
                n_lines += 1
    head = [
        "# spherelayout mesh",
        f"# format {fmt}",
        f"# vertices {len(verts)}",
        f"# faces {n_faces}",
        f"# lines {n_lines}",
    ]
    vlines = ["v %r %r %r" % tuple(float(x) for x in v) for v in verts]
    return "\n".join(head + vlines + body) + "\n"


def export_mesh(obj, path, fmt="cell-mesh"):
    _write_text(path, mesh_text(obj, fmt))


def read_obj(path):
    """Minimal OBJ reader: ``(vertices, faces, lines, objects)``.

    ``faces`` are 0-based index tuples, ``objects`` maps object name to
    the indices of its faces.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    verts, faces, lines, objects = [], [], [], {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                faces.append(tuple(int(x.split("/")[0]) - 1 for x in parts[1:]))
                if current is not None:
                    objects[current].append(len(faces) - 1)
            elif parts[0] == "l":
                lines.append(tuple(int(x) - 1 for x in parts[1:]))
            elif parts[0] == "o":
                current = " ".join(parts[1:])
                objects.setdefault(current, [])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from exc
    return np.array(verts, dtype=float).reshape(-1, 3), faces, lines, objects


def obj_sphere_area(path) -> float:
    """Total spherical area of an OBJ's triangles, vertices taken as unit vectors."""
    verts, faces, _, _ = read_obj(path)
    tris = np.array([f for f in faces if len(f) == 3], dtype=int).reshape(-1, 3)
    v = verts / np.linalg.norm(verts, axis=1, keepdims=True)
    return float(np.sum(spherical_excess(v[tris[:, 0]], v[tris[:, 1]], v[tris[:, 2]])))


# ---------------------------------------------------------------- report

REPORT_COLUMNS = ("n", "trisphere_faces", "trisphere_waste", "wscvt_waste", "wscvt_error", "iterations")


def comparison_rows(node_counts: Sequence[int], run_wscvt_rows=True, config: Optional[LloydConfig] = None):
    """One dict per node count with the TriSphere and WSCVT figures.

    ``trisphere_waste`` is an exact :class:`Fraction` (percent).  A WSCVT
    tessellation covers the whole sphere, so its waste is zero; the row
    keeps the measured ``|sum(a_i) - 1|`` as ``partition_residual``.  A
    failing WSCVT run marks the row ``failed`` and the others still run.
    """
    config = config or LloydConfig()
    rows = []
    for n in node_counts:
        n = int(n)
        if n < 4:
            raise ValueError(f"node counts must be at least 4, got {n}")
        stats = waste_stats(n)
        row = {
            "n": n,
            "trisphere_faces": stats.faces,
            "trisphere_waste": stats.waste_percent,
            "wscvt_waste": None,
            "partition_residual": None,
            "wscvt_error": None,
            "iterations": None,
            "failed": None,
        }
        if run_wscvt_rows:
            try:
                _, tess, report = run_wscvt(np.ones(n), config)
                residual = abs(float(np.sum(tess.area_fractions())) - 1.0)
                row.update(
                    wscvt_waste=Fraction(0),
                    partition_residual=residual,
                    wscvt_error=report.final_error,
                    iterations=report.iterations,
                )
            except (SphereLayoutError, ValueError) as exc:
                row["failed"] = f"{type(exc).__name__}: {exc}"
                if isinstance(exc, NotConverged) and exc.report is not None:
                    row["wscvt_error"] = exc.report.final_error
                    row["iterations"] = exc.report.iterations
        rows.append(row)
    return rows


def _pct(x):
    return f"{float(x):.2f}%"


def format_comparison(rows) -> str:
    table = [list(REPORT_COLUMNS)]
    for r in rows:
        if r["failed"]:
            wscvt = "FAILED"
        elif r["wscvt_waste"] is None:
            wscvt = "-"
        else:
            wscvt = f"{_pct(r['wscvt_waste'])} (residual {r['partition_residual']:.1e})"
        err = "-" if r["wscvt_error"] is None else f"{r['wscvt_error']:.2e}"
        its = "-" if r["iterations"] is None else str(r["iterations"])
        table.append([str(r["n"]), str(r["trisphere_faces"]), _pct(r["trisphere_waste"]), wscvt, err, its])
    widths = [max(len(row[k]) for row in table) for k in range(len(REPORT_COLUMNS))]
    out = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in table]
    notes = [f"# n={r['n']}: {r['failed']}" for r in rows if r["failed"]]
    return "\n".join(out + notes) + "\n"


def report_comparison(node_counts: Sequence[int], run_wscvt_rows=True, config: Optional[LloydConfig] = None) -> str:
    """Text table comparing TriSphere waste with WSCVT for each node count."""
    return format_comparison(comparison_rows(node_counts, run_wscvt_rows, config))
