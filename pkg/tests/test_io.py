import json
import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from spherelayout.cli import main
from spherelayout.errors import IoError, ParseError
from spherelayout.io import (
    IngestWarning,
    comparison_rows,
    dumps_layout,
    export_mesh,
    format_comparison,
    ingest_tree,
    mesh_text,
    obj_sphere_area,
    read_layout,
    read_obj,
    read_tree_json,
    tree_from_dict,
    tree_from_directory,
    tree_to_dict,
    write_layout,
)
from spherelayout.lloyd import run_wscvt
from spherelayout.tree import layout_tree
from spherelayout.trisphere import build_icosphere

from .trees import fanout_tree

DOC = {
    "label": "root",
    "children": [
        {"label": "a", "children": [{"label": "x"}, {"label": "y", "weight": 2}]},
        {"id": "b"},
        {"label": "c"},
        {"label": "d"},
    ],
}


def test_tree_from_dict_ids_and_weights():
    tree = tree_from_dict(DOC)
    ids = [n.id for n in tree.walk()]
    assert ids == ["n0", "n0.0", "n0.0.0", "n0.0.1", "b", "n0.2", "n0.3"]
    assert tree.children[0].children[1].explicit_weight == 2.0
    assert tree.children[1].label == "b"


def test_tree_dict_roundtrip():
    tree = tree_from_dict(DOC)
    again = tree_from_dict(tree_to_dict(tree))
    assert tree_to_dict(again) == tree_to_dict(tree)


def test_unknown_fields_warn():
    with pytest.warns(IngestWarning, match="colour"):
        tree_from_dict({"children": [{"colour": "red"}]})


@pytest.mark.parametrize(
    "doc, where",
    [
        ({"children": [{}, {"weight": -1}]}, "$.children[1].weight"),
        ({"children": {}}, "$.children"),
        ({"id": 3}, "$.id"),
        ([], "$"),
    ],
)
def test_parse_errors_carry_paths(doc, where):
    with pytest.raises(ParseError, match=__import__("re").escape(where)):
        tree_from_dict(doc)


def test_duplicate_ids_are_parse_errors():
    with pytest.raises(ParseError):
        tree_from_dict({"id": "r", "children": [{"id": "x"}, {"id": "x"}]})


def test_bad_json_reports_line(tmp_path):
    p = tmp_path / "t.json"
    p.write_text('{"children": [\n  {"label": "a"},\n]}')
    with pytest.raises(ParseError, match=r"t.json:3:1"):
        read_tree_json(p)
    with pytest.raises(IoError):
        read_tree_json(tmp_path / "missing.json")


def _make_dirs(root):
    (root / "src" / "pkg").mkdir(parents=True)
    (root / "docs").mkdir()
    for rel in ["README", "src/pkg/a.py", "src/pkg/b.py", "src/setup.py", "docs/index.md"]:
        (root / rel).write_text("x")
    (root / "empty").mkdir()


def test_directory_tree_matches_walk(tmp_path):
    _make_dirs(tmp_path)
    tree = tree_from_directory(tmp_path)
    # oracle: os.walk counts every file and empty directory once
    leaves = 0
    for dirpath, dirs, files in os.walk(tmp_path):
        leaves += len(files) + (0 if dirs or files else 1)
    n_leaves = sum(1 for n in tree.walk() if n.is_leaf)
    assert n_leaves == leaves == 6
    assert [c.id for c in tree.children] == ["README", "docs", "empty", "src"]
    assert tree.children[3].children[0].id == "src/pkg"


def test_directory_depth_cap_and_symlink_loop(tmp_path):
    _make_dirs(tmp_path)
    os.symlink(tmp_path, tmp_path / "src" / "loop")
    with pytest.warns(IngestWarning, match="link back"):
        tree = tree_from_directory(tmp_path)
    assert "src/loop" not in {n.id for n in tree.walk()}
    shallow = tree_from_directory(tmp_path, max_depth=1)
    assert shallow.height() == 1
    assert ingest_tree(tmp_path, 1).height() == 1


def test_layout_document_roundtrip(tmp_path):
    layout = layout_tree(fanout_tree([4, 2]))
    path = tmp_path / "layout.json"
    write_layout(layout, path)
    doc = read_layout(path)
    assert doc["radii"] == [0.0, 1.0, 2.0]
    assert doc["header"]["algorithm"] == "wscvt"
    assert doc["header"]["waste_percent"] < 1e-9
    for entry in doc["nodes"]:
        node = layout[entry["id"]]
        assert np.array_equal(entry["position"], node.position)
        if node.region is not None:
            assert np.array_equal(entry["region"], node.region.vertices)


def test_trisphere_header_waste():
    doc = json.loads(dumps_layout(layout_tree(fanout_tree([50]), "trisphere")))
    assert doc["header"]["waste_percent"] == 37.5


def test_obj_export_covers_sphere(tmp_path):
    _, tess, _ = run_wscvt(np.ones(30))
    path = tmp_path / "cells.obj"
    export_mesh(tess, path)
    verts, faces, lines, objects = read_obj(path)
    assert len(objects) == 30
    assert obj_sphere_area(path) == pytest.approx(4 * np.pi, abs=1e-5)


def test_icosphere_obj_counts(tmp_path):
    sphere = build_icosphere(2)
    text = mesh_text(sphere)
    assert "# faces 320" in text and "# vertices 162" in text
    wire = mesh_text(sphere, "wireframe")
    assert "# lines 480" in wire
    path = tmp_path / "ico.obj"
    export_mesh(sphere, path)
    assert obj_sphere_area(path) == pytest.approx(4 * np.pi, abs=1e-12)
    with pytest.raises(ValueError):
        mesh_text(sphere, "stl")


def test_comparison_rows_are_exact():
    rows = comparison_rows([20, 50, 1000, 1500], run_wscvt_rows=False)
    assert [r["trisphere_waste"] for r in rows] == [
        Fraction(0), Fraction(75, 2), Fraction(175, 8), Fraction(4525, 64)
    ]
    text = format_comparison(rows)
    for s in ("0.00%", "37.50%", "21.88%", "70.70%"):
        assert s in text


def test_cli_report(capsys):
    assert main(["report", "--counts", "20,50", "--skip-wscvt"]) == 0
    out = capsys.readouterr().out
    assert "37.50%" in out and "trisphere_waste" in out


def test_cli_mesh_and_errors(tmp_path, capsys):
    out = tmp_path / "ico.obj"
    assert main(["mesh", "--icosphere", "1", "--format", "wireframe", "--out", str(out)]) == 0
    assert "# lines 120" in out.read_text()
    assert main(["layout", "--input", str(tmp_path / "nope.json")]) == 1
    assert "IoError" in capsys.readouterr().err
    assert main(["mesh", "--icosphere", "9"]) == 1


def test_cli_layout_is_deterministic(tmp_path):
    src = tmp_path / "tree.json"
    src.write_text(json.dumps(DOC))
    outs = []
    for k in range(2):
        out = tmp_path / f"out{k}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "spherelayout", "layout", "--input", str(src), "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    doc = json.loads(outs[0])
    assert [n["label"] for n in doc["nodes"]][:2] == ["root", "a"]
