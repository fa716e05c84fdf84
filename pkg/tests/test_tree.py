import numpy as np
import pytest

from spherelayout.errors import CycleError, InvalidTree, NonPositiveExplicitWeight, RegionTooSmall
from spherelayout.geometry import SphericalPolygon, point_in_polygon, polygon_area, unit
from spherelayout.lloyd import LloydConfig
from spherelayout.tree import (
    _scale_cap,
    TreeLayoutConfig,
    TreeNode,
    layout_tree,
    layout_violations,
    restricted_placement,
    subtree_weights,
    validate_tree,
)

from .trees import fanout_tree

SQUARE = unit([[1, 1, 2], [-1, 1, 2], [-1, -1, 2], [1, -1, 2]])
OCTANT = np.eye(3)


def test_subtree_weights_count_leaves():
    tree = fanout_tree([2, 3])
    w = subtree_weights(tree)
    assert w["r"] == 6 and w["r.a0"] == 3 and w["r.a1.b2"] == 1


def test_explicit_weight_overrides_count():
    tree = TreeNode("r", children=[TreeNode("x", explicit_weight=2.5), TreeNode("y")])
    assert subtree_weights(tree) == {"r": 2.0, "x": 2.5, "y": 1.0}
    tree.children[1].explicit_weight = 0.0
    with pytest.raises(NonPositiveExplicitWeight):
        subtree_weights(tree)


def test_malformed_trees_are_rejected():
    a = TreeNode("a")
    with pytest.raises(InvalidTree):
        validate_tree(TreeNode("r", children=[a, a]))
    with pytest.raises(InvalidTree):
        validate_tree(TreeNode("r", children=[TreeNode("x"), TreeNode("x")]))
    loop = TreeNode("r")
    loop.children.append(TreeNode("c", children=[loop]))
    with pytest.raises(CycleError):
        validate_tree(loop)
    with pytest.raises(InvalidTree):
        layout_tree(TreeNode("alone"))


def test_single_child_takes_region_centroid():
    out = restricted_placement(SQUARE, [1.0])
    assert np.allclose(out[0], [0, 0, 1])


@pytest.mark.parametrize("weights", [[1, 1], [1, 3], [1, 1, 1], [3, 2, 1]])
def test_axis_split_is_proportional(weights):
    out = restricted_placement(SQUARE, weights, return_cells=True)
    area = polygon_area(SQUARE)
    shares = np.array([c.area for c in out.cells]) / area
    assert np.allclose(shares, np.array(weights) / sum(weights), atol=1e-9)
    for p, c in zip(out.positions, out.cells):
        assert point_in_polygon(c, p)


def test_axis_split_of_near_hemisphere_triangle():
    # a whole-sphere cell of four; the pole of its longest edge lies inside it
    tri = np.array([
        [0.936562341604793, -0.04175588084819811, 0.34800492338807254],
        [0.03792920387997983, -0.44216125097648207, -0.8961332510447],
        [-0.43100458527678626, 0.8818096555149116, -0.19143348429953022],
    ])
    out = restricted_placement(tri, [1, 2], return_cells=True)
    assert out.error < 1e-9
    assert sum(c.area for c in out.cells) == pytest.approx(polygon_area(tri), abs=1e-10)


def test_symmetric_region_gives_symmetric_cells():
    out = restricted_placement(SQUARE, [1, 1, 1, 1], config=LloydConfig(epsilon=1e-8), return_cells=True)
    areas = np.array([c.area for c in out.cells])
    assert np.ptp(areas) < 1e-6
    # generators sit at equal distance from the square's center
    assert np.ptp(out.positions @ [0, 0, 1]) < 1e-6


def test_lloyd_cells_partition_region():
    w = [1, 2, 3, 4, 5, 6]
    out = restricted_placement(OCTANT, w, return_cells=True)
    areas = np.array([c.area for c in out.cells])
    assert areas.sum() == pytest.approx(np.pi / 2, abs=1e-8)
    assert out.error <= 5e-4
    assert np.max(np.abs(areas / areas.sum() - np.array(w) / 21)) <= 5e-4
    for p, c in zip(out.positions, out.cells):
        assert point_in_polygon(SphericalPolygon(OCTANT), p)
        assert point_in_polygon(c, p)


def test_restricted_placement_input_errors():
    with pytest.raises(RegionTooSmall):
        restricted_placement(OCTANT[:2], [1, 1])
    with pytest.raises(ValueError):
        restricted_placement(OCTANT, [])
    with pytest.raises(ValueError):
        restricted_placement(OCTANT, [1, -1])
    dart = unit([[1, 0, 1], [0, 1, 1], [0.1, 0.1, 1], [0, -1, 1]])
    with pytest.raises(ValueError):
        restricted_placement(dart, [1, 1])


@pytest.mark.parametrize("algorithm", ["wscvt", "trisphere"])
def test_fixture_layout_contract(algorithm):
    tree = fanout_tree([5, 3, 2])
    layout = layout_tree(tree, algorithm)
    assert layout_violations(layout) == []
    assert layout.radii == [0.0, 1.0, 2.0, 3.0]
    assert len(layout.nodes) == 1 + 5 + 15 + 30
    assert list(layout.nodes) == [n.id for n in tree.walk()]
    for node in layout.nodes.values():
        assert np.linalg.norm(node.position) == pytest.approx(layout.radii[node.level], abs=1e-12)


def test_layout_is_deterministic():
    tree = fanout_tree([5, 3, 2])
    a = layout_tree(tree).positions()
    b = layout_tree(fanout_tree([5, 3, 2])).positions()
    assert np.array_equal(a, b)


def test_radius_scale():
    layout = layout_tree(fanout_tree([4, 2]), config=TreeLayoutConfig(radius_scale=2.5))
    assert layout.radii == [0.0, 2.5, 5.0]
    assert layout_violations(layout) == []


@pytest.mark.parametrize("fanout", [1, 2, 3])
def test_small_root_fanout_uses_lunes(fanout):
    layout = layout_tree(fanout_tree([fanout, 4]))
    assert layout_violations(layout) == []
    if fanout > 1:
        areas = [n.region.area for n in layout.level_of(1)]
        assert sum(areas) == pytest.approx(4 * np.pi, abs=fanout * 4e-3)


def test_uneven_root_group_still_partitions():
    # few, unequal cells at the top level
    tree = TreeNode("r", children=[
        TreeNode("a", children=[TreeNode("a0"), TreeNode("a1")]),
        TreeNode("b"), TreeNode("c"), TreeNode("d"),
    ])
    layout = layout_tree(tree)
    assert layout_violations(layout) == []
    areas = np.array([n.region.area for n in layout.level_of(1)])
    assert areas.sum() == pytest.approx(4 * np.pi, rel=1e-9)
    assert np.max(np.abs(areas / areas.sum() - np.array([2, 1, 1, 1]) / 5)) <= 5e-4


def test_dominant_child_is_capped_below_a_hemisphere():
    tree = TreeNode("r", children=[TreeNode("big", explicit_weight=10.0)] + [TreeNode(f"s{i}") for i in range(4)])
    layout = layout_tree(tree)
    assert layout_violations(layout) == []
    assert layout["big"].region.area < 2 * np.pi
    assert layout.group_errors["r"] > 5e-4


def test_trisphere_children_use_parent_faces():
    layout = layout_tree(fanout_tree([20, 4]), "trisphere")
    assert layout_violations(layout) == []
    for node in layout.level_of(2):
        parent = layout[node.parent]
        assert point_in_polygon(parent.region, node.direction)


def test_layout_rejects_unknown_algorithm():
    with pytest.raises(ValueError):
        layout_tree(fanout_tree([4]), "random")


def test_layout_respects_lloyd_seed():
    tree = fanout_tree([6, 4])
    a = layout_tree(tree, config=TreeLayoutConfig(lloyd=LloydConfig(seed=0))).positions()
    b = layout_tree(tree, config=TreeLayoutConfig(lloyd=LloydConfig(seed=1))).positions()
    assert not np.allclose(a, b)


def test_scale_cap_keeps_each_site_in_its_own_cell(rng):
    pos = unit(rng.normal(size=(12, 3)) * [1, 1, 0.1] + [0, 0, 1])
    work = _scale_cap(rng.uniform(0, 5, 12), pos)
    s = 1.0 + 0.5 * work
    # site i stays in its cell iff s_j p_j . p_i <= s_i for every j
    assert np.all(s[None, :] * (pos @ pos.T) <= s[:, None] + 1e-12)


def test_thin_region_with_dominant_child():
    sliver = unit([[1, 0.02, 1], [-1, 0.02, 1], [-1, -0.02, 1], [1, -0.02, 1]])
    out = restricted_placement(sliver, [20, 1, 1, 1, 1, 1, 1], return_cells=True)
    assert out.error <= LloydConfig().epsilon
    for p, c in zip(out.positions, out.cells):
        assert point_in_polygon(c, p)
