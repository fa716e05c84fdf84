import numpy as np
import pytest

from spherelayout.errors import FlipWouldInvert, UnknownEdge
from spherelayout.geometry import orientation, unit, weighted_circumcenter, weighted_circumcenters, weighted_distance
from spherelayout.hull import convex_hull
from spherelayout.lloyd import initial_distribution
from spherelayout.voronoi import (
    build_scaled_tessellation,
    build_wsvt,
    detect_wrong_edges,
    flip_edge,
    swap_wrong_edges,
)

from .oracles import planar_circumcenter, power_owner, uniform_sphere


def test_equal_weight_circumcenter_is_classical(rng):
    for a, b, c in uniform_sphere(rng, 60).reshape(20, 3, 3):
        x = planar_circumcenter(a, b, c)
        assert np.allclose(weighted_circumcenter(a, b, c), x / np.linalg.norm(x), atol=1e-10)


def test_weighted_circumcenter_balances_power(rng):
    a, b, c = uniform_sphere(rng, 3)
    w = [0.3, 0.1, 0.2]
    x, bad = weighted_circumcenters(a, b, c, *w, planar=True)
    assert not bad
    # the in-plane point balances the three power distances exactly
    d = [weighted_distance(p, wi, x) for p, wi in zip((a, b, c), w)]
    assert np.ptp(d) < 1e-12
    assert np.dot(np.cross(b - a, c - a), x - a) == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(weighted_circumcenter(a, b, c, *w), x / np.linalg.norm(x))


def test_equal_weight_cells_partition_sphere():
    pts = initial_distribution(40, 3)
    tess = build_wsvt(pts, np.ones(40))
    assert not tess.overlap
    assert tess.areas().sum() == pytest.approx(4 * np.pi, rel=1e-12)
    assert np.all(tess.areas() > 0)
    assert detect_wrong_edges(tess.mesh, np.ones(40)).wrong_edges == []


def test_equal_weight_membership_matches_nearest_site(rng):
    pts = initial_distribution(20, 1)
    tess = build_wsvt(pts, np.zeros(20))
    x = uniform_sphere(rng, 20000)
    assert np.mean(tess.locate(x) == power_owner(pts, np.zeros(20), x)) > 0.9999


def test_additive_shift_is_invisible():
    pts = initial_distribution(30, 4)
    w = np.linspace(0.0, 0.05, 30)
    a = build_wsvt(pts, w)
    b = build_wsvt(pts, w + 7.5)
    assert np.allclose(a.vertices, b.vertices, atol=1e-9)


def test_cells_are_counter_clockwise_fans():
    pts = initial_distribution(25, 5)
    tess = build_wsvt(pts, np.zeros(25))
    for i in range(25):
        v = tess.cell(i).vertices
        assert np.all(orientation(v, np.roll(v, -1, 0), pts[i]) > 0)


def test_big_weight_produces_wrong_edges():
    pts = initial_distribution(10, 0)
    w = np.ones(10)
    w[0] = 100.0
    assert detect_wrong_edges(convex_hull(pts), w).wrong_edges


def test_swap_never_increases_wrong_edges():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        pts = initial_distribution(12, seed)
        w = rng.uniform(0.0, 1.5, 12)
        mesh = convex_hull(pts)
        before = len(detect_wrong_edges(mesh, w).wrong_edges)
        out, report = swap_wrong_edges(mesh, w)
        assert report.residual_wrong <= before
        assert report.residual_wrong == len(detect_wrong_edges(out, w).wrong_edges)
        assert out.euler_ok()


def test_flip_edge_roundtrip():
    mesh = convex_hull(initial_distribution(12, 2))
    edge = sorted(mesh.edges)[0]
    flipped = flip_edge(mesh, edge)
    assert edge not in flipped.edges and flipped.euler_ok()
    new = sorted(set(flipped.edges) - set(mesh.edges))
    assert len(new) == 1
    assert flip_edge(flipped, new[0]).face_set() == mesh.face_set()


def test_flip_unknown_edge():
    mesh = convex_hull(initial_distribution(8, 2))
    missing = next((i, j) for i in range(8) for j in range(i + 1, 8) if (i, j) not in mesh.edges)
    with pytest.raises(UnknownEdge):
        flip_edge(mesh, missing)


def test_flip_on_tetrahedron_is_refused():
    pts = unit([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]])
    mesh = convex_hull(pts)
    with pytest.raises(FlipWouldInvert):
        flip_edge(mesh, (0, 1))


def test_scaled_tessellation_matches_scaled_owner(rng):
    pts = initial_distribution(15, 6)
    w = rng.uniform(0.0, 1.0, 15)
    tess = build_scaled_tessellation(pts, w)
    assert tess.areas().sum() == pytest.approx(4 * np.pi, rel=1e-10)
    x = uniform_sphere(rng, 20000)
    owner = np.argmax(x @ ((1 + 0.5 * w)[:, None] * pts).T, axis=1)
    assert np.mean(tess.locate(x) == owner) > 0.9999
