import math

import numpy as np
import pytest

from pinchlab.distance import (
    MeshBVH,
    brute_force_distances,
    closest_point_on_triangles,
    fibonacci_sphere,
    point_triangle_distances,
)


def grid_distance_oracle(tri, q, n=160):
    """Min distance to a dense barycentric sample of the triangle."""
    u = np.linspace(0.0, 1.0, n)
    uu, vv = np.meshgrid(u, u)
    keep = uu + vv <= 1.0
    uu, vv = uu[keep], vv[keep]
    pts = (
        np.outer(1 - uu - vv, tri[0])
        + np.outer(uu, tri[1])
        + np.outer(vv, tri[2])
    )
    return np.linalg.norm(pts - q, axis=1).min()


def test_point_triangle_against_grid_oracle():
    gen = np.random.default_rng(2)
    for _ in range(200):
        tri = gen.standard_normal((1, 3, 3))
        q = 2.0 * gen.standard_normal(3)
        exact = point_triangle_distances(tri, q)[0]
        approx = grid_distance_oracle(tri[0], q)
        edge = max(np.linalg.norm(tri[0, i] - tri[0, j]) for i in range(3) for j in range(i))
        # The grid point cloud is within edge/n of any triangle point.
        assert exact <= approx + 1e-12
        assert approx - exact <= edge / 100.0


def test_closest_point_lies_in_triangle():
    gen = np.random.default_rng(4)
    tri = gen.standard_normal((50, 3, 3))
    q = gen.standard_normal(3)
    cp = closest_point_on_triangles(tri, q)
    # Closest points must satisfy the barycentric containment up to round-off.
    for t, p in zip(tri, cp):
        a, b, c = t
        m = np.column_stack([b - a, c - a])
        uv, *_ = np.linalg.lstsq(m, p - a, rcond=None)
        assert uv[0] >= -1e-9 and uv[1] >= -1e-9 and uv.sum() <= 1 + 1e-9


def test_bvh_matches_bruteforce(sphere3):
    gen = np.random.default_rng(6)
    pts = 1.5 * gen.standard_normal((200, 3))
    bvh = MeshBVH(sphere3)
    fast = bvh.distances(pts)
    slow = brute_force_distances(sphere3, pts)
    assert np.allclose(fast, slow, rtol=0, atol=1e-12)


def test_bvh_interior_and_surface_points(sphere3):
    bvh = MeshBVH(sphere3)
    assert bvh.distance(np.zeros(3)) == pytest.approx(1.0, rel=5e-3)
    v = sphere3.positions[17]
    assert bvh.distance(v) <= 1e-12


def test_fibonacci_sphere_radius_and_coverage():
    n = 500
    r = 2.5
    center = np.array([1.0, -2.0, 0.5])
    pts = fibonacci_sphere(n, radius=r, center=center)
    assert pts.shape == (n, 3)
    assert np.allclose(np.linalg.norm(pts - center, axis=1), r, atol=1e-12)
    # crude coverage: every random direction has a sample within the lattice gap
    gen = np.random.default_rng(8)
    dirs = gen.standard_normal((100, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    probes = center + r * dirs
    dmin = np.linalg.norm(pts[None, :, :] - probes[:, None, :], axis=2).min(axis=1)
    assert dmin.max() <= 2.0 * r * math.sqrt(4 * math.pi / n)


def test_fibonacci_sphere_rejects_empty():
    with pytest.raises(ValueError):
        fibonacci_sphere(0)
