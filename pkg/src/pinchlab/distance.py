"""Point-to-surface distance queries.

Exact point-to-triangle distances (Ericson's region classification,
vectorized over triangles) accelerated by a small axis-aligned BVH, plus
the Fibonacci lattice used to sample comparison spheres.
"""

from __future__ import annotations

import heapq
import math

import numpy as np

from .mesh import TriMesh


def closest_point_on_triangles(tri: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Closest points to ``q`` on each triangle of ``tri`` (T, 3, 3)."""
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    ab = b - a
    ac = c - a
    ap = q - a

    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = q - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = q - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)

    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4
    denom_vw = va + vb + vc
    with np.errstate(divide="ignore", invalid="ignore"):
        v_ab = np.where(d1 - d3 != 0.0, d1 / (d1 - d3), 0.0)
        w_ac = np.where(d2 - d6 != 0.0, d2 / (d2 - d6), 0.0)
        w_bc = np.where((d4 - d3) + (d5 - d6) != 0.0,
                        (d4 - d3) / ((d4 - d3) + (d5 - d6)), 0.0)
        v_in = np.where(denom_vw != 0.0, vb / denom_vw, 0.0)
        w_in = np.where(denom_vw != 0.0, vc / denom_vw, 0.0)

    out = a + v_in[:, None] * ab + w_in[:, None] * ac  # interior fallback
    region_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    out = np.where(region_bc[:, None], b + w_bc[:, None] * (c - b), out)
    region_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    out = np.where(region_ac[:, None], a + w_ac[:, None] * ac, out)
    region_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    out = np.where(region_ab[:, None], a + v_ab[:, None] * ab, out)
    vert_c = (d6 >= 0) & (d5 <= d6)
    out = np.where(vert_c[:, None], c, out)
    vert_b = (d3 >= 0) & (d4 <= d3)
    out = np.where(vert_b[:, None], b, out)
    vert_a = (d1 <= 0) & (d2 <= 0)
    out = np.where(vert_a[:, None], a, out)
    return out


def point_triangle_distances(tri: np.ndarray, q: np.ndarray) -> np.ndarray:
    closest = closest_point_on_triangles(tri, q)
    return np.linalg.norm(closest - q, axis=1)


class MeshBVH:
    """Median-split AABB tree over mesh triangles for distance queries."""

    LEAF_SIZE = 8

    def __init__(self, mesh: TriMesh):
        self.tri = mesh.positions[mesh.faces]
        centroids = self.tri.mean(axis=1)
        idx = np.arange(self.tri.shape[0])
        self.nodes: list[tuple] = []  # (lo, hi, left, right, tri_idx or None)
        self._build(idx, centroids)

    def _build(self, idx: np.ndarray, centroids: np.ndarray) -> int:
        tri = self.tri[idx]
        lo = tri.reshape(-1, 3).min(axis=0) if len(idx) else np.zeros(3)
        hi = tri.reshape(-1, 3).max(axis=0) if len(idx) else np.zeros(3)
        node_id = len(self.nodes)
        self.nodes.append(None)
        if len(idx) <= self.LEAF_SIZE:
            self.nodes[node_id] = (lo, hi, -1, -1, idx)
            return node_id
        cen = centroids[idx]
        axis = int(np.argmax(cen.max(axis=0) - cen.min(axis=0)))
        order = np.argsort(cen[:, axis], kind="stable")
        half = len(idx) // 2
        left = self._build(idx[order[:half]], centroids)
        right = self._build(idx[order[half:]], centroids)
        self.nodes[node_id] = (lo, hi, left, right, None)
        return node_id

    @staticmethod
    def _box_distance(lo: np.ndarray, hi: np.ndarray, q: np.ndarray) -> float:
        d = np.maximum(np.maximum(lo - q, 0.0), q - hi)
        return float(math.sqrt(float(d @ d)))

    def distance(self, q) -> float:
        """Exact distance from a point to the triangle set."""
        q = np.asarray(q, dtype=float)
        best = math.inf
        heap = [(self._box_distance(*self.nodes[0][:2], q), 0)]
        while heap:
            box_d, node_id = heapq.heappop(heap)
            if box_d >= best:
                break
            lo, hi, left, right, leaf = self.nodes[node_id]
            if leaf is not None:
                if len(leaf):
                    d = point_triangle_distances(self.tri[leaf], q).min()
                    best = min(best, float(d))
                continue
            for child in (left, right):
                clo, chi = self.nodes[child][:2]
                cd = self._box_distance(clo, chi, q)
                if cd < best:
                    heapq.heappush(heap, (cd, child))
        return best

    def distances(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.distance(p) for p in np.asarray(points, dtype=float)])


def brute_force_distances(mesh: TriMesh, points: np.ndarray) -> np.ndarray:
    """Reference implementation: all point/triangle pairs, no acceleration."""
    tri = mesh.positions[mesh.faces]
    return np.array([point_triangle_distances(tri, p).min() for p in points])


def fibonacci_sphere(samples: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Near-uniform lattice of ``samples`` points on a sphere."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    i = np.arange(samples)
    z = 1.0 - 2.0 * (i + 0.5) / samples
    rho = np.sqrt(np.maximum(1.0 - z * z, 0.0))
    golden_angle = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden_angle * i
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)
    return np.asarray(center, dtype=float) + radius * pts
