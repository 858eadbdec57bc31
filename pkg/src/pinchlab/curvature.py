"""Discrete curvature data and the curvature integrals of the surface.

Per-vertex quantities on a closed surface mesh (n = 2 in 3-space):
outward unit normal, mean curvature from the cotangent mean-curvature
normal, Gauss curvature from the angle defect, and principal curvatures
recovered from (H, K). Sign convention: the outward normal makes a round
sphere's mean curvature +1/R, so all H_k are positive on convex surfaces.

Integrals use the mixed-Voronoi vertex weights; ``lp_norm`` works with the
raw area measure, so callers normalize the mesh first whenever a unit-area
hypothesis is in force.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .mesh import TriMesh, mixed_voronoi_weights, signed_volume


@dataclass(frozen=True)
class VertexGeometry:
    """Arrays of per-vertex geometric data, one row per mesh vertex."""

    normal: np.ndarray       # (V, 3) outward unit normals
    H: np.ndarray            # mean curvature (kappa1 + kappa2) / 2
    K: np.ndarray            # Gauss curvature kappa1 * kappa2
    kappa1: np.ndarray
    kappa2: np.ndarray
    weight: np.ndarray       # mixed-Voronoi vertex areas

    @property
    def n_vertices(self) -> int:
        return self.H.size

    def Hk(self, k: int) -> np.ndarray:
        """Pointwise H_k for the surface case n = 2 (H_0=1, H_1=H, H_2=K, H_3=0)."""
        if k == 0:
            return np.ones_like(self.H)
        if k == 1:
            return self.H
        if k == 2:
            return self.K
        if k == 3:
            return np.zeros_like(self.H)
        raise ValueError(f"k must be in 0..3 for surfaces, got {k}")


def vertex_geometry(mesh: TriMesh) -> VertexGeometry:
    """Discrete curvature data at every vertex.

    Normals are angle-weighted face-normal averages with the global sign
    fixed so the enclosed signed volume is positive (outward). The mean
    curvature is half the norm of the cotangent mean-curvature normal,
    signed by its alignment with the outward normal; the Gauss curvature
    is the angle defect over the mixed area; principal curvatures come
    from H +- sqrt(max(H^2 - K, 0)).
    """
    v, f = mesh.positions, mesh.faces
    nv = mesh.n_vertices
    p = v[f]

    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    two_area = np.linalg.norm(cross, axis=1)
    fnormal = cross / two_area[:, None]

    # Corner angles of each face.
    angles = np.empty((f.shape[0], 3))
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        w = p[:, (i + 2) % 3] - p[:, i]
        cosang = np.einsum("fj,fj->f", u, w) / (
            np.linalg.norm(u, axis=1) * np.linalg.norm(w, axis=1)
        )
        angles[:, i] = np.arccos(np.clip(cosang, -1.0, 1.0))

    orient = 1.0 if signed_volume(mesh) >= 0.0 else -1.0

    normals = np.zeros((nv, 3))
    np.add.at(normals, f.ravel(), (angles[:, :, None] * fnormal[:, None, :]).reshape(-1, 3))
    normals *= orient
    normals /= np.linalg.norm(normals, axis=1)[:, None]

    weights = mixed_voronoi_weights(mesh)

    # Cotangent mean-curvature normal: (1 / m_i) sum_j w_ij (x_i - x_j),
    # w_ij = (cot a_ij + cot b_ij) / 2, equals n H nu + O(h^2). Its direction
    # is intrinsic to the embedding, so it takes no winding correction.
    lap_pos = _cot_laplacian_apply(mesh, v)
    mc_normal = lap_pos / weights[:, None]
    mag = np.linalg.norm(mc_normal, axis=1)
    sign = np.where(np.einsum("ij,ij->i", mc_normal, normals) >= 0.0, 1.0, -1.0)
    H = 0.5 * sign * mag

    defect = np.full(nv, 2.0 * np.pi)
    np.add.at(defect, f.ravel(), -angles.ravel())
    K = defect / weights

    disc = np.sqrt(np.maximum(H * H - K, 0.0))
    kappa1 = H + disc
    kappa2 = H - disc
    return VertexGeometry(normal=normals, H=H, K=K, kappa1=kappa1, kappa2=kappa2, weight=weights)


def _cot_laplacian_apply(mesh: TriMesh, values: np.ndarray) -> np.ndarray:
    """Apply the (positive semidefinite) cotangent stiffness to vertex values.

    Orientation-independent; callers divide by mass to get the operator.
    """
    v, f = mesh.positions, mesh.faces
    p = v[f]
    vals = np.asarray(values, dtype=float)
    flat = vals.reshape(vals.shape[0], -1)
    out = np.zeros_like(flat)
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    areas = 0.5 * np.linalg.norm(np.cross(e[:, 1], e[:, 2]), axis=1)
    for corner in range(3):
        i, j = (corner + 1) % 3, (corner + 2) % 3
        cot = np.einsum("fk,fk->f", -e[:, i], e[:, j]) / (2.0 * areas)
        half = 0.5 * cot
        vi, vj = f[:, i], f[:, j]
        diff = flat[vi] - flat[vj]
        np.add.at(out, vi, half[:, None] * diff)
        np.add.at(out, vj, -half[:, None] * diff)
    return out.reshape(vals.shape)


def tangential_projection(mesh: TriMesh, geom: VertexGeometry) -> np.ndarray:
    """X^T = X - <X, nu> nu per vertex; orthogonal to nu by construction."""
    x = mesh.positions
    nu = geom.normal
    return x - np.einsum("ij,ij->i", x, nu)[:, None] * nu


def integrate(mesh: TriMesh, f: np.ndarray, weights: np.ndarray | None = None) -> float:
    """Vertex-lumped quadrature sum(f_i * w_i) over the surface."""
    f = np.asarray(f, dtype=float)
    if weights is None:
        weights = mixed_voronoi_weights(mesh)
    if f.shape[0] != weights.shape[0]:
        raise ValueError(f"integrand has {f.shape[0]} values for {weights.shape[0]} vertices")
    if np.isnan(f).any():
        raise ValueError("integrand contains NaN")
    return float(np.dot(f, weights))


def lp_norm(mesh: TriMesh, f: np.ndarray, q: float, weights: np.ndarray | None = None) -> float:
    """(integral |f|^q)^(1/q) under the raw area measure, q >= 1."""
    if q < 1.0:
        raise ValueError(f"q must be >= 1, got {q}")
    return integrate(mesh, np.abs(np.asarray(f, dtype=float)) ** q, weights) ** (1.0 / q)


def hsiung_minkowski_residual(mesh: TriMesh, geom: VertexGeometry, k: int) -> float:
    """Discrete value of integral(H_{k-1} - H_k <X, nu>); zero smoothly.

    Holds for any choice of origin, so the mesh need not be centered.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2 on meshes, got {k}")
    xdotnu = np.einsum("ij,ij->i", mesh.positions, geom.normal)
    integrand = geom.Hk(k - 1) - geom.Hk(k) * xdotnu
    return integrate(mesh, integrand, geom.weight)


def delta_position_residual(mesh: TriMesh, geom: VertexGeometry, stiffness, massdiag) -> float:
    """Mass-weighted L2 residual of (1/2) Lap |X|^2 = n H <nu, X> - n.

    ``stiffness`` and ``massdiag`` come from the spectral assembly; the
    discrete operator is M^-1 K, which is positive on the eigenproblem
    side, matching the sign that makes the identity hold on a sphere.
    """
    n = 2
    m = np.asarray(massdiag.diagonal() if hasattr(massdiag, "diagonal") else massdiag, dtype=float)
    x = mesh.positions
    sq = np.einsum("ij,ij->i", x, x)
    lap_sq = stiffness @ sq / m
    xdotnu = np.einsum("ij,ij->i", x, geom.normal)
    resid = 0.5 * lap_sq - (n * geom.H * xdotnu - n)
    return float(np.sqrt(np.dot(m, resid * resid)))


def write_geometry_csv(mesh: TriMesh, geom: VertexGeometry, path) -> None:
    """Per-vertex dump: vertex_id, nx, ny, nz, H, K, kappa1, kappa2, weight."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vertex_id", "nx", "ny", "nz", "H", "K", "kappa1", "kappa2", "weight"])
        for i in range(geom.n_vertices):
            writer.writerow(
                [i]
                + [repr(float(t)) for t in geom.normal[i]]
                + [repr(float(geom.H[i])), repr(float(geom.K[i])),
                   repr(float(geom.kappa1[i])), repr(float(geom.kappa2[i])),
                   repr(float(geom.weight[i]))]
            )
