"""Cotangent finite elements and the first Laplace eigenvalue.

``assemble_stiffness`` / ``assemble_mass`` build the sparse pair (K, M) of
the generalized symmetric eigenproblem K u = lambda M u; ``first_eigenpair``
and ``lowest_spectrum`` solve it by shift-invert with the constant mode
filtered out. ``rayleigh_upper_bound_coords`` evaluates the variational
bound n / integral(|X|^2) available on normalized meshes.

Matrices are plain scipy CSR/DIA; symmetry and the zero row sums of the
stiffness are assembly invariants checked by the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.io import mmwrite
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .mesh import TriMesh, measure


class SolverError(Exception):
    """Eigensolver failed to converge or the operator pencil is unusable."""


@dataclass(frozen=True)
class EigenPair:
    """Generalized eigenpair with its relative residual.

    ``vector`` is M-normalized (u^T M u = 1) and M-orthogonal to constants;
    ``residual`` is ||K u - lambda M u||_2 / ||M u||_2.
    """

    lam: float
    vector: np.ndarray
    residual: float


def assemble_stiffness(mesh: TriMesh) -> sparse.csr_matrix:
    """Cotangent stiffness: w_ij = -(cot a_ij + cot b_ij)/2 off-diagonal.

    Positive semidefinite with constants in the kernel; cotangents of
    obtuse angles stay negative (no clipping) to keep the variational
    structure exact.
    """
    v, f = mesh.positions, mesh.faces
    nv = mesh.n_vertices
    p = v[f]
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    areas = 0.5 * np.linalg.norm(np.cross(e[:, 1], e[:, 2]), axis=1)

    rows, cols, vals = [], [], []
    for corner in range(3):
        i, j = (corner + 1) % 3, (corner + 2) % 3
        half_cot = np.einsum("fk,fk->f", -e[:, i], e[:, j]) / (4.0 * areas)
        vi, vj = f[:, i], f[:, j]
        rows.extend([vi, vj, vi, vj])
        cols.extend([vj, vi, vi, vj])
        vals.extend([-half_cot, -half_cot, half_cot, half_cot])
    K = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(nv, nv),
    ).tocsr()
    K.sum_duplicates()
    return K


def assemble_mass(mesh: TriMesh, scheme: str = "lumped_mixed") -> sparse.dia_matrix:
    """Diagonal (lumped) mass matrix of vertex area weights."""
    m = measure(mesh, scheme=scheme)
    return sparse.diags(m.vertex_weights)


def _mass_diagonal(M) -> np.ndarray:
    d = np.asarray(M.diagonal() if hasattr(M, "diagonal") else M, dtype=float)
    if np.any(d <= 0.0):
        raise SolverError("mass matrix must have a strictly positive diagonal")
    return d


def _spectrum_scale(K, mdiag: np.ndarray) -> float:
    """Rough magnitude of a typical eigenvalue; used for shifts and zero tests."""
    return float(np.asarray(K.diagonal()).sum() / mdiag.sum())


def first_eigenpair(K, M, tol: float = 1e-8, maxiter: int | None = None,
                    seed: int = 0) -> EigenPair:
    """Smallest nonzero generalized eigenvalue of K u = lambda M u.

    Shift-invert ARPACK iteration with a small positive shift (the
    factored operator is K + sigma M) and a deterministic start vector
    drawn from ``seed``. The constant mode is projected out of the start
    vector and filtered from the Ritz values; a second near-zero
    eigenvalue (disconnected operator) is rejected.
    """
    pairs = lowest_spectrum(K, M, 1, tol=tol, maxiter=maxiter, seed=seed)
    return pairs[0]


def lowest_spectrum(K, M, count: int, tol: float = 1e-8, maxiter: int | None = None,
                    seed: int = 0) -> list[EigenPair]:
    """First ``count`` nonzero eigenpairs in ascending order."""
    if count < 1:
        raise ValueError("count must be >= 1")
    nv = K.shape[0]
    mdiag = _mass_diagonal(M)
    Md = sparse.diags(mdiag)
    scale = _spectrum_scale(K, mdiag)
    sigma = 1e-3 * scale
    if maxiter is None:
        maxiter = max(100, int(10 * math.sqrt(nv)))

    k_request = count + 1
    if k_request >= nv:
        raise SolverError(f"need {k_request} modes from a {nv}-vertex operator")

    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(nv)
    v0 -= (mdiag @ v0) / mdiag.sum()  # deflate the constant mode from the start

    try:
        lams, vecs = eigsh(
            K.tocsc(), k=k_request, M=Md.tocsc(), sigma=-sigma,
            which="LM", v0=v0, maxiter=maxiter, tol=min(tol * 1e-2, 1e-10),
        )
    except ArpackNoConvergence as exc:
        raise SolverError(f"eigensolver did not converge within {maxiter} iterations") from exc

    order = np.argsort(lams)
    lams, vecs = lams[order], vecs[:, order]

    zero_tol = 1e-10 * scale
    nonzero = lams > zero_tol
    n_zero = int((~nonzero).sum())
    if n_zero == 0:
        raise SolverError("constant mode not found; operator pencil looks wrong")
    if n_zero > 1:
        raise SolverError(
            f"{n_zero} near-zero eigenvalues: the operator is disconnected"
        )
    lams, vecs = lams[nonzero], vecs[:, nonzero]
    if lams.size < count:
        raise SolverError("converged to fewer nonzero modes than requested")
    lams, vecs = lams[:count], vecs[:, :count]

    pairs = []
    for lam, u in zip(lams, vecs.T):
        u = u - (mdiag @ u) / mdiag.sum()
        u = u / math.sqrt(float(u @ (mdiag * u)))
        resid_vec = K @ u - lam * (mdiag * u)
        residual = float(np.linalg.norm(resid_vec) / np.linalg.norm(mdiag * u))
        if residual > tol:
            raise SolverError(f"residual {residual:.3e} exceeds tolerance {tol:.3e}")
        pairs.append(EigenPair(lam=float(lam), vector=u, residual=residual))
    return pairs


def rayleigh_upper_bound_coords(mesh: TriMesh, centroid_tol: float = 1e-6) -> float:
    """Variational bound lambda_1 <= n / integral(|X|^2) on a normalized mesh.

    The coordinate functions are admissible (mean-zero) exactly when the
    centroid sits at the origin, so a non-normalized mesh is rejected.
    """
    m = measure(mesh)
    scale = math.sqrt(m.total_area)
    if np.linalg.norm(m.centroid) > centroid_tol * scale:
        raise ValueError("mesh is not centered: normalize before the coordinate bound")
    if abs(m.total_area - 1.0) > 1e-6:
        raise ValueError("mesh does not have unit area: normalize first")
    x2 = np.einsum("ij,ij->i", mesh.positions, mesh.positions)
    return 2.0 / float(np.dot(m.vertex_weights, x2))


def spectrum_report(pairs: list[EigenPair], tol: float, iters: int | None = None) -> str:
    """JSON spectrum report with fixed key order."""
    doc = {
        "lambda": [p.lam for p in pairs],
        "residuals": [p.residual for p in pairs],
        "solver": {"tol": tol, "iters": iters},
    }
    return json.dumps(doc, indent=2)


def dump_matrix_market(matrix, path) -> None:
    """MatrixMarket coordinate dump for external cross-checks."""
    mmwrite(str(path), sparse.coo_matrix(matrix))
