"""Triangle meshes: representation, generation, measures, normalization, I/O.

A :class:`TriMesh` is a closed, consistently oriented, connected triangle
surface immersed in 3-space. Generators build the test families (icospheres,
ellipsoids, radially perturbed spheres, tori); :func:`measure` computes the
surface area, mixed-Voronoi vertex weights and the area centroid; and
:func:`normalize` rescales to unit area with the centroid at the origin,
which is the standing hypothesis of every downstream inequality check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lpmv


class MeshError(Exception):
    """Base class for mesh input problems."""


class MeshParseError(MeshError):
    """Raised when a mesh file cannot be parsed."""


class MeshValidationError(MeshError):
    """Raised when a mesh violates a structural invariant.

    The ``invariant`` attribute names the violated property:
    ``"closed"``, ``"orientation"``, ``"connected"``, ``"degenerate"``
    or ``"index"``.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(message)
        self.invariant = invariant


# Relative floor below which a triangle counts as degenerate.
DEGENERATE_REL_AREA = 1e-12


@dataclass(frozen=True)
class TriMesh:
    """Oriented closed triangulated surface in R^3.

    Parameters
    ----------
    positions : (V, 3) float array
        Vertex coordinates.
    faces : (F, 3) int array
        Vertex index triples, counterclockwise seen from outside.
    name : str
        Optional tag used in reports and file headers.
    """

    positions: np.ndarray
    faces: np.ndarray
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "faces", np.asarray(self.faces, dtype=np.int64))
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise MeshValidationError("index", "positions must be (V, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshValidationError("index", "faces must be (F, 3)")
        self.positions.setflags(write=False)
        self.faces.setflags(write=False)

    @property
    def n_vertices(self) -> int:
        return self.positions.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    @property
    def n_edges(self) -> int:
        return np.unique(np.sort(_halfedges(self.faces), axis=1), axis=0).shape[0]

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def validate(self) -> "TriMesh":
        """Check all structural invariants, raising MeshValidationError."""
        validate_mesh(self)
        return self

    def translated(self, t) -> "TriMesh":
        return TriMesh(self.positions + np.asarray(t, dtype=float), self.faces, self.name)

    def scaled(self, c: float) -> "TriMesh":
        return TriMesh(self.positions * float(c), self.faces, self.name)


@dataclass(frozen=True)
class MeshMeasure:
    """Surface measure data: total area, per-vertex weights, area centroid."""

    total_area: float
    vertex_weights: np.ndarray
    centroid: np.ndarray


def _halfedges(faces: np.ndarray) -> np.ndarray:
    """All directed edges (3F, 2) in face order."""
    return np.concatenate(
        [faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]], axis=0
    )


def face_areas(mesh: TriMesh) -> np.ndarray:
    p = mesh.positions[mesh.faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    return 0.5 * np.linalg.norm(cross, axis=1)


def face_normals(mesh: TriMesh) -> np.ndarray:
    """Unit normals following face orientation."""
    p = mesh.positions[mesh.faces]
    cross = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    norms = np.linalg.norm(cross, axis=1)
    return cross / norms[:, None]


def signed_volume(mesh: TriMesh) -> float:
    """Signed enclosed volume; positive when faces are outward CCW."""
    p = mesh.positions[mesh.faces]
    return float(np.einsum("ij,ij->i", p[:, 0], np.cross(p[:, 1], p[:, 2])).sum() / 6.0)


def validate_mesh(mesh: TriMesh) -> None:
    """Raise MeshValidationError unless the mesh is a valid closed surface.

    Checks, in order: index range, closedness (every undirected edge on
    exactly two faces), orientation consistency (each undirected edge used
    once per direction), connectedness of the face adjacency graph, and
    triangle nondegeneracy relative to the mean area.
    """
    v, f = mesh.positions, mesh.faces
    if f.size and (f.min() < 0 or f.max() >= v.shape[0]):
        raise MeshValidationError("index", "face index out of range")
    if f.shape[0] == 0:
        raise MeshValidationError("closed", "mesh has no faces")

    he = _halfedges(f)
    und = np.sort(he, axis=1)
    uniq, counts = np.unique(und, axis=0, return_counts=True)
    if not np.all(counts == 2):
        bad = uniq[counts != 2][0]
        raise MeshValidationError(
            "closed",
            f"mesh is not closed: edge {tuple(bad)} lies on {counts[counts != 2][0]} face(s), expected 2",
        )
    # Closed and consistently oriented <=> every directed halfedge is unique.
    uniq_dir = np.unique(he, axis=0)
    if uniq_dir.shape[0] != he.shape[0]:
        seen = {}
        for a, b in map(tuple, he):
            if (a, b) in seen:
                raise MeshValidationError(
                    "orientation",
                    f"inconsistent orientation: directed edge ({a}, {b}) appears twice",
                )
            seen[(a, b)] = True

    if _n_face_components(f) != 1:
        raise MeshValidationError("connected", "mesh has more than one connected component")

    areas = face_areas(mesh)
    floor = DEGENERATE_REL_AREA * areas.mean()
    if np.any(areas <= floor):
        i = int(np.argmin(areas))
        raise MeshValidationError(
            "degenerate", f"triangle {i} has area {areas[i]:.3e} below threshold"
        )


def _n_face_components(faces: np.ndarray) -> int:
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    nf = faces.shape[0]
    he = _halfedges(faces)
    face_of = np.tile(np.arange(nf), 3)
    order = np.lexsort((np.sort(he, axis=1)[:, 1], np.sort(he, axis=1)[:, 0]))
    und = np.sort(he, axis=1)[order]
    fo = face_of[order]
    # After sorting, the two halfedges of each undirected edge are adjacent.
    same = np.all(und[0::2] == und[1::2], axis=1)
    a, b = fo[0::2][same], fo[1::2][same]
    adj = coo_matrix((np.ones(len(a)), (a, b)), shape=(nf, nf))
    ncomp, _ = connected_components(adj, directed=False)
    return int(ncomp)


# ---------------------------------------------------------------------------
# Shape specifications and generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sphere:
    radius: float = 1.0


@dataclass(frozen=True)
class Ellipsoid:
    a: float = 1.0
    b: float = 1.0
    c: float = 1.0


@dataclass(frozen=True)
class PerturbedSphere:
    """Radial bump r(u) = 1 + delta * Y_l^m(u) with a real spherical harmonic."""

    l: int = 2
    m: int = 0
    delta: float = 0.05


@dataclass(frozen=True)
class Torus:
    major: float = 2.0
    minor: float = 0.5


ShapeSpec = Sphere | Ellipsoid | PerturbedSphere | Torus

_PHI = (1.0 + math.sqrt(5.0)) / 2.0

_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=float,
)

_ICO_FACES = np.array(
    [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ],
    dtype=np.int64,
)


def _loop_subdivide_once(verts: np.ndarray, faces: np.ndarray):
    """One level of Loop subdivision (closed meshes only).

    Odd vertices use the 3/8-3/8-1/8-1/8 edge stencil, even vertices the
    valence-dependent smoothing mask with Loop's original beta weights.
    The smoothing keeps triangle shapes varying smoothly away from the
    twelve extraordinary vertices, which is what lets the curvature
    residuals converge at second order on mapped spheres.
    """
    nv = verts.shape[0]
    nf = faces.shape[0]
    he = _halfedges(faces)                      # (3F, 2) in [ab, bc, ca] blocks
    opposite = np.concatenate([faces[:, 2], faces[:, 0], faces[:, 1]])
    und = np.sort(he, axis=1)
    edges, inverse = np.unique(und, axis=0, return_inverse=True)
    ne = edges.shape[0]

    opp_sum = np.zeros((ne, 3))
    np.add.at(opp_sum, inverse, verts[opposite])
    odd = (3.0 * (verts[edges[:, 0]] + verts[edges[:, 1]]) + opp_sum) / 8.0

    degree = np.zeros(nv)
    neigh_sum = np.zeros((nv, 3))
    np.add.at(degree, edges.ravel(), 1.0)
    np.add.at(neigh_sum, edges[:, 0], verts[edges[:, 1]])
    np.add.at(neigh_sum, edges[:, 1], verts[edges[:, 0]])
    beta = (5.0 / 8.0 - (3.0 / 8.0 + 0.25 * np.cos(2.0 * np.pi / degree)) ** 2) / degree
    even = (1.0 - degree * beta)[:, None] * verts + beta[:, None] * neigh_sum

    new_verts = np.vstack([even, odd])
    eid = inverse.reshape(3, nf) + nv           # rows: ab, bc, ca per face
    ab, bc, ca = eid[0], eid[1], eid[2]
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new_faces = np.empty((4 * nf, 3), dtype=np.int64)
    new_faces[0::4] = np.column_stack([a, ab, ca])
    new_faces[1::4] = np.column_stack([b, bc, ab])
    new_faces[2::4] = np.column_stack([c, ca, bc])
    new_faces[3::4] = np.column_stack([ab, bc, ca])
    return new_verts, new_faces


def unit_icosphere(subdiv: int):
    """Icosahedron Loop-subdivided ``subdiv`` times, then projected to S^2."""
    verts = _ICO_VERTS / np.linalg.norm(_ICO_VERTS[0])
    faces = _ICO_FACES
    for _ in range(subdiv):
        verts, faces = _loop_subdivide_once(verts, faces)
    verts = verts / np.linalg.norm(verts, axis=1)[:, None]
    return verts, faces


def real_spherical_harmonic(l: int, m: int, directions: np.ndarray) -> np.ndarray:
    """Real Y_l^m (0 <= m <= l, orthonormal convention) on unit vectors."""
    if not (0 <= m <= l):
        raise ValueError(f"need 0 <= m <= l, got l={l}, m={m}")
    x, y, z = directions[:, 0], directions[:, 1], directions[:, 2]
    cos_theta = np.clip(z, -1.0, 1.0)
    phi = np.arctan2(y, x)
    norm = math.sqrt(
        (2 * l + 1) / (4 * math.pi) * math.factorial(l - m) / math.factorial(l + m)
    )
    vals = norm * lpmv(m, l, cos_theta)
    if m > 0:
        vals = math.sqrt(2.0) * vals * np.cos(m * phi)
    return vals


def generate(shape: ShapeSpec, subdiv: int = 4) -> TriMesh:
    """Generate a validated mesh of the requested shape family.

    Sphere, Ellipsoid and PerturbedSphere map an icosphere with ``subdiv``
    subdivision levels onto the target surface; Torus uses a structured
    quad grid (split into triangles) whose resolution doubles per level.
    """
    if subdiv < 0:
        raise ValueError("subdiv must be nonnegative")
    if isinstance(shape, Sphere):
        if shape.radius <= 0:
            raise ValueError("sphere radius must be positive")
        verts, faces = unit_icosphere(subdiv)
        mesh = TriMesh(verts * shape.radius, faces, name=f"sphere_r{shape.radius:g}_s{subdiv}")
    elif isinstance(shape, Ellipsoid):
        if min(shape.a, shape.b, shape.c) <= 0:
            raise ValueError("ellipsoid semi-axes must be positive")
        verts, faces = unit_icosphere(subdiv)
        mesh = TriMesh(
            verts * np.array([shape.a, shape.b, shape.c]),
            faces,
            name=f"ellipsoid_{shape.a:g}_{shape.b:g}_{shape.c:g}_s{subdiv}",
        )
    elif isinstance(shape, PerturbedSphere):
        verts, faces = unit_icosphere(subdiv)
        bump = real_spherical_harmonic(shape.l, shape.m, verts)
        radial = 1.0 + shape.delta * bump
        if np.abs(shape.delta) * np.abs(bump).max() >= 1.0 or radial.min() <= 0:
            raise ValueError("perturbation amplitude too large: radial function must stay positive")
        mesh = TriMesh(
            verts * radial[:, None],
            faces,
            name=f"perturbed_l{shape.l}m{shape.m}_d{shape.delta:g}_s{subdiv}",
        )
    elif isinstance(shape, Torus):
        if shape.minor <= 0 or shape.major <= shape.minor:
            raise ValueError("torus needs 0 < minor < major")
        mesh = _torus_mesh(shape.major, shape.minor, subdiv)
    else:
        raise ValueError(f"unknown shape spec: {shape!r}")
    validate_mesh(mesh)
    return mesh


def _torus_mesh(R: float, r: float, subdiv: int) -> TriMesh:
    nu = 8 * 2 ** subdiv
    nv = max(6, int(round(nu * r / R)))
    u = 2.0 * np.pi * np.arange(nu) / nu
    v = 2.0 * np.pi * np.arange(nv) / nv
    uu, vv = np.meshgrid(u, v, indexing="ij")
    ring = R + r * np.cos(vv)
    verts = np.stack([ring * np.cos(uu), ring * np.sin(uu), r * np.sin(vv)], axis=-1)
    verts = verts.reshape(-1, 3)

    def vid(i, j):
        return (i % nu) * nv + (j % nv)

    faces = []
    for i in range(nu):
        for j in range(nv):
            p00, p10 = vid(i, j), vid(i + 1, j)
            p11, p01 = vid(i + 1, j + 1), vid(i, j + 1)
            faces.append((p00, p10, p11))
            faces.append((p00, p11, p01))
    return TriMesh(verts, np.array(faces, dtype=np.int64), name=f"torus_{R:g}_{r:g}_s{subdiv}")


# ---------------------------------------------------------------------------
# Measures and normalization
# ---------------------------------------------------------------------------

def mixed_voronoi_weights(mesh: TriMesh) -> np.ndarray:
    """Per-vertex mixed-Voronoi cell areas (Meyer's obtuse-triangle split).

    Non-obtuse triangles contribute circumcentric Voronoi areas; an obtuse
    triangle gives half its area to the obtuse vertex and one quarter to
    each of the other two. Weights are strictly positive and sum to the
    total area.
    """
    p = mesh.positions[mesh.faces]
    weights = np.zeros(mesh.n_vertices)
    # Edge vectors opposite each corner: e0 = p2 - p1 opposite corner 0, etc.
    e = np.stack([p[:, 2] - p[:, 1], p[:, 0] - p[:, 2], p[:, 1] - p[:, 0]], axis=1)
    sq = np.einsum("fij,fij->fi", e, e)
    areas = 0.5 * np.linalg.norm(np.cross(e[:, 1], e[:, 2]), axis=1)
    # cot at corner k = dot of the two edges leaving corner k / (2 area)
    cot = np.empty_like(sq)
    cot[:, 0] = np.einsum("fj,fj->f", -e[:, 1], e[:, 2])
    cot[:, 1] = np.einsum("fj,fj->f", -e[:, 2], e[:, 0])
    cot[:, 2] = np.einsum("fj,fj->f", -e[:, 0], e[:, 1])
    cot /= (2.0 * areas)[:, None]

    obtuse_corner = np.argmin(cot, axis=1)
    is_obtuse = cot[np.arange(len(cot)), obtuse_corner] < 0.0

    # Voronoi area at corner i: (|e_j|^2 cot_j + |e_k|^2 cot_k) / 8
    vor = np.empty_like(sq)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        vor[:, i] = (sq[:, j] * cot[:, j] + sq[:, k] * cot[:, k]) / 8.0

    contrib = np.where(is_obtuse[:, None], 0.25 * areas[:, None], vor)
    if is_obtuse.any():
        rows = np.where(is_obtuse)[0]
        contrib[rows, obtuse_corner[rows]] = 0.5 * areas[rows]

    np.add.at(weights, mesh.faces.ravel(), contrib.ravel())
    return weights


def barycentric_weights(mesh: TriMesh) -> np.ndarray:
    """Per-vertex barycentric thirds of adjacent triangle areas."""
    areas = face_areas(mesh)
    weights = np.zeros(mesh.n_vertices)
    np.add.at(weights, mesh.faces.ravel(), np.repeat(areas / 3.0, 3))
    return weights


def measure(mesh: TriMesh, scheme: str = "lumped_mixed") -> MeshMeasure:
    """Total area, per-vertex area weights, and the area centroid.

    The centroid is the surface center of mass (area measure over the
    immersed surface, not the enclosed solid).
    """
    areas = face_areas(mesh)
    total = float(areas.sum())
    if scheme == "lumped_mixed":
        weights = mixed_voronoi_weights(mesh)
    elif scheme == "barycentric":
        weights = barycentric_weights(mesh)
    else:
        raise ValueError(f"unknown weight scheme {scheme!r}")
    face_centroids = mesh.positions[mesh.faces].mean(axis=1)
    centroid = (face_centroids * areas[:, None]).sum(axis=0) / total
    return MeshMeasure(total_area=total, vertex_weights=weights, centroid=centroid)


def normalize(mesh: TriMesh):
    """Translate the centroid to the origin and rescale to unit area.

    Returns ``(mesh_out, scale, shift)`` with
    ``positions_out = scale * (positions_in + shift)``,
    ``scale = area**(-1/2)`` and ``shift = -centroid``.
    """
    m = measure(mesh)
    scale = 1.0 / math.sqrt(m.total_area)
    shift = -m.centroid
    out = TriMesh(scale * (mesh.positions + shift), mesh.faces, mesh.name)
    return out, scale, shift


# ---------------------------------------------------------------------------
# File I/O
# ---------------------------------------------------------------------------

def save_mesh(mesh: TriMesh, path, fmt: str | None = None) -> None:
    """Write OFF or OBJ; the format defaults to the file extension."""
    fmt = _pick_format(path, fmt)
    lines = []
    if fmt == "off":
        lines.append("OFF")
        lines.append(f"{mesh.n_vertices} {mesh.n_faces} 0")
        for x, y, z in mesh.positions:
            lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
        for i, j, k in mesh.faces:
            lines.append(f"3 {i} {j} {k}")
    else:
        for x, y, z in mesh.positions:
            lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
        for i, j, k in mesh.faces:
            lines.append(f"f {i + 1} {j + 1} {k + 1}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path, fmt: str | None = None) -> TriMesh:
    """Read an OFF or OBJ file into a validated TriMesh."""
    fmt = _pick_format(path, fmt)
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if fmt == "off":
        mesh = _parse_off(text, str(path))
    else:
        mesh = _parse_obj(text, str(path))
    validate_mesh(mesh)
    return mesh


def _pick_format(path, fmt: str | None) -> str:
    if fmt is None:
        fmt = str(path).rsplit(".", 1)[-1].lower()
    fmt = fmt.lower()
    if fmt not in ("off", "obj"):
        raise ValueError(f"unsupported mesh format {fmt!r}")
    return fmt


def _parse_off(text: str, src: str) -> TriMesh:
    tokens = [
        line.split("#", 1)[0]
        for line in text.splitlines()
        if line.split("#", 1)[0].strip()
    ]
    if not tokens or tokens[0].strip() != "OFF":
        raise MeshParseError(f"{src}: missing OFF header")
    flat = " ".join(tokens[1:]).split()
    try:
        nv, nf = int(flat[0]), int(flat[1])
        cursor = 3  # skip edge count
        coords = np.array(flat[cursor: cursor + 3 * nv], dtype=float).reshape(nv, 3)
        cursor += 3 * nv
        faces = np.empty((nf, 3), dtype=np.int64)
        for f in range(nf):
            arity = int(flat[cursor])
            if arity != 3:
                raise MeshParseError(f"{src}: face {f} has {arity} vertices, wanted 3")
            faces[f] = [int(t) for t in flat[cursor + 1: cursor + 4]]
            cursor += 1 + arity
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"{src}: malformed OFF file: {exc}") from exc
    return TriMesh(coords, faces)


def _parse_obj(text: str, src: str) -> TriMesh:
    verts, faces = [], []
    try:
        for ln, line in enumerate(text.splitlines(), start=1):
            parts = line.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(t) for t in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(t.split("/", 1)[0]) for t in parts[1:]]
                if len(idx) != 3:
                    raise MeshParseError(f"{src}:{ln}: non-triangular face")
                faces.append([i - 1 for i in idx])
    except (ValueError, IndexError) as exc:
        raise MeshParseError(f"{src}: malformed OBJ file: {exc}") from exc
    if not verts or not faces:
        raise MeshParseError(f"{src}: no geometry found")
    return TriMesh(np.array(verts), np.array(faces, dtype=np.int64))
