"""Eigenvalue-pinching deficit and sphere-closeness certificates.

Everything here runs on a normalized mesh (unit area, centroid at the
origin) unless stated otherwise. The central quantity is the deficit

    D = lambda_1 * (int H_{k-1})^2 - n * ||H_k||_{2p}^2,

which is nonpositive for smooth closed hypersurfaces with equality exactly
on round spheres. Near-equality certificates are quantified by the annulus
width, the sphere-sampling density gap, the Hausdorff distance to the
comparison sphere of radius sqrt(n / lambda_1), the quasi-isometry
distortion of the radial map onto that sphere, and an almost-Einstein
analysis of the Gauss curvature spread. The auxiliary vector fields Y, Z
and the function phi = |X| (|X| - sqrt(n/lambda_1))^2 come with the
explicit L^2 bounds they satisfy under the pinching hypothesis; the suite
records each bound with its measured margin instead of asserting it.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np

from .curvature import VertexGeometry, lp_norm, tangential_projection, vertex_geometry
from .distance import MeshBVH, fibonacci_sphere
from .mesh import TriMesh, measure, normalize, validate_mesh
from .spectral import assemble_mass, assemble_stiffness, first_eigenpair

N_DIM = 2          # surface dimension of the mesh pipeline
EPS_C = 1e-12      # floor for the pinching constant C = max(EPS_C, -D)


@dataclass(frozen=True)
class SphereModel:
    """Comparison sphere: center x0 and radius sqrt(n / lambda_1)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.radius <= 0:
            raise ValueError("sphere radius must be positive")


@dataclass(frozen=True)
class LemmaCheck:
    """One recorded inequality: lhs <= rhs up to tol_disc * scale slack."""

    lhs: float
    rhs: float
    passed: bool
    margin: float          # lhs - rhs; negative means satisfied outright
    scale: float           # magnitude used for the slack
    hypothesis_ok: bool = True
    note: str = ""


@dataclass(frozen=True)
class GrosjeanResult:
    bound: float
    passed: bool
    hypothesis_ok: bool


@dataclass(frozen=True)
class EinsteinReport:
    """Gauss-curvature pinching view: Ric = K g on surfaces."""

    almost_einstein: bool
    einstein_constant: float    # k* = (max K + min K) / 2
    epsilon: float              # (max K - min K) / 2
    target_radius: float
    hausdorff: float
    lambda1: float
    chain_lower: float          # n (k* - eps) / (n - 1), reported only
    chain_upper: float          # n (k* + eps) / (n - 1), asserted with slack
    upper_pass: bool
    lower_holds: bool


@dataclass(frozen=True)
class ReportOptions:
    k: int = 1
    p: float = 2.0
    tol_disc: float = 0.05
    samples: int = 2000
    seed: int = 0
    solver_tol: float = 1e-8
    mass_scheme: str = "lumped_mixed"


@dataclass(frozen=True)
class PinchingReport:
    k: int
    p: float
    lambda1: float
    intHkm1: float
    normHk2p: float
    deficit: float
    hk_positive: bool
    gate_ok: bool
    sphere_radius: float
    annulus_eps_star: float
    density_eps_star: float
    hausdorff: float
    distortion_theta_star: float
    rayleigh_bound: float
    grosjean: GrosjeanResult
    lemma_checks: dict[str, LemmaCheck]
    einstein: EinsteinReport | None
    mesh_name: str
    n_vertices: int
    n_faces: int
    options: ReportOptions

    def to_dict(self) -> dict:
        doc = {
            "mesh": {"name": self.mesh_name, "vertices": self.n_vertices, "faces": self.n_faces},
            "k": self.k,
            "p": self.p,
            "lambda1": self.lambda1,
            "intHkm1": self.intHkm1,
            "normHk2p": self.normHk2p,
            "deficit": self.deficit,
            "hk_positive": self.hk_positive,
            "gate_ok": self.gate_ok,
            "sphere_radius": self.sphere_radius,
            "annulus_eps_star": self.annulus_eps_star,
            "density_eps_star": self.density_eps_star,
            "hausdorff": self.hausdorff,
            "distortion_theta_star": self.distortion_theta_star,
            "rayleigh_bound": self.rayleigh_bound,
            "grosjean": asdict(self.grosjean),
            "lemma_checks": {name: asdict(c) for name, c in self.lemma_checks.items()},
            "einstein": asdict(self.einstein) if self.einstein is not None else None,
            "options": asdict(self.options),
        }
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _require_normalized(mesh: TriMesh, where: str) -> None:
    m = measure(mesh)
    scale = math.sqrt(m.total_area)
    if abs(m.total_area - 1.0) > 1e-6 or np.linalg.norm(m.centroid) > 1e-6 * scale:
        raise ValueError(f"{where} expects a normalized mesh (unit area, centered)")


def reilly_deficit(mesh: TriMesh, geom: VertexGeometry, k: int, p: float,
                   lambda1: float | None = None) -> float:
    """Deficit D = lambda_1 (int H_{k-1})^2 - n ||H_k||_{2p}^2 on a unit-area mesh.

    Smoothly D <= 0 with equality only on round spheres; the discrete value
    may be slightly positive within discretization error. ``lambda1`` may be
    passed to reuse an existing eigensolve.
    """
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2 on meshes, got {k}")
    if p < 2.0:
        warnings.warn(f"p = {p} is below the p >= 2 hypothesis", stacklevel=2)
    _require_normalized(mesh, "reilly_deficit")
    if lambda1 is None:
        lambda1 = first_eigenpair(assemble_stiffness(mesh), assemble_mass(mesh)).lam
    int_hkm1 = float(np.dot(geom.weight, geom.Hk(k - 1)))
    norm_hk = lp_norm(mesh, geom.Hk(k), 2.0 * p, weights=geom.weight)
    return lambda1 * int_hkm1 ** 2 - N_DIM * norm_hk ** 2


def pinching_predicate(deficit: float, C: float) -> bool:
    """Pinching condition: the deficit exceeds -C."""
    if C <= 0:
        raise ValueError("C must be positive")
    return deficit > -C


def sphere_model(mesh: TriMesh, lambda1: float) -> SphereModel:
    """Comparison sphere centered at the origin with radius sqrt(n/lambda_1)."""
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    _require_normalized(mesh, "sphere_model")
    return SphereModel(center=np.zeros(3), radius=math.sqrt(N_DIM / lambda1))


def annulus_epsilon(mesh: TriMesh, model: SphereModel) -> float:
    """Smallest eps with all vertices inside the annulus of width 2 eps.

    eps* = max over vertices of | |X - x0| - r |; requires the mesh
    centroid to sit at the model center.
    """
    m = measure(mesh)
    if np.linalg.norm(m.centroid - model.center) > 1e-6 * math.sqrt(m.total_area):
        raise ValueError("mesh centroid does not match the model center")
    radii = np.linalg.norm(mesh.positions - model.center, axis=1)
    return float(np.abs(radii - model.radius).max())


def density_epsilon(mesh: TriMesh, model: SphereModel, samples: int = 2000) -> float:
    """Smallest eps with every model-sphere sample within eps of the mesh.

    Samples a Fibonacci lattice on the model sphere and takes the max
    exact point-to-mesh distance (BVH accelerated). Sampling error is
    bounded by r * sqrt(4 pi / samples).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    pts = fibonacci_sphere(samples, radius=model.radius, center=model.center)
    bvh = MeshBVH(mesh)
    return float(bvh.distances(pts).max())


def hausdorff_to_sphere(mesh: TriMesh, model: SphereModel, samples: int = 2000) -> float:
    """Hausdorff distance between the mesh and the model sphere.

    The mesh-to-sphere direction is the exact radial gap (annulus eps*);
    the sphere-to-mesh direction is the sampled density eps*.
    """
    return max(annulus_epsilon(mesh, model), density_epsilon(mesh, model, samples))


def field_Y(mesh: TriMesh, geom: VertexGeometry, k: int, lambda1: float):
    """Y = n H_k nu - lambda_1 (int H_{k-1}) X and its squared L2 norm.

    Vanishes identically on round spheres; its L2 norm is bounded by
    sqrt(n C) under the pinching condition.
    """
    _require_normalized(mesh, "field_Y")
    int_hkm1 = float(np.dot(geom.weight, geom.Hk(k - 1)))
    y = N_DIM * geom.Hk(k)[:, None] * geom.normal - lambda1 * int_hkm1 * mesh.positions
    l2sq = float(np.dot(geom.weight, np.einsum("ij,ij->i", y, y)))
    return y, l2sq


@dataclass(frozen=True)
class ZFieldResult:
    vectors: np.ndarray
    l2sq: float
    proof_bound: float      # (n/lambda_1)^{3/2} (int H_{k-1})^{-2} C
    hypothesis_ok: bool     # H_k > 0 pointwise


def field_Z(mesh: TriMesh, geom: VertexGeometry, k: int, lambda1: float,
            deficit: float | None = None) -> ZFieldResult:
    """Z = sqrt(n/lambda_1) |X|^(1/2) H_k / (int H_{k-1}) nu - X / |X|^(1/2).

    Needs |X| > 0 at every vertex (raises otherwise) and H_k > 0 pointwise
    (reported as a hypothesis violation otherwise). The attached proof
    bound uses C = max(EPS_C, -D).
    """
    r = np.linalg.norm(mesh.positions, axis=1)
    if r.min() < 1e-9:
        raise ValueError("a vertex sits at the origin: |X| must be positive")
    _require_normalized(mesh, "field_Z")
    hk = geom.Hk(k)
    hypothesis_ok = bool(hk.min() > 0.0)
    int_hkm1 = float(np.dot(geom.weight, geom.Hk(k - 1)))
    sqrt_r = np.sqrt(r)
    z = (
        math.sqrt(N_DIM / lambda1) * (sqrt_r * hk / int_hkm1)[:, None] * geom.normal
        - mesh.positions / sqrt_r[:, None]
    )
    l2sq = float(np.dot(geom.weight, np.einsum("ij,ij->i", z, z)))
    if deficit is None:
        deficit = reilly_deficit(mesh, geom, k, 2.0, lambda1=lambda1)
    c = max(EPS_C, -deficit)
    proof_bound = (N_DIM / lambda1) ** 1.5 / int_hkm1 ** 2 * c
    return ZFieldResult(vectors=z, l2sq=l2sq, proof_bound=proof_bound, hypothesis_ok=hypothesis_ok)


@dataclass(frozen=True)
class PhiResult:
    values: np.ndarray
    sup_norm: float
    l2_norm: float
    sqrt_l1_norm: float     # ||phi^(1/2)||_1, used in the Hoelder split


def phi_fn(mesh: TriMesh, lambda1: float, weights: np.ndarray | None = None) -> PhiResult:
    """phi = |X| (|X| - sqrt(n/lambda_1))^2 with its sup, L2 and split norms."""
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    if weights is None:
        weights = measure(mesh).vertex_weights
    r = np.linalg.norm(mesh.positions, axis=1)
    values = r * (r - math.sqrt(N_DIM / lambda1)) ** 2
    sup_norm = float(values.max())
    l2_norm = float(math.sqrt(np.dot(weights, values ** 2)))
    sqrt_l1_norm = float(np.dot(weights, np.sqrt(values)))
    return PhiResult(values=values, sup_norm=sup_norm, l2_norm=l2_norm, sqrt_l1_norm=sqrt_l1_norm)


def lemma_suite(mesh: TriMesh, geom: VertexGeometry, k: int, p: float, lambda1: float,
                tol_disc: float = 0.05) -> dict[str, LemmaCheck]:
    """Evaluate every explicit L2 inequality of the pinching argument.

    Uses the sharpest testable constant C = max(EPS_C, -D). Each entry
    records lhs, rhs, the pass flag at ``tol_disc`` relative slack against
    a per-check magnitude, and whether its positivity hypothesis held.
    The suite never raises on a hypothesis violation.
    """
    _require_normalized(mesh, "lemma_suite")
    w = geom.weight
    x = mesh.positions
    n = N_DIM

    hk = geom.Hk(k)
    hkm1 = geom.Hk(k - 1)
    hk_positive = bool(hk.min() > 0.0)
    int_hkm1 = float(np.dot(w, hkm1))
    norm_hk_sq = lp_norm(mesh, hk, 2.0 * p, weights=w) ** 2
    deficit = lambda1 * int_hkm1 ** 2 - n * norm_hk_sq
    c = max(EPS_C, -deficit)

    x_sq = float(np.dot(w, np.einsum("ij,ij->i", x, x)))
    xt = tangential_projection(mesh, geom)
    xt_sq = float(np.dot(w, np.einsum("ij,ij->i", xt, xt)))
    sup_h = float(np.abs(geom.H).max())

    checks: dict[str, LemmaCheck] = {}

    def record(name, lhs, rhs, scale, hypothesis_ok=True, note="", strict=False):
        slack = 0.0 if strict else tol_disc * scale
        passed = bool(hypothesis_ok and lhs <= rhs + slack)
        checks[name] = LemmaCheck(
            lhs=float(lhs), rhs=float(rhs), passed=passed,
            margin=float(lhs - rhs), scale=float(scale),
            hypothesis_ok=bool(hypothesis_ok), note=note,
        )
        return passed

    gate_rhs = 0.5 * n * norm_hk_sq
    gate_ok = record("pinching_gate", c, gate_rhs, gate_rhs, strict=True,
                     note="C < (n/2) ||H_k||_{2p}^2, hypothesis for the chain below")

    record("x_l2_upper", x_sq, n / lambda1, n / lambda1,
           note="||X||_2^2 <= n / lambda_1 (coordinate test functions)")

    lower = n * lambda1 * int_hkm1 ** 4 / (c + lambda1 * int_hkm1 ** 2) ** 2
    record("x_l2_lower", lower, x_sq, x_sq, hypothesis_ok=gate_ok,
           note="lower L2 bound on the position vector under the gate")

    # Chain n/lambda_1 <= 2 (int H_{k-1})^2 / ||H_k||^2 <= 2 ||H||_inf^{2(k-1)} / ||H_k||^2;
    # both legs must hold, so the recorded pass is their conjunction.
    mid = 2.0 * int_hkm1 ** 2 / norm_hk_sq
    rhs_inv = 2.0 * sup_h ** (2 * (k - 1)) / norm_hk_sq
    leg1 = (n / lambda1) <= mid + tol_disc * abs(mid)
    leg2 = mid <= rhs_inv + tol_disc * abs(rhs_inv)
    record("x_inv_bound", n / lambda1, rhs_inv, abs(rhs_inv), hypothesis_ok=gate_ok,
           note=f"chain through 2 (int H_{{k-1}})^2 / ||H_k||^2 = {mid!r}")
    if not (leg1 and leg2):
        old = checks["x_inv_bound"]
        checks["x_inv_bound"] = LemmaCheck(
            lhs=old.lhs, rhs=old.rhs, passed=False, margin=old.margin,
            scale=old.scale, hypothesis_ok=old.hypothesis_ok, note=old.note,
        )

    record("xt_l2", xt_sq, c * x_sq / (n * norm_hk_sq), x_sq,
           hypothesis_ok=gate_ok,
           note="tangential part: ||X^T||_2^2 <= C ||X||_2^2 / (n ||H_k||_{2p}^2)")

    _, y_sq = field_Y(mesh, geom, k, lambda1)
    record("y_l2", y_sq, n * c, n * n * norm_hk_sq,
           note="||Y||_2^2 <= n C")

    zres = field_Z(mesh, geom, k, lambda1, deficit=deficit)
    z_scale = (n / lambda1) ** 1.5 / int_hkm1 ** 2 * n * norm_hk_sq
    record("z_l2", zres.l2sq, zres.proof_bound, z_scale,
           hypothesis_ok=zres.hypothesis_ok and gate_ok,
           note="||Z||_2^2 <= (n/lambda_1)^{3/2} (int H_{k-1})^{-2} C")

    phi = phi_fn(mesh, lambda1, weights=w)
    holder_rhs = phi.sup_norm ** 0.75 * math.sqrt(phi.sqrt_l1_norm)
    record("phi_holder", phi.l2_norm, holder_rhs, max(holder_rhs, EPS_C),
           note="||phi||_2 <= ||phi||_inf^{3/4} ||phi^{1/2}||_1^{1/2}")

    if not hk_positive:
        # Flag the checks whose derivations need pointwise H_k > 0.
        for name in ("x_l2_lower", "x_inv_bound", "xt_l2", "z_l2"):
            old = checks[name]
            checks[name] = LemmaCheck(
                lhs=old.lhs, rhs=old.rhs, passed=False, margin=old.margin,
                scale=old.scale, hypothesis_ok=False,
                note=old.note + " [H_k > 0 hypothesis violated]",
            )
    return checks


def map_F_distortion(mesh: TriMesh, model: SphereModel) -> float:
    """Max singular-value distortion of the radial map onto the model sphere.

    For each face, the linear map sending its two edge vectors to the
    chords between the F-images of its corners approximates dF; theta* is
    the max over faces and singular values s of |s^2 - 1|.
    """
    x = mesh.positions - model.center
    r = np.linalg.norm(x, axis=1)
    if r.min() < 1e-12:
        raise ValueError("a vertex sits at the model center")
    image = model.center + model.radius * x / r[:, None]

    f = mesh.faces
    e1 = mesh.positions[f[:, 1]] - mesh.positions[f[:, 0]]
    e2 = mesh.positions[f[:, 2]] - mesh.positions[f[:, 0]]
    g1 = image[f[:, 1]] - image[f[:, 0]]
    g2 = image[f[:, 2]] - image[f[:, 0]]

    cross_img = np.cross(g1, g2)
    if (np.linalg.norm(cross_img, axis=1) < 1e-14 * model.radius ** 2).any():
        raise ValueError("degenerate image triangle in the radial map")

    t1 = e1 / np.linalg.norm(e1, axis=1)[:, None]
    e2_t1 = np.einsum("ij,ij->i", e2, t1)
    t2 = e2 - e2_t1[:, None] * t1
    t2 = t2 / np.linalg.norm(t2, axis=1)[:, None]

    # Source edges in the 2D face frame, E = [[|e1|, e2.t1], [0, e2.t2]].
    e11 = np.linalg.norm(e1, axis=1)
    e22 = np.einsum("ij,ij->i", e2, t2)
    det = e11 * e22
    # A = [g1 g2] E^{-1}, columns are images of the frame directions.
    a1 = g1 / e11[:, None]
    a2 = (g2 - e2_t1[:, None] * a1) / e22[:, None]
    A = np.stack([a1, a2], axis=-1)
    s = np.linalg.svd(A, compute_uv=False)
    return float(np.abs(s * s - 1.0).max())


def grosjean_bound_check(mesh: TriMesh, geom: VertexGeometry, lambda1: float,
                         tol_disc: float = 0.05) -> GrosjeanResult:
    """Scalar-curvature eigenvalue bound lambda_1 <= max(Scal) / (n - 1).

    For surfaces Scal = 2 K; positivity of the scalar curvature is the
    hypothesis and its failure is an outcome, not an error.
    """
    scal = N_DIM * (N_DIM - 1) * geom.K
    if scal.min() <= 0.0:
        return GrosjeanResult(bound=float("nan"), passed=False, hypothesis_ok=False)
    bound = float(scal.max() / (N_DIM - 1))
    return GrosjeanResult(bound=bound, passed=bool(lambda1 <= bound * (1.0 + tol_disc)),
                          hypothesis_ok=True)


def almost_einstein_analysis(mesh: TriMesh, geom: VertexGeometry, lambda1: float,
                             samples: int = 2000, tol_disc: float = 0.05) -> EinsteinReport:
    """Curvature-pinching view: on surfaces Ric = K g, so the best Einstein
    constant is k* = (max K + min K)/2 with sup deviation eps = (max-min)/2.

    Builds the target sphere of radius sqrt((n-1)/k*) at the area centroid,
    measures the Hausdorff distance to it, and evaluates the two-sided
    eigenvalue chain n (k* -+ eps)/(n-1); the upper side is asserted with
    slack, the lower (a smooth comparison theorem) is only reported.
    """
    kmax, kmin = float(geom.K.max()), float(geom.K.min())
    kstar = 0.5 * (kmax + kmin)
    eps = 0.5 * (kmax - kmin)
    if kstar <= 0.0:
        return EinsteinReport(
            almost_einstein=False, einstein_constant=kstar, epsilon=eps,
            target_radius=float("nan"), hausdorff=float("nan"), lambda1=lambda1,
            chain_lower=float("nan"), chain_upper=float("nan"),
            upper_pass=False, lower_holds=False,
        )
    target_radius = math.sqrt((N_DIM - 1) / kstar)
    center = measure(mesh).centroid
    model = SphereModel(center=center, radius=target_radius)
    d_h = hausdorff_to_sphere(mesh, model, samples=samples)
    chain_lower = N_DIM * (kstar - eps) / (N_DIM - 1)
    chain_upper = N_DIM * (kstar + eps) / (N_DIM - 1)
    return EinsteinReport(
        almost_einstein=True, einstein_constant=kstar, epsilon=eps,
        target_radius=target_radius, hausdorff=d_h, lambda1=lambda1,
        chain_lower=chain_lower, chain_upper=chain_upper,
        upper_pass=bool(lambda1 <= chain_upper * (1.0 + tol_disc)),
        lower_holds=bool(lambda1 >= chain_lower * (1.0 - tol_disc)),
    )


def full_report(mesh: TriMesh, k: int = 1, p: float = 2.0,
                options: ReportOptions | None = None) -> PinchingReport:
    """Normalize, solve, and evaluate every certificate in one pass."""
    if options is None:
        options = ReportOptions(k=k, p=p)
    validate_mesh(mesh)
    normalized, _, _ = normalize(mesh)
    geom = vertex_geometry(normalized)
    K_mat = assemble_stiffness(normalized)
    M_mat = assemble_mass(normalized, scheme=options.mass_scheme)
    pair = first_eigenpair(K_mat, M_mat, tol=options.solver_tol, seed=options.seed)
    lambda1 = pair.lam

    hk = geom.Hk(k)
    int_hkm1 = float(np.dot(geom.weight, geom.Hk(k - 1)))
    norm_hk = lp_norm(normalized, hk, 2.0 * p, weights=geom.weight)
    deficit = lambda1 * int_hkm1 ** 2 - N_DIM * norm_hk ** 2
    c = max(EPS_C, -deficit)

    model = sphere_model(normalized, lambda1)
    ann = annulus_epsilon(normalized, model)
    den = density_epsilon(normalized, model, samples=options.samples)
    checks = lemma_suite(normalized, geom, k, p, lambda1, tol_disc=options.tol_disc)

    x2 = np.einsum("ij,ij->i", normalized.positions, normalized.positions)
    rayleigh = N_DIM / float(np.dot(geom.weight, x2))

    return PinchingReport(
        k=k, p=p, lambda1=lambda1,
        intHkm1=int_hkm1, normHk2p=norm_hk, deficit=deficit,
        hk_positive=bool(hk.min() > 0.0),
        gate_ok=bool(c < 0.5 * N_DIM * norm_hk ** 2),
        sphere_radius=model.radius,
        annulus_eps_star=ann,
        density_eps_star=den,
        hausdorff=max(ann, den),
        distortion_theta_star=map_F_distortion(normalized, model),
        rayleigh_bound=rayleigh,
        grosjean=grosjean_bound_check(normalized, geom, lambda1, tol_disc=options.tol_disc),
        lemma_checks=checks,
        einstein=almost_einstein_analysis(normalized, geom, lambda1,
                                          samples=options.samples, tol_disc=options.tol_disc),
        mesh_name=mesh.name,
        n_vertices=mesh.n_vertices,
        n_faces=mesh.n_faces,
        options=options,
    )
