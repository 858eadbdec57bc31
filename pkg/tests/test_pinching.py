import json
import math

import numpy as np
import pytest

from pinchlab import (
    Ellipsoid,
    PerturbedSphere,
    SphereModel,
    Torus,
    TriMesh,
    almost_einstein_analysis,
    annulus_epsilon,
    assemble_mass,
    assemble_stiffness,
    density_epsilon,
    field_Y,
    field_Z,
    first_eigenpair,
    full_report,
    generate,
    grosjean_bound_check,
    hausdorff_to_sphere,
    lemma_suite,
    map_F_distortion,
    normalize,
    phi_fn,
    pinching_predicate,
    reilly_deficit,
    sphere_model,
    vertex_geometry,
)
from pinchlab.distance import fibonacci_sphere
from pinchlab.pinching import ReportOptions


# ---------------------------------------------------------------------------
# deficit
# ---------------------------------------------------------------------------

def test_sphere_deficit_near_zero(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    for k, p in ((1, 2.0), (2, 2.0), (1, 3.0)):
        d = reilly_deficit(mesh, geom, k, p, lambda1=lam)
        hk = geom.Hk(k)
        norm_sq = np.dot(geom.weight, np.abs(hk) ** (2 * p)) ** (1.0 / p)
        assert abs(d) <= 0.05 * 2.0 * norm_sq


def test_ellipsoid_deficit_strictly_negative(ellipsoid_norm_state):
    mesh, geom, lam = ellipsoid_norm_state
    d = reilly_deficit(mesh, geom, 1, 2.0, lambda1=lam)
    assert d < 0
    # k = 2 as well on this convex member
    assert reilly_deficit(mesh, geom, 2, 2.0, lambda1=lam) < 0


def test_deficit_requires_normalized(sphere4, sphere4_geom):
    with pytest.raises(ValueError):
        reilly_deficit(sphere4, sphere4_geom, 1, 2.0, lambda1=2.0)


def test_deficit_computes_lambda1_when_missing(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    a = reilly_deficit(mesh, geom, 1, 2.0)
    b = reilly_deficit(mesh, geom, 1, 2.0, lambda1=lam)
    assert a == pytest.approx(b, rel=1e-9)


def test_deficit_small_p_warns(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    with pytest.warns(UserWarning):
        reilly_deficit(mesh, geom, 1, 1.0, lambda1=lam)


def test_pinching_predicate():
    assert pinching_predicate(0.0, 1.0)
    assert not pinching_predicate(-2.0, 1.0)
    with pytest.raises(ValueError):
        pinching_predicate(0.0, -1.0)


# ---------------------------------------------------------------------------
# sphere model, annulus, density, Hausdorff
# ---------------------------------------------------------------------------

def test_sphere_model_radius(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    actual = np.linalg.norm(mesh.positions, axis=1).mean()
    assert model.radius == pytest.approx(actual, rel=0.01)
    assert model.radius == pytest.approx(1.0 / math.sqrt(4 * math.pi), rel=0.01)
    doubled = sphere_model(mesh, 2.0 * lam)
    assert doubled.radius == pytest.approx(model.radius / math.sqrt(2.0), rel=1e-12)
    with pytest.raises(ValueError):
        sphere_model(mesh, 0.0)


def test_sphere_model_radius_inside_ellipsoid_range(ellipsoid_norm_state):
    mesh, _, lam = ellipsoid_norm_state
    model = sphere_model(mesh, lam)
    r = np.linalg.norm(mesh.positions, axis=1)
    assert r.min() < model.radius < r.max()


def test_annulus_sphere(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    assert annulus_epsilon(mesh, model) <= 0.01 * model.radius


def test_annulus_family_monotone(ellipsoid_family_reports):
    eps = [ellipsoid_family_reports[t].annulus_eps_star for t in (0.05, 0.1, 0.2)]
    assert eps[0] < eps[1] < eps[2]


def test_annulus_rejects_uncentered(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    with pytest.raises(ValueError):
        annulus_epsilon(mesh.translated([0.2, 0.0, 0.0]), model)


def test_density_sphere(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    assert density_epsilon(mesh, model, samples=2000) <= 0.02 * model.radius
    with pytest.raises(ValueError):
        density_epsilon(mesh, model, samples=0)


def test_density_family_monotone(ellipsoid_family_reports):
    eps = [ellipsoid_family_reports[t].density_eps_star for t in (0.05, 0.1, 0.2)]
    assert eps[0] < eps[1] < eps[2]


def test_hausdorff_is_max_of_components(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    ann = annulus_epsilon(mesh, model)
    den = density_epsilon(mesh, model, samples=500)
    dh = hausdorff_to_sphere(mesh, model, samples=500)
    assert dh == max(ann, den)
    assert dh >= ann and dh >= den


def test_hausdorff_vs_bruteforce_pointcloud(ellipsoid_norm_state):
    from scipy.spatial import cKDTree

    mesh, _, lam = ellipsoid_norm_state
    model = sphere_model(mesh, lam)
    dh = hausdorff_to_sphere(mesh, model, samples=4000)
    # Independent oracle: two-sided point-cloud Hausdorff on dense samples
    # (barycentric lattice on every face, so the covering error only enters
    # quadratically at the attaining points).
    n = 4
    grid = [
        (i / n, j / n, (n - i - j) / n)
        for i in range(n + 1)
        for j in range(n + 1 - i)
    ]
    bary = np.array(grid)
    tri = mesh.positions[mesh.faces]
    cloud_m = np.einsum("gb,fbd->fgd", bary, tri).reshape(-1, 3)
    cloud_s = fibonacci_sphere(8000, radius=model.radius, center=model.center)
    d_sm = cKDTree(cloud_m).query(cloud_s)[0].max()
    d_ms = cKDTree(cloud_s).query(cloud_m)[0].max()
    brute = max(d_sm, d_ms)
    assert dh == pytest.approx(brute, rel=0.05)


# ---------------------------------------------------------------------------
# fields Y, Z and phi
# ---------------------------------------------------------------------------

def test_field_Y_sphere(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    _, ysq = field_Y(mesh, geom, 1, lam)
    norm_hk_sq = float(np.dot(geom.weight, geom.H ** 4)) ** 0.5
    assert ysq <= 1e-2 * 4.0 * norm_hk_sq


def test_field_Y_lemma_bound(ellipsoid_norm_state):
    mesh, geom, lam = ellipsoid_norm_state
    d = reilly_deficit(mesh, geom, 1, 2.0, lambda1=lam)
    _, ysq = field_Y(mesh, geom, 1, lam)
    norm_hk_sq = float(np.dot(geom.weight, geom.H ** 4)) ** 0.5
    assert ysq <= 2.0 * max(0.0, -d) + 0.05 * 4.0 * norm_hk_sq
    assert ysq > 0.0


def test_field_Z_sphere(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    res = field_Z(mesh, geom, 1, lam)
    assert res.hypothesis_ok
    assert res.l2sq <= 1e-2


def test_field_Z_ellipsoid_bound(ellipsoid_norm_state):
    mesh, geom, lam = ellipsoid_norm_state
    res = field_Z(mesh, geom, 1, lam)
    z_scale = (2.0 / lam) ** 1.5
    assert res.l2sq <= res.proof_bound + 0.05 * z_scale * 10.0
    assert res.hypothesis_ok


def test_field_Z_torus_hypothesis(torus_norm_state):
    mesh, geom, lam = torus_norm_state
    res = field_Z(mesh, geom, 2, lam)
    assert not res.hypothesis_ok


def test_field_Z_origin_on_surface(sphere4):
    shifted = sphere4.translated(-sphere4.positions[0])
    geom = vertex_geometry(shifted)
    with pytest.raises(ValueError, match="origin"):
        field_Z(shifted, geom, 1, 2.0)


def test_phi_sphere(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    res = phi_fn(mesh, lam)
    r = math.sqrt(2.0 / lam)
    assert res.sup_norm <= 1e-3 * r ** 3
    assert res.values.min() >= 0.0


def test_phi_holder_split_everywhere(sphere4_norm_state, ellipsoid_norm_state, torus_norm_state):
    for mesh, _, lam in (sphere4_norm_state, ellipsoid_norm_state, torus_norm_state):
        res = phi_fn(mesh, lam)
        rhs = res.sup_norm ** 0.75 * math.sqrt(res.sqrt_l1_norm)
        assert res.l2_norm <= rhs * (1.0 + 1e-12)
    with pytest.raises(ValueError):
        phi_fn(mesh, -1.0)


# ---------------------------------------------------------------------------
# lemma suite
# ---------------------------------------------------------------------------

def test_lemma_suite_sphere_all_pass(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    checks = lemma_suite(mesh, geom, 1, 2.0, lam)
    assert set(checks) == {
        "pinching_gate", "x_l2_upper", "x_l2_lower", "x_inv_bound",
        "xt_l2", "y_l2", "z_l2", "phi_holder",
    }
    assert all(c.passed for c in checks.values())
    assert all(c.hypothesis_ok for c in checks.values())
    # degenerate equality case: the small lhs entries really are small
    assert checks["xt_l2"].lhs <= 1e-4
    assert checks["y_l2"].lhs <= 1e-2


def test_lemma_suite_ellipsoids_pass():
    for t in (0.05, 0.1, 0.2):
        mesh, _, _ = normalize(generate(Ellipsoid(1, 1, 1 + t), 4))
        geom = vertex_geometry(mesh)
        lam = first_eigenpair(assemble_stiffness(mesh), assemble_mass(mesh)).lam
        checks = lemma_suite(mesh, geom, 1, 2.0, lam)
        assert all(c.passed for c in checks.values()), [
            n for n, c in checks.items() if not c.passed
        ]


def test_lemma_suite_torus_hypothesis_violations(torus_norm_state):
    mesh, geom, lam = torus_norm_state
    checks = lemma_suite(mesh, geom, 2, 2.0, lam)
    flagged = {n for n, c in checks.items() if not c.hypothesis_ok}
    assert {"x_l2_lower", "x_inv_bound", "xt_l2", "z_l2"} <= flagged
    # suite still returns every check
    assert len(checks) == 8


# ---------------------------------------------------------------------------
# distortion, Grosjean, Einstein
# ---------------------------------------------------------------------------

def test_distortion_identity_configuration(sphere4_norm_state):
    mesh, _, lam = sphere4_norm_state
    model = sphere_model(mesh, lam)
    assert map_F_distortion(mesh, model) <= 0.05


def test_distortion_doubled_radius(sphere4):
    r = float(np.linalg.norm(sphere4.positions, axis=1).mean())
    model = SphereModel(center=np.zeros(3), radius=2.0 * r)
    theta = map_F_distortion(sphere4, model)
    assert theta == pytest.approx(3.0, rel=0.05)


def test_distortion_family_monotone(ellipsoid_family_reports):
    thetas = [
        ellipsoid_family_reports[t].distortion_theta_star for t in (0.05, 0.1, 0.2)
    ]
    assert thetas[0] < thetas[1] < thetas[2]


def test_distortion_degenerate_image():
    # Two vertices on one ray from the center collapse to one image point.
    positions = np.array(
        [[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    )
    faces = np.array([[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
    tet = TriMesh(positions, faces)
    model = SphereModel(center=np.zeros(3), radius=1.0)
    with pytest.raises(ValueError, match="degenerate"):
        map_F_distortion(tet, model)
    with pytest.raises(ValueError, match="center"):
        map_F_distortion(tet.translated([-1.0, 0.0, 0.0]), model)


def test_grosjean_sphere_near_equality(sphere4_norm_state):
    mesh, geom, lam = sphere4_norm_state
    res = grosjean_bound_check(mesh, geom, lam)
    assert res.hypothesis_ok and res.passed
    assert lam == pytest.approx(res.bound, rel=0.05)


def test_grosjean_ellipsoid_strict(ellipsoid_norm_state):
    mesh, geom, lam = ellipsoid_norm_state
    res = grosjean_bound_check(mesh, geom, lam)
    assert res.hypothesis_ok and res.passed
    assert lam < res.bound


def test_grosjean_torus_hypothesis(torus_norm_state):
    mesh, geom, lam = torus_norm_state
    res = grosjean_bound_check(mesh, geom, lam)
    assert not res.hypothesis_ok
    assert not res.passed


def test_einstein_sphere(sphere4, sphere4_geom):
    lam = first_eigenpair(assemble_stiffness(sphere4), assemble_mass(sphere4)).lam
    rep = almost_einstein_analysis(sphere4, sphere4_geom, lam)
    assert rep.almost_einstein
    assert rep.einstein_constant == pytest.approx(1.0, rel=0.02)
    assert rep.epsilon <= 0.02
    assert rep.target_radius == pytest.approx(1.0, rel=0.02)
    assert rep.hausdorff <= 0.02 * rep.target_radius
    assert rep.upper_pass and rep.lower_holds


def test_einstein_perturbed_ordering():
    results = {}
    for delta in (0.02, 0.05):
        mesh = generate(PerturbedSphere(2, 0, delta), 4)
        geom = vertex_geometry(mesh)
        lam = first_eigenpair(assemble_stiffness(mesh), assemble_mass(mesh)).lam
        results[delta] = almost_einstein_analysis(mesh, geom, lam)
    assert results[0.02].epsilon < results[0.05].epsilon
    assert results[0.02].hausdorff < results[0.05].hausdorff


def test_einstein_torus_not_einstein(torus3, torus3_geom):
    lam = first_eigenpair(assemble_stiffness(torus3), assemble_mass(torus3)).lam
    rep = almost_einstein_analysis(torus3, torus3_geom, lam)
    assert not rep.almost_einstein
    assert rep.einstein_constant <= 0.0


# ---------------------------------------------------------------------------
# full report
# ---------------------------------------------------------------------------

def test_full_report_sphere(sphere_report4):
    rep = sphere_report4
    assert abs(rep.deficit) <= 0.05 * 2.0 * rep.normHk2p ** 2
    assert all(c.passed for c in rep.lemma_checks.values())
    assert rep.distortion_theta_star <= 0.05
    assert rep.hk_positive and rep.gate_ok
    assert rep.hausdorff <= 0.02 * rep.sphere_radius
    assert rep.lambda1 <= rep.rayleigh_bound * (1 + 1e-9)


def test_full_report_torus_flags():
    rep = full_report(generate(Torus(2.0, 0.5), 2), k=2, p=2.0)
    assert not rep.hk_positive
    assert not rep.grosjean.hypothesis_ok
    assert rep.einstein is not None and not rep.einstein.almost_einstein
    flagged = [n for n, c in rep.lemma_checks.items() if not c.hypothesis_ok]
    assert flagged


def test_full_report_deterministic(sphere3):
    opts = ReportOptions(k=1, p=2.0, samples=600, seed=3)
    a = full_report(sphere3, k=1, p=2.0, options=opts).to_json()
    b = full_report(sphere3, k=1, p=2.0, options=opts).to_json()
    assert a == b
    assert json.loads(a)["lambda1"] > 0


def test_full_report_scale_invariance(sphere3):
    opts = ReportOptions(k=1, p=2.0, samples=400, seed=0)
    base = full_report(sphere3, options=opts)
    fields = (
        "lambda1", "intHkm1", "normHk2p", "deficit", "sphere_radius",
        "annulus_eps_star", "density_eps_star", "hausdorff",
        "distortion_theta_star", "rayleigh_bound",
    )
    for c in (0.1, 10.0):
        other = full_report(sphere3.scaled(c), options=opts)
        for name in fields:
            x, y = getattr(base, name), getattr(other, name)
            assert abs(y - x) <= 1e-6 * max(abs(x), 1e-12), (name, c, x, y)


def test_full_report_json_shape(sphere_report4):
    doc = json.loads(sphere_report4.to_json())
    for key in (
        "mesh", "k", "p", "lambda1", "intHkm1", "normHk2p", "deficit",
        "hk_positive", "gate_ok", "sphere_radius", "annulus_eps_star",
        "density_eps_star", "hausdorff", "distortion_theta_star",
        "rayleigh_bound", "grosjean", "lemma_checks", "einstein", "options",
    ):
        assert key in doc
    assert set(doc["lemma_checks"]) == {
        "pinching_gate", "x_l2_upper", "x_l2_lower", "x_inv_bound",
        "xt_l2", "y_l2", "z_l2", "phi_holder",
    }
    for check in doc["lemma_checks"].values():
        assert {"lhs", "rhs", "passed"} <= set(check)
