import numpy as np
import pytest

from pinchlab import (
    Ellipsoid,
    Sphere,
    Torus,
    assemble_mass,
    assemble_stiffness,
    first_eigenpair,
    full_report,
    generate,
    normalize,
    vertex_geometry,
)


@pytest.fixture(scope="session")
def sphere4():
    return generate(Sphere(1.0), 4)


@pytest.fixture(scope="session")
def sphere3():
    return generate(Sphere(1.0), 3)


@pytest.fixture(scope="session")
def sphere5():
    return generate(Sphere(1.0), 5)


@pytest.fixture(scope="session")
def torus3():
    return generate(Torus(2.0, 0.5), 3)


@pytest.fixture(scope="session")
def ellipsoid12_4():
    return generate(Ellipsoid(1.0, 1.0, 1.2), 4)


@pytest.fixture(scope="session")
def sphere4_geom(sphere4):
    return vertex_geometry(sphere4)


@pytest.fixture(scope="session")
def torus3_geom(torus3):
    return vertex_geometry(torus3)


@pytest.fixture(scope="session")
def sphere4_normalized(sphere4):
    mesh, _, _ = normalize(sphere4)
    return mesh


@pytest.fixture(scope="session")
def sphere4_norm_state(sphere4_normalized):
    """Normalized unit sphere with geometry and lambda_1, shared across tests."""
    geom = vertex_geometry(sphere4_normalized)
    lam = first_eigenpair(
        assemble_stiffness(sphere4_normalized), assemble_mass(sphere4_normalized)
    ).lam
    return sphere4_normalized, geom, lam


@pytest.fixture(scope="session")
def ellipsoid_norm_state():
    """Normalized Ellipsoid(1,1,1.2) with geometry and lambda_1."""
    mesh, _, _ = normalize(generate(Ellipsoid(1.0, 1.0, 1.2), 4))
    geom = vertex_geometry(mesh)
    lam = first_eigenpair(assemble_stiffness(mesh), assemble_mass(mesh)).lam
    return mesh, geom, lam


@pytest.fixture(scope="session")
def torus_norm_state(torus3):
    mesh, _, _ = normalize(torus3)
    geom = vertex_geometry(mesh)
    lam = first_eigenpair(assemble_stiffness(mesh), assemble_mass(mesh)).lam
    return mesh, geom, lam


@pytest.fixture(scope="session")
def ellipsoid_family_reports():
    """full_report over the ellipsoid family t in {0.05, 0.1, 0.2} at subdiv 4."""
    out = {}
    for t in (0.05, 0.1, 0.2):
        out[t] = full_report(generate(Ellipsoid(1.0, 1.0, 1.0 + t), 4), k=1, p=2.0)
    return out


@pytest.fixture(scope="session")
def sphere_report4(sphere4):
    return full_report(sphere4, k=1, p=2.0)


def rng(seed=0):
    return np.random.default_rng(seed)
