"""pinchlab: spectral geometry of closed surface meshes.

Computes the first Laplace eigenvalue and higher-order mean curvatures of
triangulated closed surfaces, and quantifies how close a surface with a
small eigenvalue-pinching deficit is to a round sphere.
"""

__version__ = "0.1.0"

from .curvature import (
    VertexGeometry,
    delta_position_residual,
    hsiung_minkowski_residual,
    integrate,
    lp_norm,
    tangential_projection,
    vertex_geometry,
    write_geometry_csv,
)
from .mesh import (
    Ellipsoid,
    MeshError,
    MeshMeasure,
    MeshParseError,
    MeshValidationError,
    PerturbedSphere,
    Sphere,
    Torus,
    TriMesh,
    generate,
    load_mesh,
    measure,
    normalize,
    save_mesh,
)
from .pinching import (
    EinsteinReport,
    LemmaCheck,
    PinchingReport,
    ReportOptions,
    SphereModel,
    almost_einstein_analysis,
    annulus_epsilon,
    density_epsilon,
    field_Y,
    field_Z,
    full_report,
    grosjean_bound_check,
    hausdorff_to_sphere,
    lemma_suite,
    map_F_distortion,
    phi_fn,
    pinching_predicate,
    reilly_deficit,
    sphere_model,
)
from .spectral import (
    EigenPair,
    SolverError,
    assemble_mass,
    assemble_stiffness,
    first_eigenpair,
    lowest_spectrum,
    rayleigh_upper_bound_coords,
)
from .symfunc import CurvatureTuple, MaclaurinResult, elem_sym, maclaurin_chain, normalized_Hk

__all__ = [
    "__version__",
    "TriMesh", "MeshMeasure", "MeshError", "MeshParseError", "MeshValidationError",
    "Sphere", "Ellipsoid", "PerturbedSphere", "Torus",
    "generate", "load_mesh", "save_mesh", "measure", "normalize",
    "CurvatureTuple", "MaclaurinResult", "elem_sym", "normalized_Hk", "maclaurin_chain",
    "VertexGeometry", "vertex_geometry", "tangential_projection",
    "integrate", "lp_norm", "hsiung_minkowski_residual", "delta_position_residual",
    "write_geometry_csv",
    "EigenPair", "SolverError", "assemble_stiffness", "assemble_mass",
    "first_eigenpair", "lowest_spectrum", "rayleigh_upper_bound_coords",
    "SphereModel", "PinchingReport", "ReportOptions", "LemmaCheck", "EinsteinReport",
    "reilly_deficit", "pinching_predicate", "sphere_model",
    "annulus_epsilon", "density_epsilon", "hausdorff_to_sphere",
    "field_Y", "field_Z", "phi_fn", "lemma_suite",
    "map_F_distortion", "grosjean_bound_check", "almost_einstein_analysis",
    "full_report",
]
