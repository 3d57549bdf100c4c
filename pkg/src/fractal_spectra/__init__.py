"""Polyhedral surfaces with gasket-patterned curvature and their spectra."""

__version__ = "0.1.0"

from .btables import (
    AngleTable,
    BTable,
    angles_from_btable,
    b_from_binary,
    boundary_b,
    btable_from_json,
    btable_to_json,
    build_btable,
    make_angle_table,
    verify_theorem_conditions,
)
from .facegeom import (
    FaceLayout,
    FaceNet,
    face_area,
    facenet_to_json,
    layout_face,
    layout_to_csv,
    solve_sidelengths,
)
from .surface import (
    DEFAULT_SCALE,
    SurfaceMesh,
    assemble,
    curvature_audit,
    mesh_from_json,
    mesh_to_json,
    min_angle,
    subdivide,
    total_area,
    validate_surface,
)
from .symmetry import SymmetryAction, build_symmetry_action, generate_group
from .fem import (
    OperatorPair,
    Spectrum,
    assemble_matrices,
    fem_convergence_probe,
    flat_torus_mesh,
    matrix_to_coordinate_text,
    operator_audit,
    solve_lowest,
    torus_eigenvalues,
)
from .analysis import (
    ClusterSet,
    CountingData,
    classify_eigenspace,
    classify_spectrum,
    cluster_multiplicities,
    counting_function,
    export_eigenfunction,
    extrapolate,
    find_motif,
    fit_geometric,
)
from .refdata import load_reference_rows, reference_multiplicities, reference_row

__all__ = [
    "__version__",
    "AngleTable",
    "BTable",
    "ClusterSet",
    "CountingData",
    "DEFAULT_SCALE",
    "FaceLayout",
    "FaceNet",
    "OperatorPair",
    "Spectrum",
    "SurfaceMesh",
    "SymmetryAction",
    "angles_from_btable",
    "assemble",
    "assemble_matrices",
    "b_from_binary",
    "boundary_b",
    "btable_from_json",
    "btable_to_json",
    "build_btable",
    "build_symmetry_action",
    "classify_eigenspace",
    "classify_spectrum",
    "cluster_multiplicities",
    "counting_function",
    "curvature_audit",
    "export_eigenfunction",
    "extrapolate",
    "face_area",
    "facenet_to_json",
    "fem_convergence_probe",
    "find_motif",
    "fit_geometric",
    "flat_torus_mesh",
    "generate_group",
    "layout_face",
    "layout_to_csv",
    "load_reference_rows",
    "make_angle_table",
    "matrix_to_coordinate_text",
    "mesh_from_json",
    "mesh_to_json",
    "min_angle",
    "operator_audit",
    "reference_multiplicities",
    "reference_row",
    "solve_lowest",
    "solve_sidelengths",
    "subdivide",
    "torus_eigenvalues",
    "total_area",
    "validate_surface",
    "verify_theorem_conditions",
]
