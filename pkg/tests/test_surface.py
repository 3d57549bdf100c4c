import json
import math

import numpy as np
import pytest

from fractal_spectra.surface import (
    MeshGluingError,
    assemble,
    curvature_audit,
    mesh_from_json,
    mesh_to_json,
    min_angle,
    subdivide,
    total_area,
    validate_surface,
)


def test_octahedron():
    mesh = assemble(0, scale=1.0)
    assert mesh.n_vertices == 6
    assert mesh.n_triangles == 8
    audit = curvature_audit(mesh)
    assert audit.cone_count == 6
    assert np.allclose(audit.deficits, 2 * math.pi / 3, atol=1e-12)
    assert total_area(mesh) == pytest.approx(2 * math.sqrt(3), rel=1e-12)


def test_level1_cone_vertices():
    mesh = assemble(1, scale=1.0)
    audit = curvature_audit(mesh)
    assert audit.cone_count == 18
    cone = [d for d, r in zip(audit.deficits, mesh.roles) if r == "cone"]
    assert np.allclose(cone, 2 * math.pi / 9, atol=1e-12)


@pytest.mark.parametrize("m", range(5))
def test_curvature_theorem(m):
    mesh = assemble(m)
    audit = curvature_audit(mesh)
    assert audit.cone_count == 2 * 3 ** (m + 1)
    assert audit.max_cone_error <= 1e-9
    assert audit.max_flat_deficit <= 1e-9
    assert audit.total == pytest.approx(4 * math.pi, abs=1e-8)


@pytest.mark.parametrize("m,depth", [(0, 2), (1, 2), (2, 2), (3, 1), (4, 1)])
def test_mesh_invariants_with_subdivision(m, depth):
    mesh = assemble(m, subdivision_depth=depth)
    validate_surface(mesh)  # paired edges, equal lengths, Euler 2
    audit = curvature_audit(mesh)
    assert audit.max_cone_error <= 1e-9
    assert audit.max_flat_deficit <= 1e-9


def test_subdivision_preserves_deficit_multiset_and_area():
    base = assemble(2)
    fine = subdivide(subdivide(base))
    a0 = curvature_audit(base)
    a1 = curvature_audit(fine)
    nz0 = np.sort(a0.deficits[np.abs(a0.deficits) > 1e-9])
    nz1 = np.sort(a1.deficits[np.abs(a1.deficits) > 1e-9])
    assert np.allclose(nz0, nz1, atol=1e-9)
    assert total_area(fine) == pytest.approx(total_area(base), rel=1e-12)
    assert fine.n_triangles == 16 * base.n_triangles


def test_level1_total_area_matches_face_oracle():
    from fractal_spectra.btables import make_angle_table
    from fractal_spectra.facegeom import face_area, solve_sidelengths

    net = solve_sidelengths(make_angle_table(1))
    mesh = assemble(1, scale=1.0)
    expected = 4 * face_area(net) + 4 * math.sqrt(3) / 4
    assert total_area(mesh) == pytest.approx(expected, rel=1e-12)


def test_assembly_idempotent():
    a = assemble(2)
    b = assemble(2)
    assert a.keys == b.keys
    assert np.array_equal(a.tris, b.tris)
    assert np.array_equal(a.lengths, b.lengths)


def test_styles_differ_but_both_close():
    ref = assemble(3, style="reference")
    qual = assemble(3, style="quality")
    validate_surface(ref)
    validate_surface(qual)
    assert ref.n_triangles < qual.n_triangles
    assert total_area(ref) == pytest.approx(total_area(qual), rel=1e-12)
    assert min_angle(qual) > min_angle(ref)


def test_unknown_style_rejected():
    with pytest.raises(ValueError):
        assemble(1, style="fancy")


def test_scale_covariance_of_mesh():
    a = assemble(2, scale=1.0)
    b = assemble(2, scale=2.0)
    assert np.allclose(2 * a.lengths, b.lengths, rtol=1e-13)


def test_gluing_error_detected():
    mesh = assemble(1)
    mesh.lengths[0, 0] *= 1 + 1e-6
    with pytest.raises(MeshGluingError):
        validate_surface(mesh)


def test_mesh_json_round_trip():
    mesh = assemble(1)
    data = json.loads(mesh_to_json(mesh))
    assert data["level"] == 1
    assert {v["role"] for v in data["vertices"]} >= {"cone"}
    again = mesh_from_json(mesh_to_json(mesh))
    assert again.n_vertices == mesh.n_vertices
    assert np.allclose(again.lengths, mesh.lengths)
    audit = curvature_audit(again)
    assert audit.max_cone_error <= 1e-9
