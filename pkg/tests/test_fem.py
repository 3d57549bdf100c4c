import math

import numpy as np
import pytest

from fractal_spectra.fem import (
    DegenerateElementError,
    assemble_matrices,
    fem_convergence_probe,
    flat_torus_mesh,
    matrix_to_coordinate_text,
    operator_audit,
    solve_lowest,
    torus_eigenvalues,
)
from fractal_spectra.surface import SurfaceMesh, assemble, subdivide, total_area


def _single_triangle(lengths):
    return SurfaceMesh(
        level=-1, depth=0, normalization="test", scale=1.0, style="quality",
        keys=[(0, i) for i in range(3)], roles=["cone"] * 3,
        tris=np.array([[0, 1, 2], [0, 2, 1]]),
        lengths=np.array([lengths, lengths]),
        face_of=np.zeros(2, dtype=np.int8),
        xy=np.zeros((2, 3, 2)),
        key_index={},
    )


def test_unit_equilateral_element():
    # doubled triangle (a pillow) so each element appears once per side
    mesh = _single_triangle((1.0, 1.0, 1.0))
    ops = assemble_matrices(mesh)
    K = ops.stiffness.toarray() / 2  # two identical elements
    M = ops.mass.toarray() / 2
    assert K[0, 1] == pytest.approx(-1 / (2 * math.sqrt(3)), rel=1e-14)
    assert K[0, 0] == pytest.approx(1 / math.sqrt(3), rel=1e-14)
    assert M[0, 0] == pytest.approx(math.sqrt(3) / 24, rel=1e-14)
    assert M[0, 1] == pytest.approx(math.sqrt(3) / 48, rel=1e-14)


def test_lumped_mass_option():
    mesh = _single_triangle((1.0, 1.0, 1.0))
    ops = assemble_matrices(mesh, lumped=True)
    M = ops.mass.toarray()
    assert np.count_nonzero(M - np.diag(np.diagonal(M))) == 0
    assert M.sum() == pytest.approx(2 * math.sqrt(3) / 4, rel=1e-14)


def test_degenerate_element_rejected():
    mesh = _single_triangle((1.0, 1.0, 2.0 - 1e-15))
    with pytest.raises(DegenerateElementError):
        assemble_matrices(mesh)


def test_operator_invariants(level4_mesh, level4_ops):
    audit = operator_audit(level4_ops, level4_mesh)
    assert audit["max_stiffness_row_sum"] <= 1e-10
    assert audit["mass_vs_area_rel"] <= 1e-10
    const = np.ones(level4_ops.n)
    assert np.abs(level4_ops.stiffness @ const).max() <= 1e-10
    quad = const @ (level4_ops.mass @ const)
    assert quad == pytest.approx(total_area(level4_mesh), rel=1e-10)


def test_constant_mode_and_residuals(level2_spectrum):
    spec = level2_spectrum
    assert abs(spec.eigenvalues[0]) <= 1e-8
    v0 = spec.eigenvectors[:, 0]
    assert np.std(v0) / np.abs(v0).mean() <= 1e-6
    assert spec.residuals.max() <= 1e-8
    # mass-orthonormality enforced
    assert spec.eigenvalues[1] > 1e-3


def test_torus_oracle_moderate():
    mesh = flat_torus_mesh(1.0, 16)
    for _ in range(1):
        mesh = subdivide(mesh)
    spec = solve_lowest(assemble_matrices(mesh), 11, dense_cutoff=2000)
    exact = torus_eigenvalues(1.0, 11)
    rel = np.abs(spec.eigenvalues[1:] - exact[1:]) / exact[1:]
    assert rel.max() < 0.05


def test_torus_scale_dependence():
    big = flat_torus_mesh(2.0, 8)
    small = flat_torus_mesh(1.0, 8)
    sb = solve_lowest(assemble_matrices(big), 5)
    ss = solve_lowest(assemble_matrices(small), 5)
    assert np.allclose(sb.eigenvalues[1:] * 4, ss.eigenvalues[1:], rtol=1e-8)


def test_convergence_probe_quartering():
    mesh = flat_torus_mesh(1.0, 8)
    probe = fem_convergence_probe(mesh, [0, 1, 2], count=5, dense_cutoff=2000)
    exact = torus_eigenvalues(1.0, 5)
    errs = {
        d: np.abs(vals[1:] - exact[1:]) for d, vals in probe["eigenvalues"].items()
    }
    ratio01 = errs[0] / errs[1]
    ratio12 = errs[1] / errs[2]
    assert np.all(ratio01 > 2.5) and np.all(ratio01 < 6.5)
    assert np.all(ratio12 > 2.5) and np.all(ratio12 < 6.5)
    for d, vals in probe["eigenvalues"].items():
        assert abs(vals[0]) <= 1e-8


def test_monotone_under_subdivision():
    base = assemble(1)
    fine = subdivide(base)
    lb = solve_lowest(assemble_matrices(base), 12).eigenvalues
    lf = solve_lowest(assemble_matrices(fine), 12).eigenvalues
    assert np.all(lf <= lb + 1e-9)


def test_relabeling_invariance():
    mesh = assemble(1)
    rng = np.random.default_rng(7)
    perm = rng.permutation(mesh.n_vertices)
    relabeled = SurfaceMesh(
        level=mesh.level, depth=mesh.depth, normalization=mesh.normalization,
        scale=mesh.scale, style=mesh.style,
        keys=[mesh.keys[i] for i in np.argsort(perm)],
        roles=[mesh.roles[i] for i in np.argsort(perm)],
        tris=perm[mesh.tris], lengths=mesh.lengths.copy(),
        face_of=mesh.face_of.copy(), xy=mesh.xy.copy(), key_index={},
    )
    a = solve_lowest(assemble_matrices(mesh), 10).eigenvalues
    b = solve_lowest(assemble_matrices(relabeled), 10).eigenvalues
    assert np.allclose(a, b, rtol=1e-8, atol=1e-10)


def test_eigenvalue_scaling_law():
    a = solve_lowest(assemble_matrices(assemble(1, scale=1.0)), 8).eigenvalues
    b = solve_lowest(assemble_matrices(assemble(1, scale=3.0)), 8).eigenvalues
    assert np.allclose(a[1:], 9 * b[1:], rtol=1e-8)


def test_symmetry_invariant_eigenspaces(level2_mesh, level2_ops, level2_spectrum):
    from fractal_spectra.analysis import cluster_multiplicities
    from fractal_spectra.symmetry import build_symmetry_action

    action = build_symmetry_action(level2_mesh, check=False)
    spec = level2_spectrum
    clusters = cluster_multiplicities(spec.eigenvalues)
    M = level2_ops.mass
    for c in clusters.clusters[:10]:
        V = spec.eigenvectors[:, c.start : c.end + 1]
        for gi in range(24):
            perm = action.permutations[gi]
            PV = np.empty_like(V)
            PV[perm, :] = V
            # projection of the permuted basis back onto the eigenspace
            C = V.T @ (M @ PV)
            resid = np.linalg.norm(PV - V @ C)
            assert resid <= 1e-6


def test_count_validation():
    ops = assemble_matrices(assemble(0))
    with pytest.raises(ValueError):
        solve_lowest(ops, 0)
    with pytest.raises(ValueError):
        solve_lowest(ops, 6)


def test_matrix_export_format(level2_ops):
    text = matrix_to_coordinate_text(level2_ops.stiffness)
    line = text.splitlines()[0].split()
    assert len(line) == 3
    int(line[0]), int(line[1]), float(line[2])
    # 17 significant digits requested
    assert any(len(l.split()[2].replace("-", "").replace(".", "")) >= 16
               for l in text.splitlines()[:50])
