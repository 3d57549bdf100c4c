"""Piecewise-linear finite elements on an intrinsic triangle mesh.

The stiffness (energy) matrix uses the cotangent formula and the mass
(Gram) matrix the consistent linear-element integrals; both need only the
triangle side lengths.  The generalized problem K v = lambda M v is solved
densely for small meshes and by shift-invert Lanczos otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .surface import SurfaceMesh, total_area, triangle_angles


class DegenerateElementError(ValueError):
    """A mesh element has a corner angle too small to assemble."""


class EigensolverError(RuntimeError):
    """The iterative eigensolver failed; details in the message."""


MIN_ANGLE = 1e-6  # radians; smaller angles make the cotangent blow up


@dataclass
class OperatorPair:
    """Sparse mass (Gram) and stiffness (energy) matrices."""

    n: int
    mass: sparse.csr_matrix
    stiffness: sparse.csr_matrix


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # (n, k), mass-orthonormal columns
    residuals: np.ndarray
    meta: dict = field(default_factory=dict)


def assemble_matrices(mesh: SurfaceMesh, lumped: bool = False) -> OperatorPair:
    """Assemble mass and stiffness from edge lengths alone.

    For the edge opposite corner k the stiffness contribution is
    -cot(angle_k)/2; diagonals make every row sum to zero.  The consistent
    mass has area/6 on the diagonal and area/12 off it (lumped: area/3).
    """
    angles = triangle_angles(mesh.lengths)
    if angles.min() < MIN_ANGLE:
        t = int(np.unravel_index(np.argmin(angles), angles.shape)[0])
        raise DegenerateElementError(
            f"triangle {t} has angle {angles.min():.2e} rad < {MIN_ANGLE}"
        )
    areas = 0.5 * mesh.lengths[:, 0] * mesh.lengths[:, 1] * np.sin(angles[:, 2])
    n = mesh.n_vertices
    tris = mesh.tris

    rows, cols, vals = [], [], []
    mrows, mcols, mvals = [], [], []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        w = 0.5 / np.tan(angles[:, k])
        vi, vj = tris[:, i], tris[:, j]
        rows += [vi, vj, vi, vj]
        cols += [vj, vi, vi, vj]
        vals += [-w, -w, w, w]
        if not lumped:
            mrows += [vi, vj]
            mcols += [vj, vi]
            mvals += [areas / 12.0, areas / 12.0]
    for k in range(3):
        vk = tris[:, k]
        mrows.append(vk)
        mcols.append(vk)
        mvals.append(areas / (3.0 if lumped else 6.0))

    K = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    )
    M = sparse.csr_matrix(
        (np.concatenate(mvals), (np.concatenate(mrows), np.concatenate(mcols))),
        shape=(n, n),
    )
    return OperatorPair(n, M, K)


def operator_audit(ops: OperatorPair, mesh: SurfaceMesh) -> dict:
    """Row-sum and partition-of-unity checks for an assembled pair."""
    ones = np.ones(ops.n)
    row_sums = ops.stiffness @ ones
    mass_total = float(ones @ (ops.mass @ ones))
    area = total_area(mesh)
    return {
        "max_stiffness_row_sum": float(np.abs(row_sums).max()),
        "mass_total": mass_total,
        "area": area,
        "mass_vs_area_rel": abs(mass_total - area) / area,
    }


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    out = vectors.copy()
    for c in range(out.shape[1]):
        v = out[:, c]
        nz = np.nonzero(np.abs(v) > 1e-10 * np.abs(v).max())[0]
        if len(nz) and v[nz[0]] < 0:
            out[:, c] = -v
    return out


def solve_lowest(ops: OperatorPair, count: int, dense_cutoff: int = 3000,
                 tol: float = 1e-10, residual_bound: float = 1e-8) -> Spectrum:
    """Lowest ``count`` eigenpairs of K v = lambda M v, ascending.

    Eigenvectors come back mass-orthonormal with a deterministic sign
    (first significant component positive).  Small problems are solved
    densely; larger ones by shift-invert Lanczos at a negative shift,
    which keeps the factorized operator positive definite despite the
    constant-vector kernel.
    """
    n = ops.n
    if not 1 <= count < n:
        raise ValueError(f"count must be in [1, {n - 1}], got {count}")

    if n <= dense_cutoff or count > n // 3:
        K = ops.stiffness.toarray()
        M = ops.mass.toarray()
        vals, vecs = eigh(K, M, subset_by_index=[0, count - 1])
        meta = {"solver": "dense", "n": n}
    else:
        # solve past the target and keep a wide Lanczos basis: close
        # clusters (multiplicity 3 is generic here) are easy to miss with
        # the default subspace size
        sigma = -1.0
        k_solve = min(count + max(5, count // 10), n - 1)
        ncv = min(n, max(4 * k_solve + 1, 80))
        v0 = np.cos(np.arange(n) * 0.37) + 1.5  # fixed start, not M-orthogonal to 1
        try:
            vals, vecs = eigsh(
                ops.stiffness, k=k_solve, M=ops.mass, sigma=sigma,
                which="LM", v0=v0, tol=tol, ncv=ncv,
            )
        except ArpackNoConvergence as exc:
            raise EigensolverError(
                f"Lanczos failed to converge: {len(exc.eigenvalues)} of {k_solve} "
                f"eigenvalues converged"
            ) from exc
        except RuntimeError as exc:
            raise EigensolverError(f"factorization failed: {exc}") from exc
        meta = {"solver": "shift-invert", "sigma": sigma, "n": n, "ncv": ncv}

    order = np.argsort(vals, kind="stable")
    vals = np.asarray(vals)[order][:count]
    vecs = np.asarray(vecs)[:, order][:, :count]

    # enforce exact mass-orthonormality (cheap, deterministic)
    G = vecs.T @ (ops.mass @ vecs)
    L = np.linalg.cholesky(G)
    vecs = np.linalg.solve(L, vecs.T).T
    vecs = _canonical_signs(vecs)

    Kv = ops.stiffness @ vecs
    Mv = ops.mass @ vecs
    res = np.linalg.norm(Kv - Mv * vals[None, :], axis=0) / np.linalg.norm(vecs, axis=0)
    worst = float(res.max())
    if worst > residual_bound:
        raise EigensolverError(
            f"worst residual {worst:.2e} exceeds bound {residual_bound:.0e}"
        )
    return Spectrum(vals, vecs, res, meta)


def matrix_to_coordinate_text(matrix: sparse.spmatrix) -> str:
    """Symmetric sparse matrix in 'row col value' lines, 17 digits."""
    coo = matrix.tocoo()
    order = np.lexsort((coo.col, coo.row))
    lines = [
        f"{coo.row[i]} {coo.col[i]} {coo.data[i]:.17g}" for i in order
    ]
    return "\n".join(lines) + "\n"


def flat_torus_mesh(side: float = 1.0, n: int = 8) -> SurfaceMesh:
    """Square torus triangulated with alternating diagonals.

    Eigenvalues of the continuum torus are 4 pi^2 (p^2 + q^2) / side^2;
    the lowest nonzero one has multiplicity 4.  Alternating the diagonal
    direction per square (n must be even) keeps the full square-lattice
    symmetry, so the continuum multiplicities survive discretization.
    """
    if n % 2:
        raise ValueError("n must be even to alternate diagonals periodically")
    h = side / n
    diag = h * math.sqrt(2.0)
    keys = [(0, i, j) for i in range(n) for j in range(n)]

    def vid(i, j):
        return (i % n) * n + (j % n)

    tris = []
    lengths = []
    for i in range(n):
        for j in range(n):
            v00, v10 = vid(i, j), vid(i + 1, j)
            v01, v11 = vid(i, j + 1), vid(i + 1, j + 1)
            if (i + j) % 2 == 0:
                tris.append((v00, v10, v11))
                lengths.append((h, diag, h))
                tris.append((v00, v11, v01))
                lengths.append((h, h, diag))
            else:
                tris.append((v00, v10, v01))
                lengths.append((diag, h, h))
                tris.append((v10, v11, v01))
                lengths.append((h, diag, h))

    xy = np.zeros((len(tris), 3, 2))
    return SurfaceMesh(
        level=-1, depth=0, normalization="torus", scale=side, style="quality",
        keys=keys, roles=["steiner"] * len(keys),
        tris=np.array(tris, dtype=np.int64),
        lengths=np.array(lengths, dtype=float),
        face_of=np.zeros(len(tris), dtype=np.int8),
        xy=xy,
        key_index={k: i for i, k in enumerate(keys)},
    )


def torus_eigenvalues(side: float, count: int) -> np.ndarray:
    """First ``count`` analytic torus eigenvalues (with multiplicity)."""
    vals = []
    B = int(math.isqrt(count)) + 3
    for p in range(-B, B + 1):
        for q in range(-B, B + 1):
            vals.append(4 * math.pi**2 * (p * p + q * q) / side**2)
    return np.sort(np.array(vals))[:count]


def fem_convergence_probe(mesh: SurfaceMesh, depths: list[int], count: int = 10,
                          dense_cutoff: int = 3000) -> dict:
    """Eigenvalue table of one base mesh across subdivision depths.

    Depths must be ascending and start from the base mesh's depth; returns
    the per-depth eigenvalues and their successive differences.
    """
    from .surface import subdivide

    if sorted(depths) != list(depths) or depths[0] < mesh.depth:
        raise ValueError("depths must ascend starting from the base depth")
    table = {}
    current = mesh
    for d in depths:
        while current.depth < d:
            current = subdivide(current)
        ops = assemble_matrices(current)
        table[d] = solve_lowest(ops, count, dense_cutoff=dense_cutoff).eigenvalues
    diffs = {
        (d1, d2): table[d2] - table[d1]
        for d1, d2 in zip(depths[:-1], depths[1:])
    }
    return {"eigenvalues": table, "differences": diffs}
