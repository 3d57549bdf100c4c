"""Assembly of the closed polyhedral surface from four gasket faces.

Four alternating octant faces of an octahedron carry the gasket structure;
the other four stay flat (folding only).  Flat faces and every downward
triangle of generation below the finest are triangulated as planar
polygons on a warped uniform grid whose boundary points conform exactly to
the prescribed chain subdivisions.  All identifications are made through
exact integer labels, never coordinate matching.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .btables import make_angle_table
from .facegeom import (
    POLY_EDGES,
    FaceLayout,
    FaceNet,
    chain_vertex_triples,
    corner_triple,
    layout_face,
    solve_sidelengths,
)

SQRT3 = math.sqrt(3.0)

# octants in lexicographic sign order; a face is gasket-carrying when the
# product of its signs is +1, which picks four pairwise non-adjacent octants
OCTANTS = tuple(product((1, -1), repeat=3))
SG_FACES = tuple(i for i, s in enumerate(OCTANTS) if s[0] * s[1] * s[2] == 1)
FLAT_FACES = tuple(i for i, s in enumerate(OCTANTS) if s[0] * s[1] * s[2] == -1)


def vertex_id(axis: int, sign: int) -> int:
    """Octahedron vertex id: +x,-x,+y,-y,+z,-z are 0..5."""
    return 2 * axis + (0 if sign > 0 else 1)


def face_corner_ids(face: int) -> tuple[int, int, int]:
    """Octahedron vertex ids at the three corners (axis order) of a face."""
    s = OCTANTS[face]
    return tuple(vertex_id(axis, s[axis]) for axis in range(3))


class MeshGluingError(ValueError):
    """An identification failed: open edge or mismatched edge lengths."""


@dataclass
class SurfaceMesh:
    """Closed triangulated surface carried by intrinsic edge lengths.

    ``lengths[t, i]`` is the length of the side opposite corner ``i`` of
    triangle ``t``.  ``xy`` holds per-corner positions in the owning
    face's development frame (display only, not part of the metric).
    """

    level: int
    depth: int
    normalization: str
    scale: float
    style: str
    keys: list[tuple]
    roles: list[str]
    tris: np.ndarray
    lengths: np.ndarray
    face_of: np.ndarray
    xy: np.ndarray
    key_index: dict = field(repr=False, default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return len(self.keys)

    @property
    def n_triangles(self) -> int:
        return len(self.tris)


def triangle_angles(lengths: np.ndarray) -> np.ndarray:
    """Corner angles from side lengths; angle i is opposite ``lengths[:, i]``."""
    l0, l1, l2 = lengths[:, 0], lengths[:, 1], lengths[:, 2]
    out = np.empty_like(lengths)
    out[:, 0] = np.arccos(np.clip((l1**2 + l2**2 - l0**2) / (2 * l1 * l2), -1.0, 1.0))
    out[:, 1] = np.arccos(np.clip((l0**2 + l2**2 - l1**2) / (2 * l0 * l2), -1.0, 1.0))
    out[:, 2] = np.pi - out[:, 0] - out[:, 1]
    return out


def triangle_areas(lengths: np.ndarray) -> np.ndarray:
    ang = triangle_angles(lengths)
    return 0.5 * lengths[:, 0] * lengths[:, 1] * np.sin(ang[:, 2])


# ---------------------------------------------------------------------------
# conforming warped grid on an equilateral polygon


def _grid_triples(S: int) -> list[tuple[int, int, int]]:
    return [(a, b, S - a - b) for a in range(S, -1, -1) for b in range(S - a + 1)]


def _grid_triangles(S: int):
    # upward triangles sit over (a, b, c) with a+b+c = S-1, downward over
    # triples with a+b+c = S+1 and all coordinates >= 1
    ups = []
    for a in range(S):
        for b in range(S - a):
            c = S - 1 - a - b
            ups.append(((a + 1, b, c), (a, b + 1, c), (a, b, c + 1)))
    downs = []
    for a in range(1, S):
        for b in range(1, S - a + 1):
            c = S + 1 - a - b
            if c >= 1:
                downs.append(((a - 1, b, c), (a, b - 1, c), (a, b, c - 1)))
    return ups + downs


def warped_grid(r: int, corners: np.ndarray, edge_fracs) -> tuple[list, dict, list]:
    """Uniform 4**r triangulation of a triangle, warped to prescribed edges.

    ``edge_fracs[e]`` gives, for polygon edge ``POLY_EDGES[e] = (i, j)``,
    the monotone cumulative fractions (length 2**r + 1, from 0 to 1) at
    which the grid's edge points must sit along corner i -> corner j.

    Interior points are graded to match: barycentric coordinates are first
    reweighted through the palindromized mean grading of the three edges
    (exact on an edge whose grading is already palindromic), then a
    tangential blend fixes the remaining per-edge deviation.  Element
    quality follows the boundary grading instead of collapsing near
    strongly compressed corners.
    """
    S = 1 << r
    triples = _grid_triples(S)
    knots = np.arange(S + 1) / S
    fracs = [np.asarray(f, dtype=float) for f in edge_fracs]
    for f in fracs:
        if len(f) != S + 1 or f[0] != 0.0 or abs(f[-1] - 1.0) > 1e-12:
            raise ValueError("edge fractions must run from 0 to 1 with 2**r steps")

    phi = sum(0.5 * (f + 1.0 - f[::-1]) for f in fracs) / 3.0

    def phi_at(x: float) -> float:
        return float(np.interp(x, knots, phi))

    tris = _grid_triangles(S)
    coords: dict[tuple[int, int, int], np.ndarray] = {}
    C = [np.asarray(c, dtype=float) for c in corners]
    for trip in triples:
        u = np.array(trip, dtype=float) / S
        w = np.array([phi[trip[0]], phi[trip[1]], phi[trip[2]]])
        w /= w.sum()
        pos = w[0] * C[0] + w[1] * C[1] + w[2] * C[2]
        for e, (i, j) in enumerate(POLY_EDGES):
            s = u[i] + u[j]
            if s == 0.0:
                continue
            t = u[j] / s
            base = phi_at(t) / (phi_at(t) + phi_at(1.0 - t))
            d = float(np.interp(t, knots, fracs[e])) - base
            pos = pos + s * d * (C[j] - C[i])
        coords[trip] = pos

    if S > 2:
        harm = _harmonic_interior(triples, tris, coords)
        if _grid_min_angle(harm, tris) > _grid_min_angle(coords, tris):
            coords = harm
    return triples, coords, tris


def _grid_min_angle(coords, tris) -> float:
    worst = math.pi
    for tri in tris:
        p = [coords[t] for t in tri]
        lens = np.array([[np.linalg.norm(p[2] - p[1]),
                          np.linalg.norm(p[0] - p[2]),
                          np.linalg.norm(p[1] - p[0])]])
        worst = min(worst, float(triangle_angles(lens).min()))
    return worst


def _harmonic_interior(triples, tris, coords):
    """Replace interior grid points with the harmonic extension of the boundary."""
    from scipy.sparse import lil_matrix
    from scipy.sparse.linalg import spsolve

    index = {t: i for i, t in enumerate(triples)}
    interior = [t for t in triples if all(x > 0 for x in t)]
    if not interior:
        return dict(coords)
    int_index = {t: i for i, t in enumerate(interior)}
    neighbors: dict[tuple, set] = {t: set() for t in triples}
    for tri in tris:
        for i in range(3):
            for j in range(3):
                if i != j:
                    neighbors[tri[i]].add(tri[j])

    n = len(interior)
    A = lil_matrix((n, n))
    rhs = np.zeros((n, 2))
    for t in interior:
        i = int_index[t]
        nbrs = neighbors[t]
        A[i, i] = len(nbrs)
        for nb in nbrs:
            if nb in int_index:
                A[i, int_index[nb]] = -1.0
            else:
                rhs[i] += coords[nb]
    sol = spsolve(A.tocsr(), rhs)
    if n == 1:
        sol = sol.reshape(1, 2)
    out = dict(coords)
    for t, i in int_index.items():
        out[t] = sol[i]
    return out


def hub_grid(r: int, corners: np.ndarray, edge_fracs) -> tuple[list, dict, list]:
    """Fan triangulation of the polygon from its centroid, no other interior.

    Keeps only the prescribed boundary points plus one hub vertex; the
    resulting slivers reproduce the coarse element flavour of the
    reference computation's central downward triangles.  The construction
    is label-driven and therefore symmetry-equivariant.
    """
    S = 1 << r
    triples, coords, tris = warped_grid(r, corners, edge_fracs)
    if S < 2:
        return triples, coords, tris
    boundary = [t for t in triples if 0 in t]
    hub = (-1, -1, -1)
    center = sum(np.asarray(c, dtype=float) for c in corners) / 3.0
    out = {t: coords[t] for t in boundary}
    out[hub] = center
    ring = sorted(
        boundary, key=lambda t: math.atan2(out[t][1] - center[1], out[t][0] - center[0])
    )
    fan = [(ring[i], ring[(i + 1) % len(ring)], hub) for i in range(len(ring))]
    return boundary + [hub], out, fan


def polygon_corners_local(L: float) -> np.ndarray:
    return np.array([[0.0, 0.0], [L, 0.0], [L / 2, L * SQRT3 / 2]])


def _rigid_map(src: np.ndarray, dst: np.ndarray):
    """Affine map sending the triangle ``src`` onto ``dst`` (congruent)."""
    A = np.column_stack([src[1] - src[0], src[2] - src[0]])
    B = np.column_stack([dst[1] - dst[0], dst[2] - dst[0]])
    M = B @ np.linalg.inv(A)
    return lambda p: dst[0] + (np.asarray(p) - src[0]) @ M.T


# ---------------------------------------------------------------------------
# assembly


def _chain_fractions(chain) -> tuple[np.ndarray, float]:
    lengths = np.array([seg.length for seg in chain])
    cums = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cums[-1]
    return cums / total, total


def _sg_triple_key(corner_vids, triple, S, face, interior_tag="sg"):
    zeros = [i for i, x in enumerate(triple) if x == 0]
    if len(zeros) == 2:
        j = next(i for i in range(3) if triple[i] != 0)
        return (0, corner_vids[j])
    if len(zeros) == 1:
        j = zeros[0]
        a, b = [i for i in range(3) if i != j]
        va, vb = corner_vids[a], corner_vids[b]
        k = triple[b]
        if va < vb:
            return (1, va, vb, k)
        return (1, vb, va, S - k)
    if interior_tag == "sg":
        return (2, face, triple)
    return (4, face, triple)


_ROLE_OF_TAG = {0: "cone", 1: "cone", 2: "cone", 3: "steiner", 4: "steiner", 5: "midpoint"}


class _MeshBuilder:
    def __init__(self):
        self.tri_keys: list[tuple] = []
        self.tri_lengths: list[tuple] = []
        self.tri_faces: list[int] = []
        self.tri_xy: list[np.ndarray] = []

    def add(self, keys3, lengths3, face, xy3):
        self.tri_keys.append(tuple(keys3))
        self.tri_lengths.append(tuple(float(x) for x in lengths3))
        self.tri_faces.append(face)
        self.tri_xy.append(np.asarray(xy3, dtype=float))


DEFAULT_SCALE = 2.0  # reproduces the reference spectra; see README


def assemble(level: int, subdivision_depth: int = 0, normalization: str = "chain",
             scale: float = DEFAULT_SCALE, style: str = "reference",
             net: FaceNet | None = None, layout: FaceLayout | None = None) -> SurfaceMesh:
    """Build the closed level-``level`` surface as an intrinsic mesh.

    All four gasket faces are instances of one solved face; flat faces are
    equilateral triangles whose side equals the face boundary chain total
    and whose edges carry the induced subdivision points.  Midpoint
    subdivision (exact, 4-to-1) is applied ``subdivision_depth`` times.

    ``style`` picks the interior triangulation of the downward polygons:
    "reference" fans the central polygon of each face from a hub vertex,
    matching the coarse discretization behind the published level tables;
    "quality" uses the graded interior grid everywhere.
    """
    if style not in ("reference", "quality"):
        raise ValueError(f"unknown style {style!r}")
    if net is None:
        net = solve_sidelengths(make_angle_table(level), normalization, scale)
    if layout is None:
        layout = layout_face(net)
    m = net.level
    S = 1 << m

    boundary_fracs, boundary_total = _chain_fractions(net.boundary[2])
    for j in (0, 1):
        fr, tot = _chain_fractions(net.boundary[j])
        if abs(tot - boundary_total) > 1e-10 * boundary_total or np.max(np.abs(fr - boundary_fracs)) > 1e-10:
            raise MeshGluingError("boundary sides are not congruent")

    # fractions per octahedron edge, oriented from the lower vertex id;
    # every edge belongs to exactly one gasket face
    edge_fracs: dict[tuple[int, int], np.ndarray] = {}
    for f in SG_FACES:
        vids = face_corner_ids(f)
        for j in range(3):
            a, b = [i for i in range(3) if i != j]
            va, vb = vids[a], vids[b]
            fr = boundary_fracs if va < vb else 1.0 - boundary_fracs[::-1]
            key = (min(va, vb), max(va, vb))
            if key in edge_fracs:
                raise MeshGluingError(f"octahedron edge {key} claimed twice")
            edge_fracs[key] = fr

    builder = _MeshBuilder()

    for f in SG_FACES:
        vids = face_corner_ids(f)
        for leaf, geom in net.upward.items():
            keys = [
                _sg_triple_key(vids, corner_triple(leaf, j, m), S, f)
                for j in range(3)
            ]
            builder.add(keys, geom.sides, f, layout.leaf_xy[leaf])
        for cell, d in net.downward.items():
            r = m - len(cell) - 1
            Sr = 1 << r
            fracs = []
            chain_triples = []
            for chain in d.chains:
                fr, tot = _chain_fractions(chain)
                if abs(tot - d.side) > 1e-10 * d.side:
                    raise MeshGluingError(f"chain total mismatch at cell {cell}")
                fracs.append(fr)
                chain_triples.append(chain_vertex_triples(chain, m))
            corners_local = polygon_corners_local(d.side)
            gridder = hub_grid if (style == "reference" and cell == ()) else warped_grid
            triples, coords, grid_tris = gridder(r, corners_local, fracs)
            to_net = _rigid_map(corners_local, layout.poly_xy[cell])

            def poly_key(trip):
                zeros = [i for i, x in enumerate(trip) if x == 0]
                if len(zeros) >= 1:
                    # on a polygon edge: translate to the face-level triple
                    if len(zeros) == 2:
                        corner = next(i for i in range(3) if trip[i] != 0)
                        # polygon corner c is shared by two edges; use any
                        e = next(e for e, pair in enumerate(POLY_EDGES) if corner in pair)
                        idx = 0 if POLY_EDGES[e][0] == corner else Sr
                        face_triple = chain_triples[e][idx]
                    else:
                        e = next(
                            e for e, pair in enumerate(POLY_EDGES) if zeros[0] not in pair
                        )
                        i, j = POLY_EDGES[e]
                        face_triple = chain_triples[e][trip[j]]
                    return _sg_triple_key(vids, face_triple, S, f)
                return (3, f, cell, trip)

            key_of = {trip: poly_key(trip) for trip in triples}
            for tri in grid_tris:
                pts = [coords[t] for t in tri]
                lens = [
                    float(np.linalg.norm(pts[(i + 2) % 3] - pts[(i + 1) % 3]))
                    for i in range(3)
                ]
                builder.add(
                    [key_of[t] for t in tri], lens, f, np.array([to_net(p) for p in pts])
                )

    for f in FLAT_FACES:
        vids = face_corner_ids(f)
        L = boundary_total
        corners_local = polygon_corners_local(L)
        fracs = []
        for i, j in POLY_EDGES:
            va, vb = vids[i], vids[j]
            fr = edge_fracs[(min(va, vb), max(va, vb))]
            fracs.append(fr if va < vb else 1.0 - fr[::-1])
        triples, coords, grid_tris = warped_grid(m, corners_local, fracs)
        key_of = {
            trip: _sg_triple_key(vids, trip, S, f, interior_tag="fl") for trip in triples
        }
        for tri in grid_tris:
            pts = [coords[t] for t in tri]
            lens = [
                float(np.linalg.norm(pts[(i + 2) % 3] - pts[(i + 1) % 3]))
                for i in range(3)
            ]
            builder.add([key_of[t] for t in tri], lens, f, np.array(pts))

    keys = sorted(set(k for tri in builder.tri_keys for k in tri))
    key_index = {k: i for i, k in enumerate(keys)}
    tris = np.array([[key_index[k] for k in tri] for tri in builder.tri_keys], dtype=np.int64)
    lengths = np.array(builder.tri_lengths, dtype=float)
    roles = [_ROLE_OF_TAG[k[0]] for k in keys]

    mesh = SurfaceMesh(
        level=level,
        depth=0,
        normalization=normalization,
        scale=scale,
        style=style,
        keys=keys,
        roles=roles,
        tris=tris,
        lengths=lengths,
        face_of=np.array(builder.tri_faces, dtype=np.int8),
        xy=np.array(builder.tri_xy, dtype=float),
        key_index=key_index,
    )
    validate_surface(mesh)
    for _ in range(subdivision_depth):
        mesh = subdivide(mesh)
    return mesh


def validate_surface(mesh: SurfaceMesh, rel_tol: float = 1e-10) -> None:
    """Closed-surface checks: paired edges, matching lengths, Euler 2."""
    edge_count: dict[tuple[int, int], int] = {}
    edge_len: dict[tuple[int, int], float] = {}
    for t in range(mesh.n_triangles):
        v = mesh.tris[t]
        for i in range(3):
            a, b = v[(i + 1) % 3], v[(i + 2) % 3]
            e = (min(a, b), max(a, b))
            L = mesh.lengths[t, i]
            if e in edge_len:
                if abs(edge_len[e] - L) > rel_tol * max(edge_len[e], L):
                    raise MeshGluingError(
                        f"edge {e}: lengths {edge_len[e]} vs {L} disagree"
                    )
            else:
                edge_len[e] = L
            edge_count[e] = edge_count.get(e, 0) + 1
    bad = [e for e, c in edge_count.items() if c != 2]
    if bad:
        raise MeshGluingError(f"{len(bad)} edges not shared by exactly 2 triangles, e.g. {bad[0]}")
    V, E, F = mesh.n_vertices, len(edge_count), mesh.n_triangles
    if V - E + F != 2:
        raise MeshGluingError(f"Euler characteristic {V - E + F} != 2")


def subdivide(mesh: SurfaceMesh) -> SurfaceMesh:
    """Exact midpoint 4-to-1 refinement: child sides are half the parent's."""
    depth = mesh.depth + 1
    keys = list(mesh.keys)
    roles = list(mesh.roles)
    mid_index: dict[tuple[int, int], int] = {}

    def midpoint(a: int, b: int) -> int:
        e = (min(a, b), max(a, b))
        idx = mid_index.get(e)
        if idx is None:
            keys.append((5, depth, e[0], e[1]))
            roles.append("midpoint")
            idx = len(keys) - 1
            mid_index[e] = idx
        return idx

    tris = []
    lengths = []
    faces = []
    xys = []
    for t in range(mesh.n_triangles):
        v0, v1, v2 = (int(x) for x in mesh.tris[t])
        l0, l1, l2 = mesh.lengths[t]
        m01, m02, m12 = midpoint(v0, v1), midpoint(v0, v2), midpoint(v1, v2)
        p = mesh.xy[t]
        p01, p02, p12 = (p[0] + p[1]) / 2, (p[0] + p[2]) / 2, (p[1] + p[2]) / 2
        half = (l0 / 2, l1 / 2, l2 / 2)
        for corners, xy in (
            ((v0, m01, m02), (p[0], p01, p02)),
            ((m01, v1, m12), (p01, p[1], p12)),
            ((m02, m12, v2), (p02, p12, p[2])),
            ((m12, m02, m01), (p12, p02, p01)),
        ):
            tris.append(corners)
            lengths.append(half)
            faces.append(mesh.face_of[t])
            xys.append(np.array(xy))

    return SurfaceMesh(
        level=mesh.level,
        depth=depth,
        normalization=mesh.normalization,
        scale=mesh.scale,
        style=mesh.style,
        keys=keys,
        roles=roles,
        tris=np.array(tris, dtype=np.int64),
        lengths=np.array(lengths, dtype=float),
        face_of=np.array(faces, dtype=np.int8),
        xy=np.array(xys, dtype=float),
        key_index={k: i for i, k in enumerate(keys)},
    )


@dataclass
class CurvatureAudit:
    deficits: np.ndarray
    roles: list[str]
    cone_count: int
    expected_deficit: float
    max_cone_error: float
    max_flat_deficit: float
    total: float

    @property
    def passed(self) -> bool:
        return self.max_cone_error <= 1e-9 and self.max_flat_deficit <= 1e-9


def curvature_audit(mesh: SurfaceMesh) -> CurvatureAudit:
    """Angle deficit 2*pi - (incident angle sum) at every vertex."""
    angles = triangle_angles(mesh.lengths)
    sums = np.zeros(mesh.n_vertices)
    np.add.at(sums, mesh.tris.ravel(), angles.ravel())
    deficits = 2 * np.pi - sums
    cone = np.array([r == "cone" for r in mesh.roles])
    expected = 2 * np.pi / 3 ** (mesh.level + 1)
    max_cone_error = float(np.max(np.abs(deficits[cone] - expected))) if cone.any() else 0.0
    max_flat = float(np.max(np.abs(deficits[~cone]))) if (~cone).any() else 0.0
    return CurvatureAudit(
        deficits=deficits,
        roles=mesh.roles,
        cone_count=int(cone.sum()),
        expected_deficit=expected,
        max_cone_error=max_cone_error,
        max_flat_deficit=max_flat,
        total=float(deficits.sum()),
    )


def total_area(mesh: SurfaceMesh) -> float:
    return float(triangle_areas(mesh.lengths).sum())


def min_angle(mesh: SurfaceMesh) -> float:
    return float(triangle_angles(mesh.lengths).min())


def mesh_to_json(mesh: SurfaceMesh) -> str:
    data = {
        "level": mesh.level,
        "depth": mesh.depth,
        "normalization": mesh.normalization,
        "scale": mesh.scale,
        "style": mesh.style,
        "vertices": [
            {"id": i, "role": r} for i, r in enumerate(mesh.roles)
        ],
        "triangles": [
            {"v": [int(a) for a in mesh.tris[t]],
             "len": [float(x) for x in mesh.lengths[t]]}
            for t in range(mesh.n_triangles)
        ],
    }
    return json.dumps(data)


def mesh_from_json(text: str) -> SurfaceMesh:
    """Rebuild a mesh from the exchange format (geometry only, no frames)."""
    data = json.loads(text)
    tris = np.array([t["v"] for t in data["triangles"]], dtype=np.int64)
    lengths = np.array([t["len"] for t in data["triangles"]], dtype=float)
    n = len(data["vertices"])
    roles = [v["role"] for v in data["vertices"]]
    return SurfaceMesh(
        level=int(data["level"]),
        depth=int(data["depth"]),
        normalization=data["normalization"],
        scale=float(data.get("scale", 1.0)),
        style=data.get("style", "reference"),
        keys=[(9, i) for i in range(n)],
        roles=roles,
        tris=tris,
        lengths=lengths,
        face_of=np.zeros(len(tris), dtype=np.int8),
        xy=np.zeros((len(tris), 3, 2)),
        key_index={},
    )
