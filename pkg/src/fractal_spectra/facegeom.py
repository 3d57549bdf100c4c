"""Side lengths, areas and planar development of one gasket face.

A level-``m`` face consists of ``3**m`` upward triangles with angles taken
from the corner-weight table, interleaved with flat equilateral downward
triangles (one per cell of every coarser level).  The downward triangle in
cell ``w`` is bounded by three straight chains of upward-triangle sides;
forcing the three chain sums equal fixes every length up to one global
scale, which is pinned by the boundary normalization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from .btables import DIGITS, AngleTable, Word

# downward-triangle corners are the three cell-edge midpoints; we order
# them [M01, M02, M12] and list polygon edges by corner-index pairs
POLY_EDGES = ((0, 1), (0, 2), (1, 2))

# polygon edge k runs along the side-i chain of child i
_EDGE_CHILD = (0, 1, 2)


@dataclass(frozen=True)
class ChainSegment:
    """One upward-triangle side lying on a straight chain."""

    leaf: Word
    side: int
    length: float


Chain = tuple[ChainSegment, ...]


@dataclass(frozen=True)
class TriangleGeom:
    word: Word
    angles: tuple[float, float, float]
    sides: tuple[float, float, float]  # sides[i] opposite corner i
    area: float


@dataclass(frozen=True)
class DownwardTri:
    """Flat equilateral downward triangle of one cell, with its edge chains."""

    cell: Word
    side: float
    chains: tuple[Chain, Chain, Chain]  # edges in POLY_EDGES order

    @property
    def generation(self) -> int:
        return len(self.cell) + 1


@dataclass
class FaceNet:
    level: int
    normalization: str
    scale: float
    upward: dict[Word, TriangleGeom]
    downward: dict[Word, DownwardTri]
    boundary: tuple[Chain, Chain, Chain]  # side j of the face, j = 0, 1, 2


class FaceConsistencyError(ValueError):
    """The solved lengths violate an internal consistency check."""


def _chain_scaled(chain: list[ChainSegment], s: float) -> list[ChainSegment]:
    if s == 1.0:
        return chain
    return [ChainSegment(c.leaf, c.side, c.length * s) for c in chain]


def _solve_cell(w: Word, m: int, angles: AngleTable,
                ratios: dict[Word, tuple[float, float, float]],
                locals_: dict[Word, tuple[float, list, list, list]],
                ) -> list[list[ChainSegment]]:
    """Chains of cell ``w`` (sides 0,1,2) in the cell's own unit scale.

    Side j is ordered from the smaller to the larger of the two corner
    indices != j.  Per cell the relative child scales and the downward
    triangle data (in cell units) are recorded; absolute factors are
    resolved in a second, top-down pass.
    """
    if len(w) == m:
        return [[ChainSegment(w, j, math.sin(angles.angle(w, j)))] for j in range(3)]

    child_chains = [_solve_cell(w + (i,), m, angles, ratios, locals_) for i in range(3)]
    # the downward triangle's edge along child i is child i's side-i chain;
    # equal edge lengths fix the relative child scales
    edge_len = [sum(seg.length for seg in child_chains[i][i]) for i in range(3)]
    s = (1.0, edge_len[0] / edge_len[1], edge_len[0] / edge_len[2])
    ratios[w] = s

    chains = []
    for j in range(3):
        a, b = [i for i in range(3) if i != j]
        chains.append(
            _chain_scaled(child_chains[a][j], s[a]) + _chain_scaled(child_chains[b][j], s[b])
        )
    locals_[w] = (
        edge_len[0],
        child_chains[0][0],
        _chain_scaled(child_chains[1][1], s[1]),
        _chain_scaled(child_chains[2][2], s[2]),
    )
    return chains


def chain_chord(lengths: list[float], turn: float) -> float:
    """Straight distance spanned by a chain that turns by ``turn`` per joint."""
    pos = 0.0 + 0.0j
    heading = 0.0
    for L in lengths:
        pos += L * complex(math.cos(heading), math.sin(heading))
        heading += turn
    return abs(pos)


def solve_sidelengths(angles: AngleTable, normalization: str = "chain",
                      scale: float = 1.0) -> FaceNet:
    """Solve all side lengths of one face from its angle table.

    Chain normalization sets the summed length of the boundary chain
    between face corners 0 and 1 to ``scale``; straight normalization sets
    the developed straight-line distance between those corners instead.
    """
    if normalization not in ("chain", "straight"):
        raise ValueError(f"unknown normalization {normalization!r}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    m = angles.level

    if m == 0:
        geom = TriangleGeom(
            (), (math.pi / 3,) * 3, (scale,) * 3, math.sqrt(3) / 4 * scale**2
        )
        boundary = tuple((ChainSegment((), j, scale),) for j in range(3))
        return FaceNet(0, normalization, scale, {(): geom}, {}, boundary)

    ratios: dict[Word, tuple[float, float, float]] = {}
    locals_: dict[Word, tuple[float, list, list, list]] = {}
    root_chains = _solve_cell((), m, angles, ratios, locals_)

    boundary_len = sum(seg.length for seg in root_chains[2])
    if normalization == "chain":
        factor = scale / boundary_len
    else:
        turn = 2 * math.pi / 3 ** (m + 1)
        chord = chain_chord([seg.length for seg in root_chains[2]], turn)
        factor = scale / chord

    # resolve absolute scale factors top-down
    abs_factor: dict[Word, float] = {(): factor}
    for k in range(m):
        for cell in list(abs_factor):
            if len(cell) != k:
                continue
            s = ratios[cell]
            for i in range(3):
                abs_factor[cell + (i,)] = abs_factor[cell] * s[i]

    upward: dict[Word, TriangleGeom] = {}
    for leaf in product(DIGITS, repeat=m):
        t = abs_factor[leaf]
        a = tuple(angles.angle(leaf, j) for j in range(3))
        sides = tuple(t * math.sin(a[j]) for j in range(3))
        area = 0.5 * sides[0] * sides[1] * math.sin(a[2])
        upward[leaf] = TriangleGeom(leaf, a, sides, area)

    downward: dict[Word, DownwardTri] = {}
    for cell, (side, *chains) in locals_.items():
        f = abs_factor[cell]
        downward[cell] = DownwardTri(
            cell,
            side * f,
            tuple(tuple(_chain_scaled(c, f)) for c in chains),
        )

    boundary = tuple(tuple(_chain_scaled(c, factor)) for c in root_chains)
    net = FaceNet(m, normalization, scale, upward, downward, boundary)
    _audit_facenet(net)
    return net


def _audit_facenet(net: FaceNet, rel_tol: float = 1e-9) -> None:
    for geom in net.upward.values():
        ratios = [geom.sides[j] / math.sin(geom.angles[j]) for j in range(3)]
        if max(ratios) - min(ratios) > rel_tol * max(ratios):
            raise FaceConsistencyError(f"sine-rule spread at leaf {geom.word}")
    for d in net.downward.values():
        sums = [sum(seg.length for seg in c) for c in d.chains]
        if max(sums) - min(sums) > rel_tol * max(sums):
            raise FaceConsistencyError(f"unequal downward chains at cell {d.cell}")
        if abs(sums[0] - d.side) > rel_tol * d.side:
            raise FaceConsistencyError(f"downward side mismatch at cell {d.cell}")
    totals = [sum(seg.length for seg in c) for c in net.boundary]
    if max(totals) - min(totals) > rel_tol * max(totals):
        raise FaceConsistencyError("boundary sides have unequal lengths")


def face_area(net: FaceNet) -> float:
    """Total area of one face: upward triangles plus flat downward fill."""
    up = sum(g.area for g in net.upward.values())
    down = sum(math.sqrt(3) / 4 * d.side**2 for d in net.downward.values())
    return up + down


def corner_point(leaf: Word, j: int) -> tuple[Fraction, Fraction, Fraction]:
    """Exact barycentric coordinates of a leaf corner in the reference face."""
    coords = [Fraction(0)] * 3
    coords[j] = Fraction(1)
    for d in reversed(leaf):
        coords = [c / 2 for c in coords]
        coords[d] += Fraction(1, 2)
    return tuple(coords)


def corner_triple(leaf: Word, j: int, m: int) -> tuple[int, int, int]:
    """Leaf corner as an integer barycentric triple over denominator 2**m."""
    coords = corner_point(leaf, j)
    triple = tuple(int(c * 2**m) for c in coords)
    assert sum(triple) == 2**m
    return triple


def chain_vertex_triples(chain: Chain, m: int) -> list[tuple[int, int, int]]:
    """Barycentric triples of the chain's vertices, in chain order."""
    out = []
    for k, seg in enumerate(chain):
        a, b = [i for i in range(3) if i != seg.side]
        start = corner_triple(seg.leaf, a, m)
        end = corner_triple(seg.leaf, b, m)
        if k == 0:
            out.append(start)
        else:
            assert out[-1] == start, "chain is not contiguous"
        out.append(end)
    return out


# ---------------------------------------------------------------------------
# planar development


@dataclass
class SlitPair:
    """Two developed copies of one glued edge that ended up apart."""

    leaf: Word
    side: int
    leaf_xy: np.ndarray  # (2, 2) endpoints as placed with the leaf
    poly_xy: np.ndarray  # (2, 2) endpoints as placed with the polygon


@dataclass
class FaceLayout:
    level: int
    leaf_xy: dict[Word, np.ndarray]  # (3, 2) corner positions per leaf
    poly_xy: dict[Word, np.ndarray]  # (3, 2) polygon corner positions
    slits: list[SlitPair]
    corners_xy: np.ndarray  # (3, 2) positions of the three face corners


def _place_leaf(geom: TriangleGeom, p: np.ndarray, q: np.ndarray,
                a: int, b: int, away_from: np.ndarray) -> np.ndarray:
    """Coordinates of a leaf with corner ``a`` at p, corner ``b`` at q.

    The remaining corner is put on the opposite side of pq from
    ``away_from``.  Lengths are taken from the leaf geometry.
    """
    c = 3 - a - b
    ab = np.asarray(q) - np.asarray(p)
    d_ab = np.linalg.norm(ab)
    u = ab / d_ab
    n = np.array([-u[1], u[0]])
    # distances from corners a and b to corner c
    d_ac = geom.sides[b]
    d_bc = geom.sides[a]
    x = (d_ab**2 + d_ac**2 - d_bc**2) / (2 * d_ab)
    h2 = d_ac**2 - x**2
    h = math.sqrt(max(h2, 0.0))
    cand = np.asarray(p) + x * u + h * n
    if np.dot(cand - np.asarray(p), n) * np.dot(np.asarray(away_from) - np.asarray(p), n) > 0:
        cand = np.asarray(p) + x * u - h * n
    xy = np.zeros((3, 2))
    xy[a] = p
    xy[b] = q
    xy[c] = cand
    return xy


def _poly_edge_points(poly: np.ndarray, edge_idx: int, chain: Chain) -> np.ndarray:
    """Positions of the chain vertices along a placed polygon edge."""
    i, j = POLY_EDGES[edge_idx]
    lengths = np.array([seg.length for seg in chain])
    cums = np.concatenate([[0.0], np.cumsum(lengths)])
    total = cums[-1]
    t = cums / total
    return poly[i] + np.outer(t, poly[j] - poly[i])


def layout_face(net: FaceNet) -> FaceLayout:
    """Develop one face into the plane, cutting along a spanning set of edges.

    Pieces (upward leaves and downward polygons) are placed breadth-first
    starting from the central downward triangle; every non-tree adjacency
    is reported as a slit pair.
    """
    m = net.level
    if m == 0:
        geom = net.upward[()]
        s = geom.sides[0]
        xy = np.array([[s / 2, s * math.sqrt(3) / 2], [0.0, 0.0], [s, 0.0]])
        return FaceLayout(0, {(): xy}, {}, [], xy.copy())

    # map each leaf side to the polygon edge segment it lies on
    seg_of: dict[tuple[Word, int], tuple[Word, int, int]] = {}
    for cell, d in net.downward.items():
        for e, chain in enumerate(d.chains):
            for k, seg in enumerate(chain):
                seg_of[(seg.leaf, seg.side)] = (cell, e, k)

    leaf_xy: dict[Word, np.ndarray] = {}
    poly_xy: dict[Word, np.ndarray] = {}
    slits: list[SlitPair] = []

    root = net.downward[()]
    L = root.side
    # downward-pointing central triangle: corners M01 (left), M02 (right),
    # M12 (bottom) of the face
    poly_xy[()] = np.array([[0.0, 0.0], [L, 0.0], [L / 2, -L * math.sqrt(3) / 2]])

    queue: list[tuple[str, Word]] = [("poly", ())]
    placed_polys = {()}
    placed_leaves: set[Word] = set()
    tree_segments: set[tuple[Word, int, int]] = set()

    while queue:
        kind, key = queue.pop(0)
        if kind == "poly":
            d = net.downward[key]
            poly = poly_xy[key]
            for e, chain in enumerate(d.chains):
                pts = _poly_edge_points(poly, e, chain)
                i, j = POLY_EDGES[e]
                other = poly[3 - i - j]
                for k, seg in enumerate(chain):
                    a, b = [x for x in range(3) if x != seg.side]
                    if seg.leaf in placed_leaves:
                        if (key, e, k) not in tree_segments:
                            xy = leaf_xy[seg.leaf]
                            slits.append(SlitPair(
                                seg.leaf, seg.side,
                                np.array([xy[a], xy[b]]),
                                np.array([pts[k], pts[k + 1]]),
                            ))
                        continue
                    leaf_xy[seg.leaf] = _place_leaf(
                        net.upward[seg.leaf], pts[k], pts[k + 1], a, b, other
                    )
                    placed_leaves.add(seg.leaf)
                    tree_segments.add((key, e, k))
                    queue.append(("leaf", seg.leaf))
        else:
            xy = leaf_xy[key]
            for side in range(3):
                hit = seg_of.get((key, side))
                if hit is None:
                    continue  # face boundary
                cell, e, k = hit
                if cell in placed_polys:
                    continue  # handled (or to be handled) from the polygon side
                # place polygon `cell` so that its edge segment k lands on
                # this leaf's side
                d = net.downward[cell]
                chain = d.chains[e]
                cums = [0.0]
                for s in chain:
                    cums.append(cums[-1] + s.length)
                a, b = [x for x in range(3) if x != side]
                p, q = xy[a], xy[b]
                u = (q - p) / np.linalg.norm(q - p)
                i, j = POLY_EDGES[e]
                ci = p - cums[k] * u
                cj = ci + d.side * u
                n = np.array([-u[1], u[0]])
                h = d.side * math.sqrt(3) / 2
                mid = (ci + cj) / 2
                ck = mid + h * n
                third = xy[3 - a - b]
                if np.dot(ck - p, n) * np.dot(third - p, n) > 0:
                    ck = mid - h * n
                poly = np.zeros((3, 2))
                poly[i], poly[j], poly[3 - i - j] = ci, cj, ck
                poly_xy[cell] = poly
                placed_polys.add(cell)
                tree_segments.add((cell, e, k))
                queue.append(("poly", cell))

    corners = np.array([
        leaf_xy[(j,) * m][j] for j in range(3)
    ])
    return FaceLayout(m, leaf_xy, poly_xy, slits, corners)


def layout_vertex_angles(net: FaceNet, layout: FaceLayout) -> dict[tuple[int, int, int], float]:
    """Total developed angle at each face vertex, keyed by barycentric triple.

    Leaves contribute their corner angles; polygons contribute pi/3 at
    their corners and pi at chain-interior points of their edges.
    """
    m = net.level
    sums: dict[tuple[int, int, int], float] = {}

    def add(triple, angle):
        sums[triple] = sums.get(triple, 0.0) + angle

    for leaf, geom in net.upward.items():
        xy = layout.leaf_xy[leaf]
        for j in range(3):
            v1 = xy[(j + 1) % 3] - xy[j]
            v2 = xy[(j + 2) % 3] - xy[j]
            cross = v1[0] * v2[1] - v1[1] * v2[0]
            ang = math.atan2(abs(cross), float(np.dot(v1, v2)))
            add(corner_triple(leaf, j, m), ang)
    for cell, d in net.downward.items():
        for e, chain in enumerate(d.chains):
            triples = chain_vertex_triples(chain, m)
            add(triples[0], math.pi / 6)  # each polygon corner belongs to two edges
            add(triples[-1], math.pi / 6)
            for t in triples[1:-1]:
                add(t, math.pi)
    return sums


def layout_to_csv(layout: FaceLayout) -> str:
    """Triangle corner coordinates of the development, one row per leaf."""
    lines = ["word,x0,y0,x1,y1,x2,y2"]
    for leaf in sorted(layout.leaf_xy):
        xy = layout.leaf_xy[leaf]
        coords = ",".join(f"{xy[i][k]:.17g}" for i in range(3) for k in range(2))
        lines.append(f"{''.join(map(str, leaf))},{coords}")
    return "\n".join(lines) + "\n"


def facenet_to_json(net: FaceNet) -> str:
    """Serialize words, angles, sides, areas and the shared-edge relation."""
    up = [
        {
            "word": "".join(map(str, w)),
            "angles": list(g.angles),
            "sides": list(g.sides),
            "area": g.area,
        }
        for w, g in sorted(net.upward.items())
    ]
    down = [
        {
            "cell": "".join(map(str, d.cell)),
            "generation": d.generation,
            "side": d.side,
            "chains": [
                [["".join(map(str, s.leaf)), s.side, s.length] for s in chain]
                for chain in d.chains
            ],
        }
        for d in sorted(net.downward.values(), key=lambda d: d.cell)
    ]
    return json.dumps({
        "level": net.level,
        "normalization": net.normalization,
        "scale": net.scale,
        "upward": up,
        "downward": down,
    })
