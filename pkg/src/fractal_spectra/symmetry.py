"""The order-24 symmetry group of the surface as mesh automorphisms.

The octahedron symmetries that preserve the four-face gasket colouring are
the signed coordinate permutations with sign product +1.  They act on the
four gasket faces as the full permutation group on four letters; the
generators used here satisfy a^2 = b^3 = (a b)^4 = identity.  Each element
is realized as a permutation of mesh vertices through the construction
labels, which is valid because the corner-weight tables are symmetric
under corner relabelling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .surface import OCTANTS, SG_FACES, SurfaceMesh

# generator a: the mirror x -> -y, y -> -x (swaps two gasket faces);
# generator b: the coordinate cycle x -> y -> z -> x (3-cycle of faces)
GEN_A = ((0, -1, 0), (-1, 0, 0), (0, 0, 1))
GEN_B = ((0, 0, 1), (1, 0, 0), (0, 1, 0))

# conjugacy classes keyed by the cycle type on the four gasket faces
CLASS_OF_CYCLE_TYPE = {
    (1, 1, 1, 1): "identity",
    (2, 1, 1): "transposition",
    (2, 2): "double-transposition",
    (3, 1): "three-cycle",
    (4,): "four-cycle",
}

CLASS_ORDER = (
    "identity",
    "transposition",
    "double-transposition",
    "three-cycle",
    "four-cycle",
)

# character table over CLASS_ORDER; degree-1, 1, 2, 3, 3 representations
IRREP_CHARACTERS = {
    "A1": (1, 1, 1, 1, 1),
    "A2": (1, -1, 1, 1, -1),
    "E": (2, 0, 2, -1, 0),
    "T1": (3, -1, -1, 0, 1),
    "T2": (3, 1, -1, 0, -1),
}

IRREP_DEGREE = {name: chars[0] for name, chars in IRREP_CHARACTERS.items()}


class SymmetryError(ValueError):
    """The symmetry group failed to close or to act isometrically."""


def _matmul(p, q):
    return tuple(
        tuple(sum(p[i][k] * q[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def generate_group() -> list[tuple]:
    """Close {a, b} under multiplication; exactly 24 elements."""
    identity = tuple(tuple(int(i == j) for j in range(3)) for i in range(3))
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for h in (GEN_A, GEN_B):
                gh = _matmul(g, h)
                if gh not in seen:
                    seen.add(gh)
                    nxt.append(gh)
        frontier = nxt
    group = sorted(seen)
    if len(group) != 24:
        raise SymmetryError(f"group closure has order {len(group)}, expected 24")
    return group


def _perm_and_signs(mat) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Decompose a signed permutation matrix into axis map and signs.

    Column j of the matrix is the image of axis j: image axis ``perm[j]``
    with sign ``signs[j]``.
    """
    perm = [0] * 3
    signs = [0] * 3
    for j in range(3):
        for i in range(3):
            if mat[i][j] != 0:
                perm[j] = i
                signs[j] = mat[i][j]
    return tuple(perm), tuple(signs)


def octant_image(mat, octant: tuple[int, int, int]) -> tuple[int, int, int]:
    perm, signs = _perm_and_signs(mat)
    out = [0, 0, 0]
    for j in range(3):
        out[perm[j]] = signs[j] * octant[j]
    return tuple(out)


def face_permutation(mat) -> tuple[int, ...]:
    """Image face index for each of the 8 octant faces."""
    return tuple(OCTANTS.index(octant_image(mat, o)) for o in OCTANTS)


def sg_cycle_type(mat) -> tuple[int, ...]:
    fp = face_permutation(mat)
    mapping = {f: fp[f] for f in SG_FACES}
    seen = set()
    cycles = []
    for f in SG_FACES:
        if f in seen:
            continue
        length = 0
        x = f
        while x not in seen:
            seen.add(x)
            length += 1
            x = mapping[x]
        cycles.append(length)
    return tuple(sorted(cycles, reverse=True))


@dataclass
class SymmetryAction:
    """All 24 group elements as vertex permutations of one mesh."""

    n: int
    matrices: list[tuple]
    permutations: np.ndarray  # (24, n); permutations[g][v] = image of v
    face_perms: list[tuple]
    classes: list[str]
    a_index: int
    b_index: int

    def element_count(self) -> int:
        return len(self.matrices)


def _transport_key(key: tuple, mat, S: int) -> tuple:
    """Image of a vertex label under a signed permutation matrix."""
    perm, signs = _perm_and_signs(mat)
    tag = key[0]
    if tag == 0:  # octahedron corner: id = 2*axis + (0 if +, 1 if -)
        axis, neg = divmod(key[1], 2)
        sign = -1 if neg else 1
        new_axis = perm[axis]
        new_sign = signs[axis] * sign
        return (0, 2 * new_axis + (0 if new_sign > 0 else 1))
    if tag == 1:  # edge point: (1, vmin, vmax, k)
        _, va, vb, k = key
        ka = _transport_key((0, va), mat, S)[1]
        kb = _transport_key((0, vb), mat, S)[1]
        if ka < kb:
            return (1, ka, kb, k)
        return (1, kb, ka, S - k)
    if tag == 2:  # interior gasket point: (2, face, triple)
        _, f, triple = key
        f2 = OCTANTS.index(octant_image(mat, OCTANTS[f]))
        t2 = [0, 0, 0]
        for j in range(3):
            t2[perm[j]] = triple[j]
        return (2, f2, tuple(t2))
    if tag == 3:  # downward polygon interior: (3, face, cell, grid triple)
        _, f, cell, grid = key
        f2 = OCTANTS.index(octant_image(mat, OCTANTS[f]))
        cell2 = tuple(perm[d] for d in cell)
        if grid == (-1, -1, -1):
            return (3, f2, cell2, grid)
        # polygon corners are the midpoint pairs [01, 02, 12]
        pairs = ((0, 1), (0, 2), (1, 2))
        g2 = [0, 0, 0]
        for idx, (x, y) in enumerate(pairs):
            nx, ny = sorted((perm[x], perm[y]))
            g2[pairs.index((nx, ny))] = grid[idx]
        return (3, f2, cell2, tuple(g2))
    if tag == 4:  # flat face interior: (4, face, triple)
        _, f, triple = key
        f2 = OCTANTS.index(octant_image(mat, OCTANTS[f]))
        t2 = [0, 0, 0]
        for j in range(3):
            t2[perm[j]] = triple[j]
        return (4, f2, tuple(t2))
    raise SymmetryError(f"cannot transport key {key}")


def build_symmetry_action(mesh: SurfaceMesh, check: bool = True) -> SymmetryAction:
    """Vertex permutations for all 24 symmetries of the mesh.

    Works at any subdivision depth: midpoint vertices reference their
    parent edge, so their images follow once the parents' do (vertex ids
    are appended in depth order by construction).
    """
    group = generate_group()
    S = 1 << mesh.level
    perms = np.empty((24, mesh.n_vertices), dtype=np.int64)
    for gi, mat in enumerate(group):
        p = perms[gi]
        for v, key in enumerate(mesh.keys):
            if key[0] == 5:  # midpoint: (5, depth, id_a, id_b)
                _, d, a, b = key
                ia, ib = int(p[a]), int(p[b])
                image = (5, d, min(ia, ib), max(ia, ib))
            else:
                image = _transport_key(key, mat, S)
            idx = mesh.key_index.get(image)
            if idx is None:
                raise SymmetryError(f"image label {image} of {key} not in mesh")
            p[v] = idx

    classes = [CLASS_OF_CYCLE_TYPE[sg_cycle_type(mat)] for mat in group]
    a_index = group.index(GEN_A)
    b_index = group.index(GEN_B)
    action = SymmetryAction(
        n=mesh.n_vertices,
        matrices=group,
        permutations=perms,
        face_perms=[face_permutation(mat) for mat in group],
        classes=classes,
        a_index=a_index,
        b_index=b_index,
    )
    if check:
        verify_action(mesh, action)
    return action


def _compose(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # (p o q)(v) = p(q(v))
    return p[q]


def verify_action(mesh: SurfaceMesh, action: SymmetryAction,
                  rel_tol: float = 1e-10) -> None:
    """Check the defining relations and that every element is an isometry."""
    a = action.permutations[action.a_index]
    b = action.permutations[action.b_index]
    ident = np.arange(action.n)
    ab = _compose(a, b)
    if not np.array_equal(_compose(a, a), ident):
        raise SymmetryError("a^2 != identity")
    if not np.array_equal(_compose(b, _compose(b, b)), ident):
        raise SymmetryError("b^3 != identity")
    ab4 = _compose(ab, _compose(ab, _compose(ab, ab)))
    if not np.array_equal(ab4, ident):
        raise SymmetryError("(ab)^4 != identity")

    tri_index: dict[tuple, np.ndarray] = {}
    for t in range(mesh.n_triangles):
        key = tuple(sorted(int(v) for v in mesh.tris[t]))
        tri_index[key] = np.sort(mesh.lengths[t])
    for gi in range(len(action.matrices)):
        perm = action.permutations[gi]
        mapped = perm[mesh.tris]
        for t in range(mesh.n_triangles):
            key = tuple(sorted(int(v) for v in mapped[t]))
            lens = tri_index.get(key)
            if lens is None:
                raise SymmetryError(
                    f"element {gi} does not map triangle {t} onto the mesh"
                )
            if np.max(np.abs(lens - np.sort(mesh.lengths[t]))) > rel_tol * lens[-1]:
                raise SymmetryError(
                    f"element {gi} changes edge lengths of triangle {t}"
                )


def class_average_characters(action: SymmetryAction, traces: np.ndarray) -> dict[str, float]:
    """Average a per-element trace vector over the five conjugacy classes."""
    sums: dict[str, list[float]] = {c: [] for c in CLASS_ORDER}
    for cls, tr in zip(action.classes, traces):
        sums[cls].append(float(tr))
    return {c: float(np.mean(sums[c])) for c in CLASS_ORDER}
