"""Figure rendering: developed nets, eigenfunction heatmaps, spectral plots.

All figures are written to files (SVG by default) with deterministic
output: fixed hash salt, no timestamps.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fractal-spectra"

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import LineCollection, PolyCollection

from .surface import OCTANTS, SurfaceMesh, face_corner_ids

SQRT3 = math.sqrt(3.0)


def _save(fig, path) -> None:
    path = str(path)
    if path.endswith(".svg"):
        fig.savefig(path, metadata={"Date": None})
    else:
        fig.savefig(path)
    plt.close(fig)


def _octant_cycle() -> list[int]:
    """An 8-cycle through the octant faces flipping one sign per step."""
    cycle = [(1, 1, 1)]
    flips = [0, 1, 0, 2, 0, 1, 0]
    for ax in flips:
        prev = list(cycle[-1])
        prev[ax] = -prev[ax]
        cycle.append(tuple(prev))
    return [OCTANTS.index(o) for o in cycle]


def _strip_slots(side: float) -> list[np.ndarray]:
    """Corner coordinates of 8 alternating triangle slots in a strip."""
    h = side * SQRT3 / 2
    slots = []
    for k in range(8):
        x0 = side * (k / 2.0)
        if k % 2 == 0:  # upward
            slots.append(np.array([[x0, 0.0], [x0 + side, 0.0], [x0 + side / 2, h]]))
        else:  # downward
            slots.append(
                np.array([[x0 - side / 2, h], [x0 + side / 2, h], [x0, 0.0]])
            )
    return slots


def _assign_slot_corners(cycle: list[int]) -> dict[int, dict[int, int]]:
    """For each face, map its axis-corner index to a slot corner position.

    Consecutive slots share an edge; the two shared octahedron vertices
    keep their slot corners so those gluings are drawn closed.
    """
    slots = _strip_slots(1.0)
    assignment: dict[int, dict[int, int]] = {}
    prev_pos: dict[int, int] = {}
    for k, f in enumerate(cycle):
        vids = face_corner_ids(f)
        if k == 0:
            assignment[f] = {j: j for j in range(3)}
        else:
            placed = {}
            for ci in range(3):
                for cj in range(3):
                    if np.allclose(slots[k][ci], slots[k - 1][cj]):
                        v = next(v for v, p in prev_pos.items() if p == cj)
                        placed[v] = ci
            assignment[f] = {j: placed[vids[j]] for j in range(3) if vids[j] in placed}
            free_corner = ({0, 1, 2} - set(assignment[f].values())).pop()
            for j in range(3):
                assignment[f].setdefault(j, free_corner)
        prev_pos = {vids[j]: assignment[f][j] for j in range(3)}
    return assignment


def _procrustes(src: np.ndarray, dst: np.ndarray):
    """Best rigid map (rotation/reflection + shift) sending src -> dst."""
    cs, cd = src.mean(axis=0), dst.mean(axis=0)
    H = (src - cs).T @ (dst - cd)
    U, _, Vt = np.linalg.svd(H)
    R = (U @ Vt).T
    return lambda p: (np.asarray(p) - cs) @ R.T + cd


def net_transforms(mesh: SurfaceMesh) -> dict[int, callable]:
    """Per-face maps from development frames into the strip net."""
    cycle = _octant_cycle()
    assignment = _assign_slot_corners(cycle)
    side = float(mesh.scale) if mesh.normalization == "chain" else 1.0
    slots = _strip_slots(side)

    # face-corner positions in each face's own development frame
    corner_pos: dict[int, dict[int, np.ndarray]] = {f: {} for f in range(8)}
    S = 1 << mesh.level
    corner_triples = {0: (S, 0, 0), 1: (0, S, 0), 2: (0, 0, S)}
    for t in range(mesh.n_triangles):
        f = int(mesh.face_of[t])
        for ci in range(3):
            key = mesh.keys[mesh.tris[t][ci]]
            if key[0] == 0:  # octahedron corner
                vids = face_corner_ids(f)
                if key[1] in vids:
                    j = vids.index(key[1])
                    corner_pos[f].setdefault(j, mesh.xy[t][ci])

    transforms = {}
    for k, f in enumerate(cycle):
        src = np.array([corner_pos[f][j] for j in range(3)])
        dst = np.array([slots[k][assignment[f][j]] for j in range(3)])
        transforms[f] = _procrustes(src, dst)
    return transforms


def net_positions(mesh: SurfaceMesh) -> np.ndarray:
    """All triangle corners mapped into the strip net, shape (F, 3, 2)."""
    transforms = net_transforms(mesh)
    out = np.empty_like(mesh.xy)
    for f, tf in transforms.items():
        sel = mesh.face_of == f
        if sel.any():
            out[sel] = tf(mesh.xy[sel].reshape(-1, 2)).reshape(-1, 3, 2)
    return out


def identification_segments(mesh: SurfaceMesh, pos: np.ndarray,
                            round_to: float = 1e-7) -> list[tuple]:
    """Line segments connecting distinct net copies of identified vertices."""
    by_vertex: dict[int, list] = {}
    for t in range(mesh.n_triangles):
        for ci in range(3):
            v = int(mesh.tris[t][ci])
            p = pos[t, ci]
            by_vertex.setdefault(v, [])
            key = (round(p[0] / round_to), round(p[1] / round_to))
            if key not in [k for k, _ in by_vertex[v]]:
                by_vertex[v].append((key, p))
    segments = []
    for v, copies in by_vertex.items():
        pts = [p for _, p in copies]
        for i in range(1, len(pts)):
            segments.append((pts[i - 1], pts[i]))
    return segments


def save_net_figure(mesh: SurfaceMesh, path, values: np.ndarray | None = None,
                    show_identifications: bool = True, max_lines: int = 4000) -> None:
    """Draw the 8-face strip net, optionally colored by a vertex function."""
    pos = net_positions(mesh)
    fig, ax = plt.subplots(figsize=(16, 4.5))
    if values is not None:
        tri_vals = np.asarray(values)[mesh.tris]
        polys = PolyCollection(pos, array=tri_vals.mean(axis=1),
                               cmap="RdBu_r", edgecolors="none")
        ax.add_collection(polys)
        fig.colorbar(polys, ax=ax, shrink=0.8)
    else:
        polys = PolyCollection(pos, facecolors="none", edgecolors="0.6",
                               linewidths=0.3)
        ax.add_collection(polys)
    if show_identifications:
        segs = identification_segments(mesh, pos)[:max_lines]
        ax.add_collection(LineCollection(segs, colors="tab:blue",
                                         linewidths=0.4, alpha=0.6))
    ax.set_aspect("equal")
    ax.autoscale()
    ax.axis("off")
    _save(fig, path)


def save_face_layout_figure(layout, path) -> None:
    """One face's development with slit pairs highlighted."""
    fig, ax = plt.subplots(figsize=(7, 7))
    polys = [xy for xy in layout.leaf_xy.values()]
    ax.add_collection(PolyCollection(polys, facecolors="#dce6f2",
                                     edgecolors="0.4", linewidths=0.4))
    downs = [xy for xy in layout.poly_xy.values()]
    if downs:
        ax.add_collection(PolyCollection(downs, facecolors="none",
                                         edgecolors="0.7", linewidths=0.3))
    segs = []
    for s in layout.slits:
        segs.append((s.leaf_xy[0], s.leaf_xy[1]))
        segs.append((s.poly_xy[0], s.poly_xy[1]))
    if segs:
        ax.add_collection(LineCollection(segs, colors="tab:red", linewidths=0.8))
    ax.set_aspect("equal")
    ax.autoscale()
    ax.axis("off")
    _save(fig, path)


def save_counting_figures(counting, outdir, prefix: str = "") -> list[str]:
    """N(t) with the Weyl line, D(t), and A(t) as three SVG files."""
    lam = counting.eigenvalues
    tmax = float(lam[-1])
    t = np.linspace(tmax * 1e-4, tmax, 2000)
    written = []

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.step(lam, np.arange(1, len(lam) + 1), where="post", label="count")
    ax.plot(t, counting.weyl_slope * t, label="Weyl term")
    ax.set_xlabel("t")
    ax.set_ylabel("N(t)")
    ax.legend()
    p = f"{outdir}/{prefix}counting.svg"
    _save(fig, p)
    written.append(p)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(t, counting.difference(t), lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("D(t)")
    p = f"{outdir}/{prefix}difference.svg"
    _save(fig, p)
    written.append(p)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.plot(t, counting.average_difference(t), lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("A(t)")
    p = f"{outdir}/{prefix}average.svg"
    _save(fig, p)
    written.append(p)
    return written


def save_multiplicity_figure(clusters, path) -> None:
    mults = clusters.multiplicities()
    means = [c.mean for c in clusters.clusters]
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.stem(means, mults, basefmt=" ")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("multiplicity")
    ax.set_yticks([1, 2, 3])
    _save(fig, path)


def save_spectrum_comparison(level_values: dict[int, np.ndarray], path,
                             count: int = 60) -> None:
    """Beginning of the spectrum for several levels, one trace per level."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for m, vals in sorted(level_values.items()):
        ax.plot(np.arange(min(count, len(vals))), vals[:count],
                marker=".", ms=3, lw=0.7, label=f"level {m}")
    ax.set_xlabel("index")
    ax.set_ylabel("eigenvalue")
    ax.legend()
    _save(fig, path)
