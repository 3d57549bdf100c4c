"""Command-line pipeline: build surfaces, solve spectra, analyze, render."""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import click
import numpy as np

from . import cache as cachemod
from .analysis import (
    classify_spectrum,
    cluster_multiplicities,
    counting_function,
    extrapolate,
    find_motif,
    fit_geometric,
)
from .btables import make_angle_table
from .facegeom import layout_face, solve_sidelengths
from .fem import assemble_matrices, solve_lowest
from .refdata import REFERENCE_LEVELS, load_reference_rows
from .surface import (
    DEFAULT_SCALE,
    SurfaceMesh,
    assemble,
    curvature_audit,
    mesh_from_json,
    mesh_to_json,
    total_area,
)
from .symmetry import build_symmetry_action


@dataclass
class RunConfig:
    level: int
    depth: int = 0
    normalization: str = "chain"
    scale: float = DEFAULT_SCALE
    style: str = "reference"
    count: int = 20
    tol: float = 1e-4
    out: Path = Path("out")
    cache: bool = True

    def tag(self) -> str:
        return f"level{self.level}_d{self.depth}_{self.normalization}"

    def outdir(self) -> Path:
        d = self.out / self.tag()
        d.mkdir(parents=True, exist_ok=True)
        return d

    def mesh_params(self) -> dict:
        return {
            "level": self.level,
            "depth": self.depth,
            "normalization": self.normalization,
            "scale": self.scale,
            "style": self.style,
        }


def fmt(x: float) -> str:
    return f"{x:.17g}"


def get_mesh(cfg: RunConfig) -> SurfaceMesh:
    if cfg.cache:
        text = cachemod.load("mesh", "json", **cfg.mesh_params())
        if text is not None:
            return mesh_from_json(text)
    mesh = assemble(cfg.level, cfg.depth, cfg.normalization, cfg.scale, cfg.style)
    if cfg.cache:
        cachemod.store(mesh_to_json(mesh), "mesh", "json", **cfg.mesh_params())
    return mesh


def spectrum_csv(eigenvalues, residuals) -> str:
    buf = io.StringIO()
    buf.write("index,eigenvalue,residual\n")
    for i, (lam, r) in enumerate(zip(eigenvalues, residuals)):
        buf.write(f"{i},{fmt(lam)},{fmt(r)}\n")
    return buf.getvalue()


def clusters_csv(clusters) -> str:
    buf = io.StringIO()
    buf.write("start,end,mean_eigenvalue,multiplicity,irrep\n")
    for c in clusters.clusters:
        buf.write(f"{c.start},{c.end},{fmt(c.mean)},{c.multiplicity},{c.irrep or ''}\n")
    return buf.getvalue()


def get_spectrum(cfg: RunConfig) -> tuple[np.ndarray, np.ndarray]:
    params = {**cfg.mesh_params(), "count": cfg.count}
    if cfg.cache:
        text = cachemod.load("spectrum", "csv", **params)
        if text is not None:
            rows = [line.split(",") for line in text.splitlines()[1:]]
            lam = np.array([float(r[1]) for r in rows])
            res = np.array([float(r[2]) for r in rows])
            return lam, res
    mesh = get_mesh(cfg)
    spec = solve_lowest(assemble_matrices(mesh), cfg.count)
    if cfg.cache:
        cachemod.store(spectrum_csv(spec.eigenvalues, spec.residuals),
                       "spectrum", "csv", **params)
    return spec.eigenvalues, spec.residuals


common_options = [
    click.option("--level", "-m", type=int, required=True, help="refinement level"),
    click.option("--depth", type=int, default=0, show_default=True,
                 help="midpoint subdivision depth"),
    click.option("--norm", type=click.Choice(["chain", "straight"]),
                 default="chain", show_default=True),
    click.option("--scale", type=float, default=DEFAULT_SCALE, show_default=True,
                 help="value of the normalized boundary length"),
    click.option("--style", type=click.Choice(["reference", "quality"]),
                 default="reference", show_default=True,
                 help="interior triangulation of downward polygons"),
    click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
                 show_default=True),
    click.option("--no-cache", is_flag=True, default=False),
]


def with_options(f):
    for opt in reversed(common_options):
        f = opt(f)
    return f


def make_config(level, depth, norm, scale, style, out, no_cache, count=20, tol=1e-4):
    return RunConfig(level=level, depth=depth, normalization=norm, scale=scale,
                     style=style, count=count, tol=tol, out=out, cache=not no_cache)


@click.group()
def main():
    """Spectra of polyhedral surfaces with gasket-patterned curvature."""


@main.command()
@with_options
def build(level, depth, norm, scale, style, out, no_cache):
    """Assemble the surface; write mesh JSON, curvature audit, net SVG."""
    cfg = make_config(level, depth, norm, scale, style, out, no_cache)
    try:
        mesh = get_mesh(cfg)
    except Exception as exc:
        click.echo(f"assembly failed: {exc}", err=True)
        sys.exit(1)
    outdir = cfg.outdir()
    (outdir / "mesh.json").write_text(mesh_to_json(mesh))

    audit = curvature_audit(mesh)
    buf = io.StringIO()
    buf.write("vertex,role,deficit\n")
    for i, (role, d) in enumerate(zip(mesh.roles, audit.deficits)):
        buf.write(f"{i},{role},{fmt(d)}\n")
    (outdir / "curvature_audit.csv").write_text(buf.getvalue())

    if mesh.depth == 0:
        from .plots import save_net_figure

        save_net_figure(mesh, outdir / "net.svg")

    click.echo(f"vertices: {mesh.n_vertices}  triangles: {mesh.n_triangles}")
    click.echo(f"cone vertices: {audit.cone_count} "
               f"(expected deficit {audit.expected_deficit:.6g})")
    click.echo(f"max cone deficit error: {audit.max_cone_error:.3e}")
    click.echo(f"total deficit: {audit.total:.12f} (4*pi = {4 * math.pi:.12f})")
    click.echo(f"area: {total_area(mesh):.12f}")
    if not audit.passed:
        click.echo("curvature audit FAILED", err=True)
        sys.exit(1)
    gauss_bonnet = abs(audit.total - 4 * math.pi) <= 1e-8
    if not gauss_bonnet:
        click.echo("Gauss-Bonnet check FAILED", err=True)
        sys.exit(1)
    click.echo("audits passed")


@main.command()
@with_options
@click.option("--count", "-k", type=int, default=20, show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True,
              help="relative gap tolerance for clustering")
@click.option("--export-matrices", is_flag=True, default=False,
              help="also write mass/stiffness in coordinate text format")
def spectrum(level, depth, norm, scale, style, out, no_cache, count, tol,
             export_matrices):
    """Solve the lowest eigenvalues; write spectrum and cluster CSVs."""
    cfg = make_config(level, depth, norm, scale, style, out, no_cache, count, tol)
    outdir = cfg.outdir()
    try:
        lam, res = get_spectrum(cfg)
    except Exception as exc:
        click.echo(f"eigensolve failed: {exc}", err=True)
        sys.exit(1)
    (outdir / "spectrum.csv").write_text(spectrum_csv(lam, res))
    clusters = cluster_multiplicities(lam, tol)
    (outdir / "clusters.csv").write_text(clusters_csv(clusters))
    if export_matrices:
        from .fem import matrix_to_coordinate_text

        ops = assemble_matrices(get_mesh(cfg))
        (outdir / "mass.txt").write_text(matrix_to_coordinate_text(ops.mass))
        (outdir / "stiffness.txt").write_text(
            matrix_to_coordinate_text(ops.stiffness))
    click.echo(f"lowest eigenvalues: {np.round(lam[: min(10, len(lam))], 6).tolist()}")
    click.echo(f"multiplicities: {clusters.multiplicities()[:12]}")
    click.echo(f"wrote {outdir / 'spectrum.csv'}")


@main.command()
@with_options
@click.option("--count", "-k", type=int, default=20, show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
def analyze(level, depth, norm, scale, style, out, no_cache, count, tol):
    """Counting-function plots, multiplicity stats, motif, irrep labels."""
    cfg = make_config(level, depth, norm, scale, style, out, no_cache, count, tol)
    outdir = cfg.outdir()
    spath = outdir / "spectrum.csv"
    if not spath.exists():
        click.echo(f"missing {spath}; run the spectrum command first", err=True)
        sys.exit(1)
    rows = [line.split(",") for line in spath.read_text().splitlines()[1:]]
    lam = np.array([float(r[1]) for r in rows])

    # labels and development frames are needed here, so build directly
    # instead of going through the geometry-only mesh cache
    mesh = assemble(cfg.level, cfg.depth, cfg.normalization, cfg.scale, cfg.style)
    area = total_area(mesh)
    counting = counting_function(lam, area)
    from .plots import save_counting_figures, save_multiplicity_figure

    save_counting_figures(counting, outdir)

    clusters = cluster_multiplicities(lam, tol)
    if cfg.depth == 0:
        ops = assemble_matrices(mesh)
        spec = solve_lowest(ops, cfg.count)
        action = build_symmetry_action(mesh)
        classify_spectrum(clusters, spec.eigenvectors, action, ops.mass)
    (outdir / "clusters.csv").write_text(clusters_csv(clusters))
    save_multiplicity_figure(clusters, outdir / "multiplicities.svg")

    fractions = clusters.fractions()
    buf = io.StringIO()
    buf.write("multiplicity,eigenvalue_fraction,cluster_count\n")
    mults = clusters.multiplicities()
    for k in sorted(fractions):
        buf.write(f"{k},{fmt(fractions[k])},{mults.count(k)}\n")
    (outdir / "multiplicity_stats.csv").write_text(buf.getvalue())

    hits = find_motif(clusters)
    (outdir / "motif.txt").write_text(
        "motif (3,3,1,1,3) starts at eigenvalue indices: "
        + (", ".join(map(str, hits)) if hits else "none") + "\n"
    )
    click.echo(f"clusters: {len(clusters.clusters)}  fractions: "
               + json.dumps({str(k): round(v, 4) for k, v in fractions.items()}))
    click.echo(f"motif starts: {hits}")
    click.echo(f"wrote analysis to {outdir}")


@main.command()
@click.option("--levels", default="4,5,6,7", show_default=True,
              help="comma-separated levels to extrapolate over")
@click.option("--source", type=click.Choice(["computed", "reference"]),
              default="reference", show_default=True)
@click.option("--count", "-k", type=int, default=30, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("out"),
              show_default=True)
@click.option("--tol", type=float, default=1e-4, show_default=True)
@click.option("--no-cache", is_flag=True, default=False)
def extrapolate_cmd(levels, source, count, out, tol, no_cache):
    """Exponential cross-level extrapolation table."""
    ms = [int(x) for x in levels.split(",") if x.strip()]
    if len(ms) < 3:
        click.echo("need at least three levels; extrapolation skipped", err=True)
        sys.exit(1)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if source == "reference":
        missing = [m for m in ms if m not in REFERENCE_LEVELS]
        if missing:
            click.echo(f"reference data has levels {REFERENCE_LEVELS}; "
                       f"missing {missing}", err=True)
            sys.exit(1)
        rows = load_reference_rows()
        buf.write("start,end," + ",".join(f"l{m}" for m in ms) + ",limit,ratio,residual\n")
        for r in rows:
            fit = fit_geometric(ms, [r.values[m] for m in ms])
            vals = ",".join(fmt(r.values[m]) for m in ms)
            if fit.limit is None:
                buf.write(f"{r.start},{r.end},{vals},,,{fit.status}\n")
            else:
                buf.write(f"{r.start},{r.end},{vals},{fmt(fit.limit)},"
                          f"{fmt(fit.ratio)},{fmt(fit.residual)}\n")
    else:
        per_level = []
        for m in ms:
            cfg = RunConfig(level=m, count=count, tol=tol, out=out,
                            cache=not no_cache)
            lam, _ = get_spectrum(cfg)
            per_level.append((m, lam))
        fits = extrapolate(per_level, rel_tol=tol)
        buf.write("start,end," + ",".join(f"l{m}" for m in ms) + ",limit,ratio,residual\n")
        for rf in fits:
            vals = ",".join(fmt(rf.per_level[m]) if m in rf.per_level else ""
                            for m in ms)
            if rf.fit.limit is None:
                buf.write(f"{rf.start},{rf.end},{vals},,,{rf.fit.status}\n")
            else:
                buf.write(f"{rf.start},{rf.end},{vals},{fmt(rf.fit.limit)},"
                          f"{fmt(rf.fit.ratio)},{fmt(rf.fit.residual)}\n")
    path = out / "extrapolation.csv"
    path.write_text(buf.getvalue())
    click.echo(f"wrote {path}")


main.add_command(extrapolate_cmd, name="extrapolate")


@main.command()
@with_options
@click.option("--eigenfunction", "-e", type=int, default=None,
              help="render this eigenfunction index instead of the bare net")
@click.option("--face", is_flag=True, default=False,
              help="also write one face's development (SVG + coordinate CSV)")
@click.option("--count", "-k", type=int, default=20, show_default=True)
def render(level, depth, norm, scale, style, out, no_cache, eigenfunction, face,
           count):
    """Net SVG with identification lines, or an eigenfunction heatmap."""
    cfg = make_config(level, depth, norm, scale, style, out, no_cache, count)
    if cfg.depth != 0:
        click.echo("rendering uses the unsubdivided mesh", err=True)
        sys.exit(1)
    mesh = assemble(cfg.level, 0, cfg.normalization, cfg.scale, cfg.style)
    outdir = cfg.outdir()
    from .plots import save_face_layout_figure, save_net_figure

    if face:
        from .facegeom import layout_to_csv

        net = solve_sidelengths(make_angle_table(cfg.level),
                                cfg.normalization, cfg.scale)
        layout = layout_face(net)
        save_face_layout_figure(layout, outdir / "face_layout.svg")
        (outdir / "face_layout.csv").write_text(layout_to_csv(layout))
        click.echo(f"wrote {outdir / 'face_layout.svg'}")

    if eigenfunction is None:
        path = outdir / "net.svg"
        save_net_figure(mesh, path)
    else:
        spec = solve_lowest(assemble_matrices(mesh), max(eigenfunction + 1, 2))
        path = outdir / f"eigenfunction_{eigenfunction}.svg"
        save_net_figure(mesh, path, values=spec.eigenvectors[:, eigenfunction])
    click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
