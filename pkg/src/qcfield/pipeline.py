"""Scene-level operations shared by the CLI and the demo scripts."""

from __future__ import annotations

from pathlib import Path

from .control import direct_path, geodesic_path, transition_cost, translate_controls
from .errors import ValidationError
from .render import (
    FieldGrid,
    level_set_points_3d,
    render_csv,
    render_points,
    render_raster,
    render_tiling_svg,
    sample_field,
    write_frames,
)
from .scene import Scene
from .tiling import build_tiling, tile_statistics

__all__ = [
    "sample_grid",
    "write_output",
    "render_scene",
    "scene_tiling",
    "scene_path",
    "render_transition_frames",
]


def sample_grid(scene: Scene, u=None, threads: int | None = None, resolution=None) -> FieldGrid:
    """Sample the scene's potential (optionally with other controls or resolution)."""
    return sample_field(
        scene.region,
        scene.resolution if resolution is None else resolution,
        scene.u if u is None else u,
        scene.cfg,
        scene.spec,
        threads=threads,
    )


def write_output(scene: Scene, grid: FieldGrid, path=None) -> Path:
    path = scene.output_path if path is None else Path(path)
    if scene.output_format == "pgm":
        return render_raster(grid, path)
    if scene.output_format == "points":
        return render_points(level_set_points_3d(grid, scene.level_fraction), path)
    return render_csv(grid, path)


def render_scene(scene: Scene, threads: int | None = None, resolution=None):
    grid = sample_grid(scene, threads=threads, resolution=resolution)
    return grid, write_output(scene, grid)


def scene_tiling(scene: Scene, threads: int | None = None):
    """Tiling over the scene region; writes the SVG when the scene asks for one."""
    opts = scene.tiling
    if opts is None:
        raise ValidationError("scene has no tiling section")
    g = build_tiling(scene.region, opts.seed_density, scene.cfg, opts.max_nodes)
    svg = None
    if opts.svg is not None:
        under = sample_grid(scene, threads=threads) if opts.underlay else None
        svg = render_tiling_svg(g, opts.svg, scene.cfg.wavelength, under)
    stats = tile_statistics(g) if scene.cfg.d == 2 else None
    return g, stats, svg


def scene_path(scene: Scene, kind: str | None = None):
    """Transition path described by the scene, starting from its normalised controls."""
    t = scene.transition
    if t is None:
        raise ValidationError("scene has no transition section")
    kind = kind or t.kind
    u0 = scene.u.normalized().u
    if kind == "direct":
        if t.translate is None:
            raise ValidationError("a direct path needs transition.translate")
        return direct_path(u0, t.translate, scene.cfg)
    if kind == "geodesic":
        if t.translate is not None:
            u1 = translate_controls(u0, t.translate, scene.cfg).u
        else:
            u1 = t.target.normalized().u
        return geodesic_path(u0, u1)
    raise ValidationError(f"unknown path kind {kind!r}")


def render_transition_frames(scene: Scene, kind: str | None = None, frames: int | None = None,
                             directory=None, threads: int | None = None):
    """Sample the path at equal arc-length steps and write one file per frame.

    Returns ``(path, controls, files, cost)``; the cost uses the scene region.
    """
    t = scene.transition
    path = scene_path(scene, kind)
    n = frames or (t.frames if t else 6)
    if n < 2:
        raise ValidationError("need at least 2 frames")
    controls = path.sample(n)
    grids = [sample_grid(scene, u=c, threads=threads) for c in controls]
    if directory is None:
        directory = t.directory if t and t.directory else scene.base_dir / f"{scene.source.stem}_frames"
    directory = Path(directory)
    ext = ".pgm" if scene.output_format == "pgm" else ".csv"
    files = write_frames(grids, directory, writer=lambda g, p: write_output(scene, g, p), ext=ext)
    cost = transition_cost(path, scene.region, scene.cfg, scene.spec, t.samples if t else 257)
    return path, controls, files, cost

