"""``qcfield`` command line: batch evaluation of scene files.

Every command reads one YAML scene, writes its files next to the scene (or
where the scene says) and prints a JSON summary on stdout.  Coordinates on
the command line are in wavelengths.  Exit codes: 0 success, 2 invalid input,
3 I/O failure, 4 resource cap exceeded.  ``QCFIELD_THREADS`` sets the
number of sampling threads; output does not depend on it.
"""

from __future__ import annotations

import functools
import json
import sys

import click
import numpy as np

from . import __version__
from .calculus import synthesize_min_controls
from .control import reflection_action, rotation_action, translate_controls
from .errors import QCFieldError, ResourceCapError, ValidationError
from .pipeline import render_scene, render_transition_frames, scene_tiling
from .render import level_set_points_3d
from .quasiperiodicity import DEFAULT_BOUND, DEFAULT_TOL, classify, lattice_translations
from .scene import load_scene

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_RESOURCE = 4


def _exit_code(exc) -> int:
    if isinstance(exc, ResourceCapError):
        return EXIT_RESOURCE
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, OSError):
        return EXIT_IO
    return EXIT_VALIDATION


def _handled(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (QCFieldError, OSError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(_exit_code(exc))

    return wrapper


def _emit(obj):
    click.echo(json.dumps(obj, indent=2))


def _floats(text, n, name):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ValidationError(f"{name} must be {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ValidationError(f"{name} needs {n} numbers, got {len(vals)}")
    return np.array(vals)


def _interleaved(u):
    u = np.asarray(u)
    out = np.empty(2 * u.size)
    out[0::2], out[1::2] = u.real, u.imag
    return [float(v) for v in out]


@click.group()
@click.version_option(__version__, prog_name="qcfield")
def main():
    """Quasiperiodic acoustic radiation potential patterns from scene files."""


@main.command("eval")
@click.argument("scene_file", type=click.Path(dir_okay=False))
@click.option("--resolution", type=int, default=None, help="Override the points per axis.")
@_handled
def eval_cmd(scene_file, resolution):
    """Sample the potential and write the scene's output file."""
    scene = load_scene(scene_file)
    grid, path = render_scene(scene, resolution=resolution)
    info = {
        "output": str(path),
        "format": scene.output_format,
        "resolution": list(grid.resolution),
        "min": grid.vmin,
        "max": grid.vmax,
    }
    if scene.output_format == "points":
        info["points"] = int(len(level_set_points_3d(grid, scene.level_fraction)))
        info["level_fraction"] = scene.level_fraction
    _emit(info)


@main.command()
@click.argument("scene_file", type=click.Path(dir_okay=False))
@_handled
def tile(scene_file):
    """Build the cut-and-project tiling of the scene region."""
    scene = load_scene(scene_file)
    g, stats, svg = scene_tiling(scene)
    info = {"nodes": g.n_nodes, "edges": g.n_edges, "svg": str(svg) if svg else None}
    if stats is not None:
        info["edge_lengths"] = {repr(k): v for k, v in sorted(stats.edge_lengths.items())}
        info["rhombus_angles_deg"] = {repr(k): v for k, v in sorted(stats.rhombus_angles.items())}
        info["wedge_angles_over_pi_n"] = sorted(
            {round(k / (np.pi / scene.cfg.N), 4) for k in stats.wedge_angles}
        )
    _emit(info)


@main.command("check-qp")
@click.argument("scene_file", type=click.Path(dir_okay=False))
@click.option("--bound", type=int, default=DEFAULT_BOUND, show_default=True)
@click.option("--tol", type=float, default=DEFAULT_TOL, show_default=True)
@_handled
def check_qp(scene_file, bound, tol):
    """Classify the restricted field as periodic or quasiperiodic."""
    scene = load_scene(scene_file)
    rep = classify(scene.cfg, bound=bound, tol=tol)
    info = rep.as_dict()
    if rep.witnesses:
        T = lattice_translations(scene.cfg, rep.witnesses) / scene.cfg.wavelength
        info["translations_wavelengths"] = [[float(v) for v in row] for row in T]
    _emit(info)


@main.command()
@click.argument("scene_file", type=click.Path(dir_okay=False))
@click.option("--translate", "translate", default=None, help="dx,dy,... in wavelengths.")
@click.option("--rotate", type=int, default=None, help="Rotation by (j-1) pi/N (fans only).")
@click.option("--reflect", type=int, default=None, help="Reflection across angle (j-1) pi/(2N).")
@_handled
def transform(scene_file, translate, rotate, reflect):
    """Print the controls of the translated, rotated or reflected pattern."""
    given = [v is not None for v in (translate, rotate, reflect)]
    if sum(given) != 1:
        raise ValidationError("give exactly one of --translate, --rotate, --reflect")
    scene = load_scene(scene_file)
    cfg = scene.cfg
    info = {}
    if translate is not None:
        eps = _floats(translate, cfg.d, "--translate") * cfg.wavelength
        out = translate_controls(scene.u, eps, cfg)
        info["translate_wavelengths"] = [float(v) for v in eps / cfg.wavelength]
    else:
        act = rotation_action(cfg, rotate) if rotate is not None else reflection_action(cfg, reflect)
        out = act.apply(scene.u)
        info["permutation"] = [int(v) for v in act.perm]
        info["R"] = [[float(v) for v in row] for row in act.R]
    info["u"] = _interleaved(out.u)
    _emit(info)


@main.command()
@click.argument("scene_file", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(["direct", "geodesic"]), default=None)
@click.option("--frames", type=click.IntRange(min=2), default=None)
@click.option("--out", "directory", type=click.Path(file_okay=False), default=None,
              help="Frame directory (default: <scene>_frames next to the scene).")
@_handled
def transition(scene_file, kind, frames, directory):
    """Constant-power transition: sampled controls, frames, arc length and cost."""
    scene = load_scene(scene_file)
    path, controls, files, cost = render_transition_frames(scene, kind, frames, directory)
    n = len(controls)
    _emit({
        "kind": path.kind.value,
        "arc_length": path.arc_length,
        "frame_spacing": path.arc_length / (n - 1),
        "cost": cost,
        "frames": [str(f) for f in files],
        "controls": [_interleaved(c) for c in controls],
    })


@main.command()
@click.argument("scene_file", type=click.Path(dir_okay=False))
@click.option("--at", "at", required=True, help="Target point x1,x2,... in wavelengths.")
@_handled
def minima(scene_file, at):
    """Controls that place a global minimum of the potential at a point."""
    scene = load_scene(scene_file)
    cfg = scene.cfg
    x0 = _floats(at, cfg.d, "--at") * cfg.wavelength
    res = synthesize_min_controls(x0, cfg, scene.spec)
    _emit({
        "at_wavelengths": [float(v) for v in x0 / cfg.wavelength],
        "eigenvalue": float(res.eigenvalue),
        "multiplicity": int(res.multiplicity),
        "u": _interleaved(np.asarray(res.u)),
    })


if __name__ == "__main__":  # pragma: no cover
    main()
