"""Run every ``qcfield`` command on a small scene and collect all bytes produced."""

import textwrap
from pathlib import Path

from click.testing import CliRunner

from qcfield.cli import main

SMALL_SCENE = """\
K: fan
N: 5
alpha: [1, 1, 1, 1, 1]
beta: [-1, -1, -1, -1, -1]
region: [[-2, 2], [-2, 2]]
resolution: 65
output: {format: pgm, path: out/field.pgm}
tiling: {seed_density: 2, svg: out/tiling.svg, underlay: true}
transition: {kind: direct, frames: 4, translate: [1, 2], directory: out/frames, samples: 33}
"""

CSV_SCENE = SMALL_SCENE.replace("format: pgm, path: out/field.pgm", "format: csv, path: out/field.csv")

POINTS_SCENE = """\
K: icosahedral
u: [1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0]
region: [[-1, 1], [-1, 1], [-1, 1]]
resolution: 24
output: {format: points, path: out/cloud.csv}
"""

COMMANDS = {
    "eval": ["eval", "{scene}"],
    "eval-csv": ["eval", "{csv}"],
    "eval-points": ["eval", "{points}"],
    "tile": ["tile", "{scene}"],
    "check-qp": ["check-qp", "{scene}"],
    "transform-translate": ["transform", "{scene}", "--translate", "0.5,0.25"],
    "transform-rotate": ["transform", "{scene}", "--rotate", "2"],
    "transform-reflect": ["transform", "{scene}", "--reflect", "3"],
    "transition-direct": ["transition", "{scene}", "--kind", "direct", "--frames", "4"],
    "transition-geodesic": ["transition", "{scene}", "--kind", "geodesic", "--frames", "4",
                            "--out", "{dir}/out/geo"],
    "minima": ["minima", "{scene}", "--at", "0.5,0.25"],
}


def write_scenes(directory) -> dict:
    directory = Path(directory)
    paths = {"scene": directory / "scene.yaml", "csv": directory / "csv.yaml",
             "points": directory / "points.yaml", "dir": directory}
    paths["scene"].write_text(textwrap.dedent(SMALL_SCENE))
    paths["csv"].write_text(textwrap.dedent(CSV_SCENE))
    paths["points"].write_text(textwrap.dedent(POINTS_SCENE))
    return paths


def invoke(args, threads=None):
    env = {"QCFIELD_THREADS": str(threads)} if threads is not None else None
    return CliRunner().invoke(main, args, env=env)


def run_command(name, paths, threads) -> dict:
    """Stdout plus every file under the scene directory after running one command."""
    out = Path(paths["dir"]) / "out"
    if out.exists():
        for f in sorted(out.rglob("*"), reverse=True):
            f.unlink() if f.is_file() else f.rmdir()
    args = [a.format(**{k: str(v) for k, v in paths.items()}) for a in COMMANDS[name]]
    res = invoke(args, threads)
    if res.exit_code != 0:
        raise AssertionError(f"{name} exited {res.exit_code}: {res.output}")
    files = {str(f.relative_to(out)): f.read_bytes() for f in sorted(out.rglob("*")) if f.is_file()}
    return {"stdout": res.stdout.encode(), "files": files}
