"""Render the ten-fold fan pattern and the golden-ratio line from their scene files.

The potential of every pattern lies between the extreme eigenvalues of
Q(0), whatever the grid, so the sampled range is printed next to them.
"""

from pathlib import Path

from qcfield import load_scene, spectral_bounds
from qcfield.pipeline import render_scene

SCENES = Path(__file__).parent / "scenes"

for name in ("fan5.yaml", "golden_line.yaml", "moire.yaml"):
    scene = load_scene(SCENES / name)
    grid, path = render_scene(scene)
    lo, hi = spectral_bounds(scene.cfg, scene.spec)
    norm2 = float(abs(scene.u.u) @ abs(scene.u.u))
    print(f"{name}: {grid.resolution} samples -> {path.relative_to(SCENES)}")
    print(f"  sampled range [{grid.vmin:.4f}, {grid.vmax:.4f}], bounds [{lo * norm2:.4f}, {hi * norm2:.4f}]")
