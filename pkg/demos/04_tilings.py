"""Cut-and-project tilings: the lattice cells the restricted field passes through.

Projecting the centres of those cells gives rhombus tilings whose edges
point along the wavevectors.  The fan with five pairs yields the 36/72
degree rhombi; the golden-slope line gives the Fibonacci sequence.
"""

import math
from pathlib import Path

from qcfield import build_tiling, fan_config, load_scene, tile_statistics, tiling_1d
from qcfield.pipeline import scene_tiling
from qcfield.tiling import tile_symbols

for N in (4, 5, 6):
    cfg = fan_config(N)
    lam = cfg.wavelength
    g = build_tiling([[-4 * lam, 4 * lam]] * 2, 2.0, cfg)
    st = tile_statistics(g)
    print(f"fan N={N}: {g.n_nodes} nodes, {g.n_edges} edges, rhombus angles {sorted(st.rhombus_angles)}")

scene = load_scene(Path(__file__).parent / "scenes" / "fan5.yaml")
g, st, svg = scene_tiling(scene)
print(f"fan5 scene tiling over the potential: {g.n_nodes} nodes -> {svg.name}")

PHI = (1 + math.sqrt(5)) / 2
t = tiling_1d(1 / PHI, 50 * 2 * math.pi)
word = tile_symbols(t.lengths)
print(f"golden line: {len(word)} tiles, length ratio {t.lengths.max() / t.lengths.min():.9f}")
print(f"  {word}")
