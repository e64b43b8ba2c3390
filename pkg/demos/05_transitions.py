"""Moving a pattern at constant power.

Translating the pattern by eps is a pure phase change of the controls.
The direct path applies that phase gradually; the geodesic path takes the
shortest arc on the unit sphere between the same endpoints.  Symmetries
of the fan act on the controls by permutations.
"""

import math
from pathlib import Path

import numpy as np

from qcfield import arp_value, fan_config, load_scene, reflection_action, rotation_action
from qcfield.pipeline import render_transition_frames

scene = load_scene(Path(__file__).parent / "scenes" / "fan5.yaml")
for kind in ("direct", "geodesic"):
    out = scene.base_dir / "out" / f"fan5_{kind}_frames"
    path, controls, files, cost = render_transition_frames(scene, kind=kind, directory=out)
    print(f"{kind}: length {path.arc_length:.6f}, spacing {path.arc_length / (len(files) - 1):.4f}, "
          f"cost {cost:.4f}, {len(files)} frames in {files[0].parent.name}/")
print(f"pi * sqrt(10) = {math.pi * math.sqrt(10):.6f}")

cfg = fan_config(5)
rng = np.random.default_rng(1)
u = rng.normal(size=10) + 1j * rng.normal(size=10)
x = rng.uniform(-10, 10, (200, 2))
for name, act in [("rotation 3pi/5", rotation_action(cfg, 4)), ("reflection at pi/5", reflection_action(cfg, 3))]:
    gap = np.max(np.abs(arp_value(x @ act.R.T, u, cfg) - arp_value(x, act.apply(u), cfg)))
    print(f"{name}: permutation {[int(v) for v in act.perm]}, field gap {gap:.1e}")
