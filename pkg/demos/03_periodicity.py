"""Which configurations repeat?  Integer relations among the phases decide.

A restricted field is periodic when the range of K^T meets the lattice
2 pi Z^N in a rank-d sublattice.  The twisted hexagonal pairs at the
commensurate angles are periodic, a generic twist and the five-fold fan
are not.
"""

import math

import numpy as np

from qcfield import WaveConfig, arp_value, classify, fan_config, lattice_translations, moire_angle, moire_wavevectors

PHI = (1 + math.sqrt(5)) / 2
cases = {
    "golden line K=[phi, 1]": WaveConfig([[PHI, 1.0]], check_norms=False),
    "square K=I": WaveConfig(np.eye(2)),
    "five-fold fan": fan_config(5),
    "twist pi/6": moire_wavevectors(math.pi / 6),
}
for m, r in [(1, 1), (2, 1), (3, 4)]:
    cases[f"moire (m, r)=({m}, {r}), {math.degrees(moire_angle(m, r)):.3f} deg"] = moire_wavevectors(moire_angle(m, r))

rng = np.random.default_rng(0)
for name, cfg in cases.items():
    rep = classify(cfg)
    line = f"{name}: {rep.verdict.value}, lattice dim {rep.lattice_dim}"
    if rep.witnesses and cfg.d == 2 and cfg.N > 2:
        T = lattice_translations(cfg, rep.witnesses)
        u = rng.normal(size=2 * cfg.N) + 1j * rng.normal(size=2 * cfg.N)
        x = rng.uniform(-10, 10, (50, 2))
        drift = max(np.max(np.abs(arp_value(x + t, u, cfg) - arp_value(x, u, cfg))) for t in T)
        line += f", witnesses {rep.witnesses}, field drift under translation {drift:.1e}"
    print(line)
