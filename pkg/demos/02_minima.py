"""Place a trap (global minimum of the potential) at a chosen point.

The controls are the eigenvector of Q(x0) for its smallest eigenvalue.
The gradient vanishes there and no other point goes lower, which a dense
scan around the target confirms.
"""

import numpy as np

from qcfield import arp_gradient, arp_hessian, fan_config, sample_field, synthesize_min_controls

cfg = fan_config(5)
lam = cfg.wavelength
x0 = np.array([0.5, 0.25]) * lam
res = synthesize_min_controls(x0, cfg)
print(f"target {x0 / lam} wavelengths, eigenvalue {res.eigenvalue:.6f}, multiplicity {res.multiplicity}")
print(f"|grad psi(x0)| = {np.linalg.norm(arp_gradient(x0, res.u, cfg)):.2e}")
print(f"Hessian eigenvalues {np.linalg.eigvalsh(arp_hessian(x0, res.u, cfg))}")

grid = sample_field(np.column_stack([x0 - 2 * lam, x0 + 2 * lam]), 401, res.u, cfg)
i, j = np.unravel_index(np.argmin(grid.values), grid.values.shape)
print(f"scan minimum {grid.vmin:.6f} at {np.array([grid.axes[0][i], grid.axes[1][j]]) / lam}")
