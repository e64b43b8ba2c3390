"""Pattern transformations as operations on controls, and constant-power transitions.

Translations act diagonally, ``u -> exp(i D(K^T eps)) u``.  Orthogonal maps
``R`` that send every wavevector to plus or minus another one act by
permuting the entries of ``u`` (swapping the forward and backward amplitude
when the sign flips).  Transitions are curves on the unit sphere of
``C^{2N}``; their cost is the arc-length integral of the region-averaged
potential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ValidationError
from .wavefield import (
    DEFAULT_SPEC,
    Controls,
    PotentialSpec,
    WaveConfig,
    as_vector,
    diag_phase,
    fan_config,
    phase_shift,
)

__all__ = [
    "SymmetryAction",
    "PathKind",
    "TransitionPath",
    "translate_controls",
    "match_unitary",
    "rotation_matrix",
    "reflection_matrix",
    "rotation_action",
    "reflection_action",
    "to_real",
    "from_real",
    "direct_path",
    "geodesic_path",
    "averaged_q",
    "total_arp",
    "transition_cost",
    "DEFAULT_RESOLUTION",
    "DEFAULT_PATH_SAMPLES",
]

DEFAULT_RESOLUTION = 129
DEFAULT_PATH_SAMPLES = 257
_UNIT_TOL = 1e-10
_CHUNK = 1 << 14


def translate_controls(u, eps, cfg: WaveConfig) -> Controls:
    """Controls whose pattern is the original one moved by ``-eps``.

    ``psi(x + eps; u) == psi(x; translate_controls(u, eps))`` for all ``x``.
    """
    u = as_vector(u, cfg.N)
    eps = np.asarray(eps, dtype=float).reshape(cfg.d)
    return Controls(phase_shift(u, cfg.K.T @ eps))


@dataclass(frozen=True)
class SymmetryAction:
    """Orthogonal map ``R`` realised as a signed permutation of the wavevectors.

    ``R^T k_j = signs[j] k_{sigma[j]}``.  ``perm`` is the induced 1-based
    permutation of the 2N controls, used as a gather: ``(P u)[i] =
    u[perm[i] - 1]``.  With it, ``psi(R x; u) == psi(x; P u)``.
    """

    perm: np.ndarray
    signs: np.ndarray
    sigma: np.ndarray
    R: np.ndarray

    def apply(self, u) -> Controls:
        u = as_vector(u, self.signs.size)
        return Controls(u[self.perm - 1])

    def __call__(self, u) -> Controls:
        return self.apply(u)

    @property
    def is_identity(self) -> bool:
        return bool(np.array_equal(self.perm, np.arange(1, self.perm.size + 1)))


def _check_orthogonal(R, d):
    R = np.asarray(R, dtype=float)
    if R.shape != (d, d):
        raise ValidationError(f"R must be {d}x{d}, got {R.shape}")
    if np.linalg.norm(R.T @ R - np.eye(d)) > 1e-10:
        raise ValidationError("R is not orthogonal (|R^T R - I| > 1e-10)")
    return R


def match_unitary(R, cfg: WaveConfig, tol: float = 1e-8) -> SymmetryAction | None:
    """Signed column permutation with ``R^T K = K D P``, or ``None`` if there is none.

    Requires ``gamma = 0``: with an offset the permuted controls would also
    need per-entry phase corrections.
    """
    R = _check_orthogonal(R, cfg.d)
    if np.any(cfg.gamma != 0):
        raise ValidationError("symmetry actions need gamma = 0")
    N = cfg.N
    RK = R.T @ cfg.K
    sigma = np.full(N, -1, dtype=np.int64)
    signs = np.zeros(N, dtype=np.int64)
    used = set()
    for j in range(N):
        v = RK[:, j]
        dp = np.linalg.norm(cfg.K - v[:, None], axis=0)
        dm = np.linalg.norm(cfg.K + v[:, None], axis=0)
        cand = [(dp[l], l, 1) for l in range(N) if dp[l] < tol]
        cand += [(dm[l], l, -1) for l in range(N) if dm[l] < tol]
        cand = [c for c in sorted(cand) if c[1] not in used]
        if not cand:
            return None
        _, l, s = cand[0]
        used.add(l)
        sigma[j], signs[j] = l, s
    perm = np.empty(2 * N, dtype=np.int64)
    for j in range(N):
        l = sigma[j]
        if signs[j] > 0:
            perm[l], perm[l + N] = j + 1, j + N + 1
        else:
            perm[l], perm[l + N] = j + N + 1, j + 1
    return SymmetryAction(perm, signs, sigma, R)


def rotation_matrix(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def reflection_matrix(phi: float) -> np.ndarray:
    """Reflection across the line through the origin at angle ``phi``."""
    c, s = math.cos(2 * phi), math.sin(2 * phi)
    return np.array([[c, s], [s, -c]])


def _require_fan(cfg):
    if cfg.d != 2:
        raise ValidationError("rotation/reflection actions need a planar fan")
    fan = fan_config(cfg.N, cfg.k).K
    bad = np.flatnonzero(np.linalg.norm(cfg.K - fan, axis=0) > 1e-10)
    if bad.size:
        raise ValidationError(f"not a fan configuration: column {bad[0] + 1} differs")


def rotation_action(cfg: WaveConfig, j: int) -> SymmetryAction:
    """Action of the rotation by ``(j - 1) pi / N`` on a fan configuration."""
    _require_fan(cfg)
    act = match_unitary(rotation_matrix((j - 1) * math.pi / cfg.N), cfg)
    assert act is not None  # every multiple of pi/N maps the fan to itself
    return act


def reflection_action(cfg: WaveConfig, j: int) -> SymmetryAction:
    """Action of the reflection across the line at angle ``(j - 1) pi / (2N)``."""
    _require_fan(cfg)
    act = match_unitary(reflection_matrix((j - 1) * math.pi / (2 * cfg.N)), cfg)
    assert act is not None
    return act


def to_real(u) -> np.ndarray:
    """``[Re u; Im u]``: the norm-preserving isomorphism ``C^{2N} -> R^{4N}``."""
    u = as_vector(u)
    return np.concatenate([u.real, u.imag])


def from_real(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    n = v.size // 2
    return v[:n] + 1j * v[n:]


def _require_unit(u, name):
    n = np.linalg.norm(u)
    if abs(n - 1) > _UNIT_TOL:
        raise ValidationError(f"{name} must have unit norm, got {n:.12g}")


class PathKind(str, Enum):
    DIRECT = "direct"
    GEODESIC = "geodesic"


@dataclass(frozen=True)
class TransitionPath:
    """Constant-power curve of controls, parametrised by arc length on ``[0, arc_length]``.

    ``at(t)`` takes the normalised parameter ``t = s / arc_length`` in ``[0, 1]``;
    both path kinds have constant speed so ``t`` is proportional to arc length.
    """

    kind: PathKind
    u0: np.ndarray
    u1: np.ndarray
    arc_length: float
    # direct: phase vector diag(D) so that u(t) = exp(i t D) u0
    phases: np.ndarray | None = field(default=None, repr=False)
    # geodesic: great-circle segments (start, unit tangent, length) in R^{4N}
    segments: tuple = field(default=(), repr=False)

    def at_arclength(self, s: float) -> np.ndarray:
        if self.arc_length == 0:
            return self.u0.copy()
        return self.at(s / self.arc_length)

    def at(self, t: float) -> np.ndarray:
        if not -1e-12 <= t <= 1 + 1e-12:
            raise ValidationError(f"path parameter {t} outside [0, 1]")
        if t <= 0 or self.arc_length == 0:
            return self.u0.copy()
        if t >= 1:
            return self.u1.copy()
        if self.kind is PathKind.DIRECT:
            return np.exp(1j * t * self.phases) * self.u0
        s = t * self.arc_length
        for start, tangent, length in self.segments:
            if s <= length:
                return from_real(start * math.cos(s) + tangent * math.sin(s))
            s -= length
        return self.u1.copy()

    def sample(self, n: int) -> np.ndarray:
        """``n`` controls at equal arc-length spacing, endpoints included (rows)."""
        if n < 2:
            raise ValidationError("need at least 2 samples")
        return np.array([self.at(i / (n - 1)) for i in range(n)])


def direct_path(u0, eps, cfg: WaveConfig) -> TransitionPath:
    """``u(t) = exp(i t D(K^T eps)) u0`` for ``t`` in ``[0, 1]``: the pattern slides by ``-t eps``."""
    u0 = as_vector(u0, cfg.N)
    _require_unit(u0, "u0")
    eps = np.asarray(eps, dtype=float).reshape(cfg.d)
    ph = diag_phase(cfg.K.T @ eps)
    length = float(np.linalg.norm(ph * u0))
    u1 = np.exp(1j * ph) * u0
    return TransitionPath(PathKind.DIRECT, u0.copy(), u1, length, phases=ph)


def _segment(a, b):
    c = float(np.clip(a @ b, -1.0, 1.0))
    w = b - c * a
    nw = float(np.linalg.norm(w))
    if nw < 1e-15 and c > 0:
        return None
    if c <= -1 + 1e-12 or nw < 1e-15:
        raise ValidationError(
            "antipodal endpoints: the great circle is not unique; pass a waypoint"
        )
    return a, w / nw, math.atan2(nw, c)


def geodesic_path(u0, u1, waypoint=None) -> TransitionPath:
    """Great-circle path from ``u0`` to ``u1`` in the real picture ``R^{4N}``.

    The tangent is ``u1`` with its ``u0`` component removed, then normalised,
    so the curve stays on the sphere.  Antipodal endpoints raise; give a
    ``waypoint`` (unit norm, not antipodal to either end) to route through it.
    """
    u0, u1 = as_vector(u0), as_vector(u1)
    if u0.size != u1.size:
        raise ValidationError("endpoints have different lengths")
    _require_unit(u0, "u0")
    _require_unit(u1, "u1")
    stops = [u0, u1] if waypoint is None else [u0, as_vector(waypoint), u1]
    if waypoint is not None:
        _require_unit(stops[1], "waypoint")
    segs = []
    for a, b in zip(stops[:-1], stops[1:]):
        seg = _segment(to_real(a), to_real(b))
        if seg is not None:
            segs.append(seg)
    length = float(sum(s[2] for s in segs))
    return TransitionPath(PathKind.GEODESIC, u0.copy(), u1.copy(), length, segments=tuple(segs))


def _midpoints(region, resolution, d):
    region = np.asarray(region, dtype=float).reshape(d, 2)
    if np.any(region[:, 1] <= region[:, 0]):
        raise ValidationError("region must have positive measure")
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (d,))
    if np.any(res < 1):
        raise ValidationError("resolution must be >= 1")
    axes = [lo + (np.arange(n) + 0.5) * (hi - lo) / n for (lo, hi), n in zip(region, res)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def averaged_q(region, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
               resolution=DEFAULT_RESOLUTION) -> np.ndarray:
    """Midpoint-rule average of ``Q(x)`` over ``region``.

    The total potential is then the quadratic form ``u^* Qbar u``; ``Qbar`` is
    an average of matrices sharing one spectrum, so its eigenvalues stay
    within ``[lambda_min, lambda_max]`` of ``Q(0)``.
    """
    pts = _midpoints(region, resolution, cfg.d)
    A = spec.matrix(cfg.d)
    N = cfg.N
    Q = np.zeros((2 * N, 2 * N), dtype=complex)
    for start in range(0, len(pts), _CHUNK):
        y = cfg.phases(pts[start:start + _CHUNK])
        ep = np.exp(1j * y)
        em = ep.conj()
        M = np.empty((len(y), cfg.d + 1, 2 * N), dtype=complex)
        M[:, 0, :N] = ep
        M[:, 0, N:] = em
        M[:, 1:, :N] = 1j * cfg.K[None] * ep[:, None, :]
        M[:, 1:, N:] = -1j * cfg.K[None] * em[:, None, :]
        AM = np.einsum("rs,psb->prb", A, M)
        Q += np.einsum("pra,prb->ab", M.conj(), AM)
    Q /= len(pts)
    return (Q + Q.conj().T) / 2


def total_arp(region, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
              resolution=DEFAULT_RESOLUTION) -> float:
    """Average of the potential over ``region`` by the composite midpoint rule."""
    u = as_vector(u, cfg.N)
    Q = averaged_q(region, cfg, spec, resolution)
    return float(np.real(u.conj() @ Q @ u))


def transition_cost(path: TransitionPath, region, cfg: WaveConfig,
                    spec: PotentialSpec = DEFAULT_SPEC, n_samples: int = DEFAULT_PATH_SAMPLES,
                    resolution=DEFAULT_RESOLUTION) -> float:
    """Arc-length integral of the total potential along ``path`` (midpoint rule, ``n_samples`` segments)."""
    if n_samples < 2:
        raise ValidationError("n_samples must be >= 2")
    if path.arc_length == 0:
        return 0.0
    Q = averaged_q(region, cfg, spec, resolution)
    t = (np.arange(n_samples) + 0.5) / n_samples
    U = np.array([path.at(ti) for ti in t])
    vals = np.real(np.einsum("pa,ab,pb->p", U.conj(), Q, U))
    return float(np.sum(vals) * path.arc_length / n_samples)

