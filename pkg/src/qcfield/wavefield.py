"""Plane-wave configurations, pressure fields and acoustic radiation potentials.

A configuration holds ``N`` wavevectors of common length ``k`` in ``R^d`` as the
columns of a ``d x N`` matrix ``K``.  The restricted field in ``R^d`` is the
``N``-dimensional periodic field evaluated on the affine subspace
``y = K^T x + gamma``::

    p_N(y; u) = sum_j alpha_j exp(i y_j) + beta_j exp(-i y_j)
    p_d(x; u) = p_N(K^T x + gamma; u)

and the potential is the quadratic form ``[p; grad p]^* A [p; grad p]``.

Point arguments are vectorised over leading axes: ``x`` may have shape
``(..., d)`` and ``y`` shape ``(..., N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "WaveConfig",
    "Controls",
    "PotentialSpec",
    "DEFAULT_SPEC",
    "as_vector",
    "fan_config",
    "lifted_fan_config",
    "icosahedral_config",
    "diag_phase",
    "phase_shift",
    "pressure_nd",
    "pressure_restricted",
    "pressure_gradient",
    "m_matrix",
    "q_matrix",
    "q_matrix_nd",
    "arp_value",
    "arp_quadratic",
    "arp_nd",
    "spectral_bounds",
    "arp_25d_identity",
]


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class WaveConfig:
    """Wavevector matrix ``K`` (d x N) and affine offset ``gamma`` (N,).

    ``check_norms=False`` skips the equal-length test on the columns.  This is
    only meaningful for pure cut-and-project geometry (e.g. ``K = [phi, 1]``),
    where the columns are not physical wavevectors.
    """

    K: np.ndarray
    gamma: np.ndarray | None = None
    check_norms: bool = True
    k: float = field(init=False)

    def __post_init__(self):
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        if K.ndim != 2:
            raise ValidationError(f"K must be a d x N matrix, got shape {K.shape}")
        d, N = K.shape
        if d < 1 or N < d:
            raise ValidationError(f"need 1 <= d <= N, got d={d}, N={N}")
        if not np.all(np.isfinite(K)):
            raise ValidationError("K has non-finite entries")
        norms = np.linalg.norm(K, axis=0)
        if np.any(norms == 0):
            raise ValidationError(f"K column {int(np.argmin(norms)) + 1} is zero")
        if self.check_norms:
            ref = norms[0]
            bad = np.flatnonzero(np.abs(norms - ref) > 1e-12 * ref)
            if bad.size:
                j = int(bad[0])
                raise ValidationError(
                    f"K column {j + 1} has norm {norms[j]:.17g}, expected {ref:.17g} "
                    "(all wavevectors must share one length)"
                )
        s = np.linalg.svd(K, compute_uv=False)
        if s[-1] <= 1e-10 * s[0]:
            raise ValidationError(f"K is rank deficient (singular values {s})")
        if self.gamma is None:
            gamma = np.zeros(N)
        else:
            gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
            if gamma.shape != (N,):
                raise ValidationError(f"gamma must have length N={N}, got {gamma.size}")
        object.__setattr__(self, "K", _frozen(K))
        object.__setattr__(self, "gamma", _frozen(gamma))
        object.__setattr__(self, "k", float(np.mean(norms)))

    @property
    def d(self) -> int:
        return self.K.shape[0]

    @property
    def N(self) -> int:
        return self.K.shape[1]

    @property
    def wavelength(self) -> float:
        return 2 * np.pi / self.k

    def with_gamma(self, gamma) -> WaveConfig:
        return WaveConfig(self.K, gamma, check_norms=self.check_norms)

    def phases(self, x):
        """Map points ``x`` (..., d) to ``K^T x + gamma`` (..., N)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != (self.d,):
            raise ValidationError(f"points must have trailing dimension d={self.d}, got {x.shape}")
        return x @ self.K + self.gamma

    def __eq__(self, other):
        if not isinstance(other, WaveConfig):
            return NotImplemented
        return (
            self.K.shape == other.K.shape
            and np.array_equal(self.K, other.K)
            and np.array_equal(self.gamma, other.gamma)
        )

    def __hash__(self):
        return hash((self.K.tobytes(), self.gamma.tobytes()))


def fan_config(N: int, k: float = 1.0, gamma=None) -> WaveConfig:
    """Planar fan ``k_j = k [cos((j-1) pi/N), sin((j-1) pi/N)]``."""
    t = np.arange(N) * np.pi / N
    return WaveConfig(k * np.vstack([np.cos(t), np.sin(t)]), gamma)


def lifted_fan_config(N: int = 5) -> WaveConfig:
    """3D config of a planar ``N`` fan lifted to ``z = 0`` plus ``k = e_3``."""
    K2 = fan_config(N).K
    K = np.zeros((3, N + 1))
    K[:2, :N] = K2
    K[2, N] = 1.0
    return WaveConfig(K)


def icosahedral_config() -> WaveConfig:
    """The six icosahedral axis directions, unit length."""
    phi = (1 + np.sqrt(5)) / 2
    K = np.array([
        [0, 1, phi, 0, -1, phi],
        [1, phi, 0, 1, phi, 0],
        [phi, 0, 1, -phi, 0, -1],
    ])
    return WaveConfig(K / np.sqrt(1 + phi**2))


@dataclass(frozen=True)
class Controls:
    """Transducer parameters ``u = [alpha_1..alpha_N, beta_1..beta_N]``."""

    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=complex).reshape(-1)
        if u.size == 0 or u.size % 2:
            raise ValidationError(f"controls need an even, nonzero length 2N, got {u.size}")
        object.__setattr__(self, "u", _frozen(u))

    @classmethod
    def from_ab(cls, alpha, beta) -> Controls:
        alpha, beta = np.ravel(alpha), np.ravel(beta)
        if alpha.size != beta.size:
            raise ValidationError(f"alpha has {alpha.size} entries, beta has {beta.size}")
        return cls(np.concatenate([alpha, beta]))

    @classmethod
    def from_interleaved(cls, values) -> Controls:
        v = np.asarray(values, dtype=float).reshape(-1)
        if v.size % 2:
            raise ValidationError("interleaved controls need an even number of reals")
        return cls(v[0::2] + 1j * v[1::2])

    def to_interleaved(self) -> np.ndarray:
        out = np.empty(2 * self.u.size)
        out[0::2] = self.u.real
        out[1::2] = self.u.imag
        return out

    def normalized(self) -> Controls:
        n = np.linalg.norm(self.u)
        if n == 0:
            raise ValidationError("cannot normalise zero controls")
        return Controls(self.u / n)

    @property
    def N(self) -> int:
        return self.u.size // 2

    @property
    def alpha(self):
        return self.u[: self.N]

    @property
    def beta(self):
        return self.u[self.N :]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.u, dtype=dtype)

    def __len__(self):
        return self.u.size


def as_vector(u, N: int | None = None) -> np.ndarray:
    """Coerce controls (``Controls`` or array-like) to a complex 1-D array."""
    if isinstance(u, Controls):
        v = u.u
    else:
        v = np.asarray(u, dtype=complex).reshape(-1)
    if N is not None and v.size != 2 * N:
        raise ValidationError(f"controls must have length 2N={2 * N}, got {v.size}")
    return v


@dataclass(frozen=True)
class PotentialSpec:
    """Quadratic potential: ``diag(a, -b I_d)`` or a general Hermitian ``A``."""

    a: float | None = None
    b: float | None = None
    A: np.ndarray | None = None

    def __post_init__(self):
        if self.A is None:
            if self.a is None or self.b is None:
                raise ValidationError("diagonal potential needs both a and b")
            object.__setattr__(self, "a", float(self.a))
            object.__setattr__(self, "b", float(self.b))
            return
        if self.a is not None or self.b is not None:
            raise ValidationError("give either (a, b) or A, not both")
        A = np.asarray(self.A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
            raise ValidationError(f"A must be square (d+1)x(d+1), got {A.shape}")
        if np.max(np.abs(A - A.conj().T)) > 1e-12 * max(1.0, np.max(np.abs(A))):
            raise ValidationError("A is not Hermitian")
        object.__setattr__(self, "A", _frozen(A))

    @classmethod
    def diagonal(cls, a: float = 1.0, b: float = 1.0) -> PotentialSpec:
        return cls(a=a, b=b)

    @classmethod
    def general(cls, A) -> PotentialSpec:
        return cls(A=A)

    @property
    def is_diagonal(self) -> bool:
        return self.A is None

    def matrix(self, d: int) -> np.ndarray:
        if self.A is None:
            return np.diag(np.r_[self.a, -self.b * np.ones(d)]).astype(complex)
        if self.A.shape != (d + 1, d + 1):
            raise ValidationError(f"A is {self.A.shape}, config needs {(d + 1, d + 1)}")
        return np.array(self.A)

    def lifted_matrix(self, K) -> np.ndarray:
        """``A_N = diag(1, K^T) A diag(1, K)``; for diagonal specs ``diag(a, -b K^T K)``."""
        K = np.asarray(K, dtype=float)
        d, N = K.shape
        L = np.zeros((d + 1, N + 1))
        L[0, 0] = 1.0
        L[1:, 1:] = K
        return L.T @ self.matrix(d) @ L


DEFAULT_SPEC = PotentialSpec.diagonal(1.0, 1.0)


def diag_phase(h) -> np.ndarray:
    """Diagonal of ``D(h) = diag(h, -h)``."""
    h = np.asarray(h, dtype=float).reshape(-1)
    return np.concatenate([h, -h])


def phase_shift(u, h) -> np.ndarray:
    """``exp(i D(h)) u``: unit-modulus rescaling of each control."""
    u = as_vector(u)
    h = np.asarray(h, dtype=float).reshape(-1)
    if u.size != 2 * h.size:
        raise ValidationError(f"phase vector has length {h.size}, controls need {u.size // 2}")
    return np.exp(1j * diag_phase(h)) * u


def _split(u, N):
    u = as_vector(u, N)
    return u[:N], u[N:]


def pressure_nd(y, u):
    """``p_N(y; u)`` with the canonical basis as wavevectors."""
    y = np.asarray(y, dtype=float)
    N = y.shape[-1] if y.ndim else 1
    alpha, beta = _split(u, N)
    e = np.exp(1j * y)
    return e @ alpha + e.conj() @ beta


def _grad_nd(y, alpha, beta):
    e = np.exp(1j * y)
    return 1j * (e * alpha - e.conj() * beta)


def pressure_restricted(x, u, cfg: WaveConfig):
    return pressure_nd(cfg.phases(x), u)


def pressure_gradient(x, u, cfg: WaveConfig):
    """Spatial gradient of ``p_d``, shape (..., d)."""
    alpha, beta = _split(u, cfg.N)
    return _grad_nd(cfg.phases(x), alpha, beta) @ cfg.K.T


def m_matrix(x, cfg: WaveConfig) -> np.ndarray:
    """``M(x) = [M_+, M_-]``, the (d+1) x 2N map from controls to ``[p; grad p]``."""
    y = cfg.phases(np.asarray(x, dtype=float).reshape(cfg.d))
    ep = np.exp(1j * y)
    em = ep.conj()
    top = np.concatenate([ep, em])[None, :]
    bottom = np.hstack([1j * cfg.K * ep, -1j * cfg.K * em])
    return np.vstack([top, bottom])


def q_matrix(x, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Hermitian ``Q(x) = M(x)^* A M(x)`` with ``psi(x; u) = u^* Q(x) u``."""
    M = m_matrix(x, cfg)
    Q = M.conj().T @ spec.matrix(cfg.d) @ M
    return (Q + Q.conj().T) / 2


def q_matrix_nd(y, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """``Q_N(y)`` for the lifted potential, at an arbitrary point of ``R^N``."""
    ident = WaveConfig(np.eye(cfg.N), check_norms=False)
    M = m_matrix(np.asarray(y, dtype=float).reshape(cfg.N), ident)
    Q = M.conj().T @ spec.lifted_matrix(cfg.K) @ M
    return (Q + Q.conj().T) / 2


def _quad(p, gp, spec, d):
    if spec.is_diagonal:
        return spec.a * np.abs(p) ** 2 - spec.b * np.sum(np.abs(gp) ** 2, axis=-1)
    w = np.concatenate([np.asarray(p)[..., None], gp], axis=-1)
    return np.einsum("...i,ij,...j->...", w.conj(), spec.matrix(d), w).real


def arp_value(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC):
    """Potential evaluated directly from ``p`` and ``grad p`` (fast path)."""
    alpha, beta = _split(u, cfg.N)
    y = cfg.phases(x)
    e = np.exp(1j * y)
    p = e @ alpha + e.conj() @ beta
    gp = (1j * (e * alpha - e.conj() * beta)) @ cfg.K.T
    return _quad(p, gp, spec, cfg.d)


def arp_quadratic(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> float:
    """Potential as the quadratic form ``u^* Q(x) u`` at a single point."""
    u = as_vector(u, cfg.N)
    return float(np.real(u.conj() @ q_matrix(x, cfg, spec) @ u))


def arp_nd(y, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC):
    """``psi_N(y; u)`` built with ``A_N``; 2*pi periodic in every coordinate."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1:] != (cfg.N,):
        raise ValidationError(f"y must have trailing dimension N={cfg.N}, got {y.shape}")
    alpha, beta = _split(u, cfg.N)
    e = np.exp(1j * y)
    p = e @ alpha + e.conj() @ beta
    # A_N = L^T A L with L = diag(1, K), so only K grad p_N enters
    gp = (1j * (e * alpha - e.conj() * beta)) @ cfg.K.T
    return _quad(p, gp, spec, cfg.d)


def spectral_bounds(cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC):
    """``(lambda_min, lambda_max)`` of ``Q``; every unit-norm ``psi`` lies between them.

    ``Q(x)`` is unitarily similar to ``Q_N(0)`` for every ``x`` and ``gamma``,
    so the bounds hold on the whole space.  Scale by ``|u|^2`` for
    non-normalised controls.
    """
    w = np.linalg.eigvalsh(q_matrix_nd(np.zeros(cfg.N), cfg, spec))
    return float(w[0]), float(w[-1])


def _is_lifted_template(cfg_3d: WaveConfig, cfg_2d: WaveConfig) -> bool:
    if cfg_3d.d != 3 or cfg_2d.d != 2 or cfg_3d.N != cfg_2d.N + 1:
        return False
    n = cfg_2d.N
    K3 = cfg_3d.K
    return (
        np.allclose(K3[:2, :n], cfg_2d.K, atol=1e-12)
        and np.allclose(K3[2, :n], 0, atol=1e-12)
        and np.allclose(K3[:, n], [0, 0, 1], atol=1e-12)
        and not np.any(cfg_3d.gamma)
        and not np.any(cfg_2d.gamma)
    )


def arp_25d_identity(x, cfg_3d: WaveConfig, cfg_2d: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC):
    """Both sides of the slice decomposition of the lifted-fan 3D potential.

    With ``alpha_j = -beta_j = 1`` the 3D pressure is ``p_2 + 2i sin(x_3)``,
    which gives::

        psi_3(x) = psi_2(x~) + 4a sin^2 x_3 - 4b cos^2 x_3 + 4a sin(x_3) Im p_2(x~)

    Returns ``(lhs, rhs)``, vectorised over leading axes of ``x``.
    """
    if not spec.is_diagonal:
        raise ValidationError("the slice identity needs a diagonal potential")
    if not _is_lifted_template(cfg_3d, cfg_2d):
        raise ValidationError("cfg_3d must be cfg_2d lifted to z=0 plus the unit vector e_3")
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise ValidationError(f"x must have trailing dimension 3, got {x.shape}")
    n3, n2 = cfg_3d.N, cfg_2d.N
    u3 = np.r_[np.ones(n3), -np.ones(n3)]
    u2 = np.r_[np.ones(n2), -np.ones(n2)]
    xt, x3 = x[..., :2], x[..., 2]
    lhs = arp_value(x, u3, cfg_3d, spec)
    s, c = np.sin(x3), np.cos(x3)
    rhs = (
        arp_value(xt, u2, cfg_2d, spec)
        + 4 * spec.a * s**2
        - 4 * spec.b * c**2
        + 4 * spec.a * s * pressure_restricted(xt, u2, cfg_2d).imag
    )
    return lhs, rhs
