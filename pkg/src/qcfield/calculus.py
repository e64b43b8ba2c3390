"""Derivatives of the potential, eigen-synthesis of minima and constraint geometry.

The analytic formulas come from expanding ``Q(x0 + eps)`` with the
translation relation ``Q(x0 + eps) = E^* Q(x0) E``, ``E = exp(i D(K^T eps))``::

    grad psi = 2 [K, -K] Im(conj(u) * (Q u))
    hess psi = 2 Re([K, -K] (diag(conj u) Q diag(u) - Re diag(conj(u) * Q u)) [K^T; -K^T])

Finite-difference oracles (:func:`fd_gradient`, :func:`fd_hessian`,
:func:`check_derivatives`) are public so custom potentials can be validated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ValidationError
from .wavefield import (
    DEFAULT_SPEC,
    PotentialSpec,
    WaveConfig,
    arp_nd,
    arp_value,
    as_vector,
    phase_shift,
    q_matrix,
    q_matrix_nd,
)

__all__ = [
    "arp_gradient",
    "arp_hessian",
    "arp_gradient_nd",
    "arp_hessian_nd",
    "arp_gradient_restricted",
    "arp_hessian_restricted",
    "fd_gradient",
    "fd_hessian",
    "check_derivatives",
    "EigenDecomp",
    "MinControls",
    "eigen_decomp",
    "synthesize_min_controls",
    "NullBasis",
    "null_basis",
    "dual_basis",
    "lagrange_multipliers",
    "kkt_residual",
    "phase_sensitivity",
    "LevelSetFamily",
    "level_set_family",
]


def _grad_from_q(Q, u, KK):
    # KK = [K, -K]
    return 2 * KK @ np.imag(u.conj() * (Q @ u))


def _hess_from_q(Q, u, KK):
    Qu = Q @ u
    inner = (u.conj()[:, None] * Q) * u[None, :] - np.diag(np.real(u.conj() * Qu))
    H = 2 * np.real(KK @ inner @ KK.T)
    return (H + H.T) / 2


def arp_gradient(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Spatial gradient of ``psi_d`` at ``x`` from the closed-form expression."""
    u = as_vector(u, cfg.N)
    KK = np.hstack([cfg.K, -cfg.K])
    return _grad_from_q(q_matrix(x, cfg, spec), u, KK)


def arp_hessian(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Spatial Hessian of ``psi_d`` at ``x`` (real symmetric d x d)."""
    u = as_vector(u, cfg.N)
    KK = np.hstack([cfg.K, -cfg.K])
    return _hess_from_q(q_matrix(x, cfg, spec), u, KK)


def arp_gradient_nd(y, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Gradient of the lifted ``psi_N`` in periodic coordinates ``y`` (N-vector)."""
    u = as_vector(u, cfg.N)
    KK = np.hstack([np.eye(cfg.N), -np.eye(cfg.N)])
    return _grad_from_q(q_matrix_nd(y, cfg, spec), u, KK)


def arp_hessian_nd(y, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    u = as_vector(u, cfg.N)
    KK = np.hstack([np.eye(cfg.N), -np.eye(cfg.N)])
    return _hess_from_q(q_matrix_nd(y, cfg, spec), u, KK)


def arp_gradient_restricted(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Chain rule: ``K grad_y psi_N(K^T x + gamma)``."""
    return cfg.K @ arp_gradient_nd(cfg.phases(x), u, cfg, spec)


def arp_hessian_restricted(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """Chain rule: ``K hess_y psi_N(K^T x + gamma) K^T``."""
    H = cfg.K @ arp_hessian_nd(cfg.phases(x), u, cfg, spec) @ cfg.K.T
    return (H + H.T) / 2


def fd_gradient(f, x, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def fd_hessian(f, x, step: float = 1e-4) -> np.ndarray:
    """Second-order central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=float)
    n = x.size
    H = np.empty((n, n))
    f0 = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = step
        H[i, i] = (f(x + ei) - 2 * f0 + f(x - ei)) / step**2
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = step
            H[i, j] = H[j, i] = (
                f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)
            ) / (4 * step**2)
    return H


def _derivative_scale(u, cfg, spec):
    # natural size of psi'' : |u|^2 * spectral radius of Q * k^2
    w = np.linalg.eigvalsh(q_matrix_nd(np.zeros(cfg.N), cfg, spec))
    return np.vdot(u, u).real * max(abs(w[0]), abs(w[-1])) * cfg.k**2


def check_derivatives(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
                      grad_step: float = 1e-5, hess_step: float = 1e-4) -> dict:
    """Compare analytic derivatives with finite differences of :func:`arp_value`.

    Errors are relative to ``max(|analytic|, scale)`` where ``scale`` is
    ``|u|^2 rho(Q) k`` (gradient) or ``|u|^2 rho(Q) k^2`` (Hessian); the floor
    keeps the ratio meaningful near stationary points.
    """
    u = as_vector(u, cfg.N)
    x = np.asarray(x, dtype=float)

    def f(z):
        return float(arp_value(z, u, cfg, spec))

    g = arp_gradient(x, u, cfg, spec)
    H = arp_hessian(x, u, cfg, spec)
    g_fd = fd_gradient(f, x, grad_step)
    H_fd = fd_hessian(f, x, hess_step)
    s2 = _derivative_scale(u, cfg, spec)
    s1 = s2 / cfg.k
    return {
        "gradient": g,
        "hessian": H,
        "gradient_fd": g_fd,
        "hessian_fd": H_fd,
        "gradient_error": float(np.linalg.norm(g - g_fd) / max(np.linalg.norm(g), s1)),
        "hessian_error": float(np.linalg.norm(H - H_fd) / max(np.linalg.norm(H), s2)),
    }


@dataclass(frozen=True)
class EigenDecomp:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def residuals(self, Q) -> np.ndarray:
        V, w = self.eigenvectors, self.eigenvalues
        return np.linalg.norm(Q @ V - V * w, axis=0)


def eigen_decomp(x0, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> EigenDecomp:
    """Ascending eigenpairs of the Hermitian ``Q(x0)``."""
    w, V = np.linalg.eigh(q_matrix(x0, cfg, spec))
    return EigenDecomp(w, V)


@dataclass(frozen=True)
class MinControls:
    """Unit controls whose potential has a global minimum at ``x0``."""

    u: np.ndarray
    eigenvalue: float
    multiplicity: int
    eigenspace: np.ndarray
    x0: np.ndarray


def _canonical_vector(V):
    """Deterministic unit vector of ``span(V)``, independent of the basis chosen."""
    P = V @ V.conj().T
    norms = np.linalg.norm(P, axis=0)
    j = int(np.flatnonzero(norms >= norms.max() * (1 - 1e-9))[0])
    v = P[:, j] / norms[j]
    return v * (abs(v[j]) / v[j])


def synthesize_min_controls(x0, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
                            gap_tol: float = 1e-9) -> MinControls:
    """Pick ``u`` as a minimum eigenvector of ``Q(x0)``.

    Then ``psi(x0; u) = lambda_min`` is the global minimum of ``psi`` over the
    whole space.  When the smallest eigenvalue is repeated (gap below
    ``gap_tol`` times the spectral radius) every vector of the eigenspace
    works; the one returned is fixed by the eigenspace alone, and
    ``multiplicity`` reports the degeneracy.
    """
    x0 = np.asarray(x0, dtype=float).reshape(cfg.d)
    ed = eigen_decomp(x0, cfg, spec)
    w = ed.eigenvalues
    scale = max(abs(w[0]), abs(w[-1]), np.finfo(float).tiny)
    mult = int(np.sum(w - w[0] <= gap_tol * scale))
    basis = ed.eigenvectors[:, :mult]
    u = basis[:, 0] if mult == 1 else _canonical_vector(basis)
    if mult == 1:
        j = int(np.argmax(np.abs(u)))
        u = u * (abs(u[j]) / u[j])
    return MinControls(u=u, eigenvalue=float(w[0]), multiplicity=mult, eigenspace=basis, x0=x0)


@dataclass(frozen=True)
class NullBasis:
    """Orthonormal columns spanning ``null(K)``; shape N x (N - d)."""

    Z: np.ndarray

    @property
    def dim(self) -> int:
        return self.Z.shape[1]


def null_basis(cfg: WaveConfig) -> NullBasis:
    Z = scipy.linalg.null_space(cfg.K, rcond=1e-10)
    if Z.shape[1] != cfg.N - cfg.d:
        raise ValidationError(f"K has rank {cfg.N - Z.shape[1]}, expected {cfg.d}")
    # fix column signs for reproducibility
    for j in range(Z.shape[1]):
        i = int(np.argmax(np.abs(Z[:, j])))
        if Z[i, j] < 0:
            Z[:, j] = -Z[:, j]
    Z.setflags(write=False)
    return NullBasis(Z)


def dual_basis(cfg: WaveConfig) -> np.ndarray:
    """Columns ``a_i`` with ``k_j . a_i = 2 pi delta_ij`` (square ``K`` only)."""
    if cfg.d != cfg.N:
        raise ValidationError("dual lattice vectors need a square K (N = d)")
    return 2 * np.pi * np.linalg.inv(cfg.K.T)


def lagrange_multipliers(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
                         Z: NullBasis | None = None) -> np.ndarray:
    """``Z^T grad_y psi_N(K^T x + gamma)``, the multiplier field of the cut constraint."""
    Z = Z or null_basis(cfg)
    return Z.Z.T @ arp_gradient_nd(cfg.phases(x), u, cfg, spec)


def kkt_residual(x, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC) -> np.ndarray:
    """``grad_y psi_N - Z lambda``; lies in ``range(K^T)`` and vanishes at stationary points."""
    Z = null_basis(cfg)
    g = arp_gradient_nd(cfg.phases(x), u, cfg, spec)
    return g - Z.Z @ (Z.Z.T @ g)


def phase_sensitivity(x, u, h, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC):
    """First-order change of ``psi_d(x)`` under ``u -> exp(i eps D(h)) u``.

    Vectorised over leading axes of ``x``.
    """
    h = np.asarray(h, dtype=float).reshape(-1)
    if h.size != cfg.N:
        raise ValidationError(f"h must have length N={cfg.N}")
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(arp_gradient_nd(cfg.phases(x), u, cfg, spec) @ h)
    flat = x.reshape(-1, cfg.d)
    out = np.array([arp_gradient_nd(cfg.phases(p), u, cfg, spec) @ h for p in flat])
    return out.reshape(x.shape[:-1])


@dataclass(frozen=True)
class LevelSetFamily:
    """Affine subspaces inside the level set ``{psi = lam}`` of a real eigenvector.

    ``S_n = span{a_j : j in zero_idx} + sum_{i in support} n_i a_i / 2``.
    Only the parity of ``n`` matters for admissibility, so ``sign_vectors``
    lists admissible patterns in ``{0, 1}^|support|``.
    """

    eigenvalue: float
    u: np.ndarray
    sign: int
    zero_idx: tuple
    support: tuple
    sign_vectors: tuple
    dual: np.ndarray
    cfg: WaveConfig
    spec: PotentialSpec

    @property
    def base_space(self) -> np.ndarray:
        """Spanning vectors of ``S_0`` as columns."""
        return self.dual[:, list(self.zero_idx)]

    def offset(self, n) -> np.ndarray:
        n = np.asarray(n)
        return self.dual[:, list(self.support)] @ n / 2

    def sample(self, n, count: int, rng=None, spread: float = 10.0) -> np.ndarray:
        """Random points of ``S_n``; ``n`` may be any integer vector of admissible parity."""
        rng = np.random.default_rng(rng)
        n = np.asarray(n, dtype=int)
        parity = tuple(int(v) for v in np.mod(n, 2))
        if parity not in self.sign_vectors:
            raise ValidationError(f"sign pattern {parity} is not admissible")
        B = self.base_space
        coeff = rng.uniform(-spread, spread, size=(count, B.shape[1]))
        return self.offset(n) + coeff @ B.T


def level_set_family(u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
                     tol: float = 1e-10, max_support: int = 20) -> LevelSetFamily:
    """Level-set family for a real eigenvector ``u = [v; +-v]`` of ``Q(0)`` (square K)."""
    u = as_vector(u, cfg.N)
    N = cfg.N
    if np.max(np.abs(u.imag)) > tol:
        raise ValidationError("controls must be real")
    ur = u.real
    if abs(np.linalg.norm(ur) - 1) > 1e-9:
        raise ValidationError("controls must have unit norm")
    v, w = ur[:N], ur[N:]
    if np.max(np.abs(w - v)) <= tol:
        sign = 1
    elif np.max(np.abs(w + v)) <= tol:
        sign = -1
    else:
        raise ValidationError("controls are not of the form [v; v] or [v; -v]")
    dual = dual_basis(cfg)
    Q0 = q_matrix(np.zeros(cfg.d), cfg, spec)
    lam = float(np.real(ur @ Q0 @ ur))
    if np.linalg.norm(Q0 @ ur - lam * ur) > 1e-9:
        raise ValidationError("controls are not an eigenvector of Q(0)")
    zero_idx = tuple(int(j) for j in np.flatnonzero(np.abs(v) <= tol))
    support = tuple(int(j) for j in np.flatnonzero(np.abs(v) > tol))
    if len(support) > max_support:
        raise ValidationError(f"support of size {len(support)} exceeds the enumeration cap {max_support}")
    admissible = []
    for n in itertools.product((0, 1), repeat=len(support)):
        vv = v.copy()
        vv[list(support)] *= (-1.0) ** np.array(n)
        cand = np.r_[vv, sign * vv]
        if np.linalg.norm(Q0 @ cand - lam * cand) < 1e-8:
            admissible.append(tuple(n))
    return LevelSetFamily(
        eigenvalue=lam, u=ur, sign=sign, zero_idx=zero_idx, support=support,
        sign_vectors=tuple(admissible), dual=dual, cfg=cfg, spec=spec,
    )
