"""Periodic vs quasiperiodic classification of a wavevector configuration.

The restricted field is periodic exactly when ``range(K^T)`` contains ``d``
independent vectors of ``2 pi Z^N``.  Since ``range(K^T) = null(K)^perp``, an
integer vector ``n`` is such a witness iff ``Z^T n = 0`` for an orthonormal
null-space basis ``Z``.  With floating-point ``K`` this can only be tested up
to a tolerance and inside a search box ``|n|_inf <= bound``; the report says
so explicitly.

Two search strategies are available.  ``enumerate`` scans the whole box and
is exhaustive by construction.  ``lattice`` LLL-reduces the integer lattice
``{(n, w Z^T n)}`` with a large weight ``w`` so that near-relations become
short vectors, then certifies exhaustiveness with a Gram-Schmidt bound.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .calculus import null_basis
from .errors import ValidationError
from .wavefield import WaveConfig

__all__ = [
    "Verdict",
    "PeriodicityReport",
    "classify",
    "lattice_translations",
    "moire_angle",
    "moire_cosine",
    "moire_wavevectors",
]

DEFAULT_BOUND = 1000
DEFAULT_TOL = 1e-9
_ENUM_LIMIT = 2_000_000


class Verdict(str, Enum):
    PERIODIC = "Periodic"
    QUASIPERIODIC = "Quasiperiodic"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class PeriodicityReport:
    verdict: Verdict
    lattice_dim: int
    witnesses: list
    search_bound: int
    tolerance: float
    certified: bool
    method: str
    d: int = field(repr=False)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "lattice_dim": self.lattice_dim,
            "witnesses": [list(map(int, w)) for w in self.witnesses],
            "search_bound": self.search_bound,
            "tolerance": self.tolerance,
            "certified": self.certified,
            "method": self.method,
        }


def _is_witness(n, Z, tol):
    n = np.asarray(n, dtype=float)
    nn = np.linalg.norm(n)
    return nn > 0 and np.linalg.norm(Z.T @ n) < tol * max(1.0, nn)


def _independent_subset(vectors):
    """Greedy, shortest-first selection of linearly independent integer vectors."""
    chosen = []
    for v in sorted(vectors, key=lambda a: (float(np.dot(a, a)), tuple(-abs(int(t)) for t in a), tuple(a))):
        trial = np.array(chosen + [v], dtype=float)
        if np.linalg.matrix_rank(trial, tol=1e-9) > len(chosen):
            chosen.append(v)
    return chosen


def _canon(v):
    # sign convention: first nonzero entry positive
    v = np.asarray(v, dtype=np.int64)
    nz = np.flatnonzero(v)
    if nz.size and v[nz[0]] < 0:
        v = -v
    return tuple(int(t) for t in v)


def _enumerate(Z, bound, tol, N):
    found = []
    side = np.arange(-bound, bound + 1)
    # split off the first coordinate so each block stays small
    rest = np.array(list(itertools.product(side, repeat=N - 1)), dtype=np.int64).reshape(-1, N - 1)
    proj_rest = rest @ Z[1:, :] if N > 1 else np.zeros((1, Z.shape[1]))
    norm_rest = np.sum(rest.astype(float) ** 2, axis=1) if N > 1 else np.zeros(1)
    for c in range(0, bound + 1):  # n and -n are the same witness
        proj = proj_rest + c * Z[0, :]
        nrm = np.sqrt(norm_rest + c * c)
        ok = np.linalg.norm(proj, axis=1) < tol * np.maximum(1.0, nrm)
        ok &= nrm > 0
        for idx in np.flatnonzero(ok):
            n = np.r_[c, rest[idx]] if N > 1 else np.array([c])
            found.append(_canon(n))
    return sorted(set(found))


def _lll_rows(B):
    from sympy import ZZ
    from sympy.polys.matrices import DomainMatrix

    M = DomainMatrix([[ZZ(int(v)) for v in row] for row in B], (len(B), len(B[0])), ZZ)
    R = M.lll().to_Matrix()
    return [[int(R[i, j]) for j in range(R.shape[1])] for i in range(R.shape[0])]


def _lattice_search(Z, bound, tol, N):
    m = Z.shape[1]
    shift = 2**20
    weight = 1.0 / tol
    basis = []
    for i in range(N):
        row = [0] * N + [int(round(v * weight * shift)) for v in Z[i]]
        row[i] = shift
        basis.append(row)
    red = _lll_rows(basis)
    coeffs = [np.array(r[:N], dtype=np.int64) // shift for r in red]
    rel = [c for c in coeffs if _is_witness(c, Z, tol)]
    others = [np.array(r, dtype=float) for r, c in zip(red, coeffs) if not _is_witness(c, Z, tol)]
    rel_rows = [np.array(r, dtype=float) for r, c in zip(red, coeffs) if _is_witness(c, Z, tol)]

    # Any lattice vector outside span(relations) is at least as long as the
    # smallest Gram-Schmidt norm of the remaining basis vectors (relations
    # first).  Every witness in the box has weighted norm below
    # sqrt(2 N) * bound, so exceeding that certifies the search.
    certified = True
    if others:
        ordered = np.array(rel_rows + others).T / shift
        R = np.linalg.qr(ordered, mode="r")
        gs = np.abs(np.diag(R))[len(rel_rows):]
        radius = math.sqrt(2 * N) * bound * (1 + 1e-6) + N
        certified = bool(gs.min() > radius)

    # combine the relation basis to reach witnesses inside the box
    found = set()
    r = len(rel)
    span = range(-2, 3) if r <= 3 else range(-1, 2)
    for c in itertools.product(span, repeat=r):
        if not any(c):
            continue
        n = sum(ci * v for ci, v in zip(c, rel))
        if np.max(np.abs(n)) <= bound and _is_witness(n, Z, tol):
            found.add(_canon(n))
    return sorted(found), certified


def classify(cfg: WaveConfig, bound: int = DEFAULT_BOUND, tol: float = DEFAULT_TOL,
             method: str = "auto") -> PeriodicityReport:
    """Search integer ``n`` with ``|n|_inf <= bound`` and ``|Z^T n| < tol max(1, |n|)``.

    ``lattice_dim`` is the rank of the witnesses found.  ``Periodic`` when it
    equals ``d``; ``Quasiperiodic`` when it is smaller and the search is
    certified exhaustive for the box; otherwise ``Indeterminate``.
    """
    if bound < 1:
        raise ValidationError("bound must be >= 1")
    if tol <= 0:
        raise ValidationError("tol must be positive")
    N, d = cfg.N, cfg.d
    if method == "auto":
        method = "enumerate" if (2 * bound + 1) ** N <= _ENUM_LIMIT else "lattice"
    if N == d:
        # range(K^T) is all of R^N: the unit vectors are witnesses
        witnesses = [tuple(int(v) for v in row) for row in np.eye(N, dtype=int)]
        return PeriodicityReport(Verdict.PERIODIC, d, witnesses, bound, tol, True, method, d)
    Z = null_basis(cfg).Z
    if method == "enumerate":
        if (2 * bound + 1) ** N > 50 * _ENUM_LIMIT:
            raise ValidationError(f"box of {(2 * bound + 1) ** N} points is too large to enumerate")
        found, certified = _enumerate(Z, bound, tol, N), True
    elif method == "lattice":
        found, certified = _lattice_search(Z, bound, tol, N)
    else:
        raise ValidationError(f"unknown method {method!r}")
    basis = _independent_subset([np.array(w) for w in found])
    witnesses = [tuple(int(t) for t in w) for w in basis]
    dim = len(witnesses)
    if dim >= d:
        verdict = Verdict.PERIODIC
    elif certified:
        verdict = Verdict.QUASIPERIODIC
    else:
        verdict = Verdict.INDETERMINATE
    return PeriodicityReport(verdict, dim, witnesses, bound, tol, certified, method, d)


def lattice_translations(cfg: WaveConfig, witnesses) -> np.ndarray:
    """Solve ``K^T x = 2 pi n`` for each witness; rows are translation vectors.

    Raises when a witness is not (numerically) in ``range(K^T)``.
    """
    out = []
    for n in witnesses:
        rhs = 2 * np.pi * np.asarray(n, dtype=float)
        x, *_ = np.linalg.lstsq(cfg.K.T, rhs, rcond=None)
        res = np.linalg.norm(cfg.K.T @ x - rhs)
        if res > 1e-8 * max(1.0, np.linalg.norm(rhs)):
            raise ValidationError(f"witness {tuple(n)} is not in range(K^T) (residual {res:.3g})")
        out.append(x)
    return np.array(out).reshape(len(out), cfg.d)


def moire_cosine(m: int, r: int):
    """Rational cosine of the commensurate twist angle as ``(numerator, denominator)``.

    ``cos theta = (3m^2 + 3mr + r^2/2) / (3m^2 + 3mr + r^2)``, doubled to keep
    integers.
    """
    num = 2 * (3 * m * m + 3 * m * r) + r * r
    den = 2 * (3 * m * m + 3 * m * r + r * r)
    return num, den


def moire_angle(m: int, r: int) -> float:
    """Commensurate twist angle of two hexagonal lattices, in radians."""
    if int(m) != m or int(r) != r or m == 0 or r == 0:
        raise ValidationError("m and r must be nonzero integers")
    if math.gcd(int(m), int(r)) != 1:
        raise ValidationError(f"m={m} and r={r} are not coprime")
    num, den = moire_cosine(int(m), int(r))
    theta = math.acos(num / den)
    if not 0 < theta < math.pi / 3:
        raise ValidationError(f"(m, r) = ({m}, {r}) gives theta={theta} outside (0, pi/3)")
    return theta


def moire_wavevectors(theta: float) -> WaveConfig:
    """Two hexagonal wave pairs, the second rotated by ``theta`` (d=2, N=4)."""
    if not 0 < theta < math.pi / 3:
        raise ValidationError("theta must lie in (0, pi/3)")
    k1 = np.array([math.sqrt(3) / 2, 0.5])
    k2 = np.array([-math.sqrt(3) / 2, 0.5])
    c, s = math.cos(theta), math.sin(theta)
    R = np.array([[c, -s], [s, c]])
    return WaveConfig(np.column_stack([k1, k2, R @ k1, R @ k2]))
