"""Cut-and-project tilings of the restricted space.

Lattice points ``2 pi c`` (``c`` integer) have cube Voronoi cells
``prod_j [2 pi c_j - pi, 2 pi c_j + pi]``.  A cell belongs to the tiling when
it meets the affine subspace ``y = K^T x + gamma``; its node is the orthogonal
projection of the centre onto that subspace.  Two nodes share an edge when
their centres differ by one unit vector (face adjacency).
"""

from __future__ import annotations

import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import ResourceCapError, ValidationError
from .wavefield import WaveConfig

__all__ = [
    "TilingGraph",
    "Tiling1D",
    "TileStatistics",
    "cell_constraints",
    "cell_intersects_subspace",
    "project_center",
    "build_tiling",
    "tiling_1d",
    "tile_symbols",
    "sequence_period",
    "tile_statistics",
]

_BOUNDARY_TOL = 1e-9


def cell_constraints(c, cfg: WaveConfig):
    """Bounds ``lo <= K^T x <= hi`` describing the cell of centre ``2 pi c``."""
    c = np.asarray(c, dtype=float).reshape(cfg.N)
    mid = 2 * np.pi * c - cfg.gamma
    return mid - np.pi, mid + np.pi


def _clip(poly, a, b, tol):
    """Clip a convex polygon (m x 2) by ``a . x <= b``; boundary points kept."""
    if len(poly) == 0:
        return poly
    s = poly @ a - b
    inside = s <= tol
    if inside.all():
        return poly
    if not inside.any():
        return poly[:0]
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        sp, sq = s[i], s[(i + 1) % m]
        if sp <= tol:
            out.append(p)
        if (sp <= tol) != (sq <= tol):
            t = sp / (sp - sq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def _box(cfg, lo, hi, region):
    if region is not None:
        return np.asarray(region, dtype=float).reshape(cfg.d, 2)
    # any feasible x has |K^T x| <= max(|lo|,|hi|), bounded via the smallest singular value
    smin = np.linalg.svd(cfg.K, compute_uv=False)[-1]
    R = (np.linalg.norm(np.maximum(np.abs(lo), np.abs(hi))) + 1.0) / smin + 1.0
    return np.array([[-R, R]] * cfg.d)


def _feasible_1d(cfg, lo, hi, box):
    k = cfg.K[0]
    a = np.where(k > 0, lo / k, hi / k)
    b = np.where(k > 0, hi / k, lo / k)
    left = max(np.max(a), box[0, 0])
    right = min(np.min(b), box[0, 1])
    if left <= right + _BOUNDARY_TOL:
        return True, np.array([(left + right) / 2 if left <= right else left])
    return False, None


def _feasible_2d(cfg, lo, hi, box):
    poly = np.array([[box[0, 0], box[1, 0]], [box[0, 1], box[1, 0]],
                     [box[0, 1], box[1, 1]], [box[0, 0], box[1, 1]]])
    scale = max(1.0, float(np.max(np.abs(box))))
    tol = _BOUNDARY_TOL * 1e-3 * scale
    for j in range(cfg.N):
        kj = cfg.K[:, j]
        poly = _clip(poly, kj, hi[j], tol)
        poly = _clip(poly, -kj, -lo[j], tol)
        if len(poly) == 0:
            return False, None
    return True, poly.mean(axis=0)


def _feasible_lp(cfg, lo, hi, box):
    A = np.vstack([cfg.K.T, -cfg.K.T])
    b = np.r_[hi, -lo] + _BOUNDARY_TOL * 1e-2
    res = linprog(np.zeros(cfg.d), A_ub=A, b_ub=b, bounds=[tuple(r) for r in box], method="highs")
    if res.status == 0:
        return True, res.x
    return False, None


def cell_intersects_subspace(c, cfg: WaveConfig, region=None, solver: str = "auto"):
    """Test whether cell ``c`` meets ``{K^T x + gamma}`` (optionally with ``x`` in ``region``).

    Returns ``(feasible, witness)``.  Touching the boundary counts as meeting
    (closed cells).  ``solver`` is ``'interval'`` (d=1), ``'clip'`` (d=2,
    half-plane clipping), ``'lp'`` (any d) or ``'auto'``.
    """
    lo, hi = cell_constraints(c, cfg)
    box = _box(cfg, lo, hi, region)
    if solver == "auto":
        solver = {1: "interval", 2: "clip"}.get(cfg.d, "lp")
    if solver == "interval":
        if cfg.d != 1:
            raise ValidationError("interval solver needs d=1")
        return _feasible_1d(cfg, lo, hi, box)
    if solver == "clip":
        if cfg.d != 2:
            raise ValidationError("clipping solver needs d=2")
        return _feasible_2d(cfg, lo, hi, box)
    if solver == "lp":
        return _feasible_lp(cfg, lo, hi, box)
    raise ValidationError(f"unknown solver {solver!r}")


def project_center(c, cfg: WaveConfig) -> np.ndarray:
    """Parameter ``x`` of the orthogonal projection of ``2 pi c`` onto the subspace."""
    c = np.asarray(c, dtype=float)
    rhs = cfg.K @ (2 * np.pi * c - cfg.gamma).T
    return np.linalg.solve(cfg.K @ cfg.K.T, rhs).T


@dataclass
class TilingGraph:
    centers: np.ndarray  # (n, N) int
    points: np.ndarray  # (n, d) projected nodes
    edges: np.ndarray  # (m, 2) int, i < j
    edge_dirs: np.ndarray  # (m,) int, index of the unit step e_j
    region: np.ndarray  # (d, 2)
    witnesses: np.ndarray = field(repr=False, default=None)

    @property
    def n_nodes(self) -> int:
        return len(self.centers)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index(self) -> dict:
        return {tuple(int(v) for v in c): i for i, c in enumerate(self.centers)}

    def rhombi(self) -> list:
        """Tiles ``(c, i, j)``: all four of c, c+e_i, c+e_j, c+e_i+e_j present."""
        idx = self.index()
        N = self.centers.shape[1] if len(self.centers) else 0
        out = []
        for c in idx:
            for i in range(N):
                ci = list(c)
                ci[i] += 1
                if tuple(ci) not in idx:
                    continue
                for j in range(i + 1, N):
                    cj = list(c)
                    cj[j] += 1
                    cij = list(ci)
                    cij[j] += 1
                    if tuple(cj) in idx and tuple(cij) in idx:
                        out.append((c, i, j))
        return out

    def to_dict(self) -> dict:
        return {
            "region": self.region.tolist(),
            "nodes": [
                {"center": [int(v) for v in c], "x": [float(v) for v in p]}
                for c, p in zip(self.centers, self.points)
            ],
            "edges": [[int(i), int(j)] for i, j in self.edges],
        }


def _seed_points(region, density, wavelength):
    axes = []
    for lo, hi in region:
        n = max(2, int(math.ceil((hi - lo) / wavelength * density)) + 1)
        axes.append(np.linspace(lo, hi, n))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_tiling(region, seed_density: float, cfg: WaveConfig, max_nodes: int = 10**6,
                 solver: str = "auto") -> TilingGraph:
    """Cut-and-project tiling of ``region`` (array ``(d, 2)`` of bounds).

    Seeds a regular grid with ``seed_density`` points per wavelength per axis,
    rounds ``K^T x + gamma`` to lattice centres, then grows the node set
    through face-adjacent cells that meet the subspace inside ``region`` until
    nothing new is added.
    """
    region = np.asarray(region, dtype=float).reshape(cfg.d, 2)
    if np.any(region[:, 1] <= region[:, 0]):
        raise ValidationError("region must have hi > lo on every axis")
    if seed_density <= 0:
        raise ValidationError("seed_density must be positive")
    seeds = _seed_points(region, seed_density, cfg.wavelength)
    start = np.rint(cfg.phases(seeds) / (2 * np.pi)).astype(np.int64)
    found = {}
    queue = deque()
    for c in sorted(set(map(tuple, start.tolist()))):
        ok, w = cell_intersects_subspace(c, cfg, region, solver)
        if ok and c not in found:
            found[c] = w
            queue.append(c)
    seen = set(found)
    N = cfg.N
    while queue:
        c = queue.popleft()
        for j in range(N):
            for s in (1, -1):
                nb = list(c)
                nb[j] += s
                nb = tuple(nb)
                if nb in seen:
                    continue
                seen.add(nb)
                ok, w = cell_intersects_subspace(nb, cfg, region, solver)
                if ok:
                    if len(found) >= max_nodes:
                        raise ResourceCapError(f"tiling exceeds {max_nodes} nodes")
                    found[nb] = w
                    queue.append(nb)
    order = sorted(found)
    centers = np.array(order, dtype=np.int64).reshape(-1, N)
    witnesses = np.array([found[c] for c in order]).reshape(-1, cfg.d)
    points = project_center(centers, cfg).reshape(-1, cfg.d)
    idx = {c: i for i, c in enumerate(order)}
    edges, dirs = [], []
    for i, c in enumerate(order):
        for j in range(N):
            nb = list(c)
            nb[j] += 1
            k = idx.get(tuple(nb))
            if k is not None:
                edges.append((min(i, k), max(i, k)))
                dirs.append(j)
    edges = np.array(edges, dtype=np.int64).reshape(-1, 2)
    dirs = np.array(dirs, dtype=np.int64)
    perm = np.lexsort((edges[:, 1], edges[:, 0])) if len(edges) else np.arange(0)
    return TilingGraph(centers, points, edges[perm], dirs[perm], region, witnesses)


@dataclass(frozen=True)
class Tiling1D:
    positions: np.ndarray
    lengths: np.ndarray


def tiling_1d(slope: float, extent: float) -> Tiling1D:
    """Tiles of the line ``y = slope * x`` through ``Z^2``, from the origin out to ``extent``.

    Lattice points sit at ``2 pi Z^2``; positions and lengths are arc length
    along the line.  Coincident projections (rational slopes through cell corners)
    are merged.
    """
    if slope <= 0 or extent <= 0:
        raise ValidationError("slope and extent must be positive")
    a = math.atan(slope)
    cfg = WaveConfig([[math.cos(a), math.sin(a)]], check_norms=False)
    margin = 4 * np.pi
    g = build_tiling([[-margin, extent + margin]], 1.0, cfg)
    pos = np.sort(g.points[:, 0])
    keep = [pos[0]]
    for p in pos[1:]:
        if p - keep[-1] > 1e-9:
            keep.append(p)
    pos = np.array(keep)
    pos = pos[(pos >= -1e-9) & (pos <= extent + 1e-9)]
    return Tiling1D(pos, np.diff(pos))


def tile_symbols(lengths, tol: float = 1e-6) -> str:
    """Map tile lengths to ``'S'``/``'L'``; a single length maps to ``'L'``."""
    lengths = np.asarray(lengths)
    if lengths.size == 0:
        return ""
    short, long_ = lengths.min(), lengths.max()
    if long_ - short <= tol * long_:
        return "L" * lengths.size
    if np.any((np.abs(lengths - short) > tol * long_) & (np.abs(lengths - long_) > tol * long_)):
        raise ValidationError("more than two distinct tile lengths")
    return "".join("S" if abs(v - short) <= tol * long_ else "L" for v in lengths)


def sequence_period(seq) -> int | None:
    """Smallest ``p`` with ``seq[i] == seq[i + p]`` throughout, if it repeats at least twice."""
    n = len(seq)
    for p in range(1, n // 2 + 1):
        if all(seq[i] == seq[i + p] for i in range(n - p)):
            return p
    return None


@dataclass(frozen=True)
class TileStatistics:
    """Histograms keyed by values rounded to ``decimals`` places.

    ``wedge_angles`` are the angles between angularly consecutive incident
    edges at each node (one entry per node and gap, wrap-around included,
    nodes of degree >= 2 only).  ``rhombus_angles`` are the acute angles of
    the rhombus tiles, in degrees.
    """

    edge_lengths: Counter
    edge_angles: Counter
    wedge_angles: Counter
    rhombus_angles: Counter
    n_edges: int
    n_wedges: int
    decimals: int


def tile_statistics(g: TilingGraph, decimals: int = 6) -> TileStatistics:
    if g.points.shape[1] != 2 and g.n_edges:
        raise ValidationError("angle statistics need a planar tiling")
    lengths, angles, wedges = Counter(), Counter(), Counter()
    if g.n_edges:
        vec = g.points[g.edges[:, 1]] - g.points[g.edges[:, 0]]
        for v in vec:
            lengths[round(float(np.linalg.norm(v)), decimals)] += 1
            angles[round(float(np.arctan2(v[1], v[0]) % np.pi), decimals)] += 1
        incident = [[] for _ in range(g.n_nodes)]
        for (i, j), v in zip(g.edges, vec):
            incident[i].append(math.atan2(v[1], v[0]))
            incident[j].append(math.atan2(-v[1], -v[0]))
        for dirs in incident:
            if len(dirs) < 2:
                continue
            t = np.sort(np.mod(dirs, 2 * np.pi))
            gaps = np.diff(np.r_[t, t[0] + 2 * np.pi])
            for gap in gaps:
                wedges[round(float(gap), decimals)] += 1
    rh = Counter()
    if g.n_nodes and g.points.shape[1] == 2:
        steps = _step_vectors(g)
        for _, i, j in g.rhombi():
            vi, vj = steps[i], steps[j]
            cosang = abs(vi @ vj) / (np.linalg.norm(vi) * np.linalg.norm(vj))
            rh[round(math.degrees(math.acos(min(1.0, cosang))), max(decimals - 3, 0))] += 1
    return TileStatistics(lengths, angles, wedges, rh, g.n_edges, sum(wedges.values()), decimals)


def _step_vectors(g):
    # projected image of each unit lattice step, read off the edges
    out = {}
    for (a, b), j in zip(g.edges, g.edge_dirs):
        if int(j) not in out:
            out[int(j)] = g.points[b] - g.points[a]
    return out
