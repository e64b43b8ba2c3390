"""Grid sampling and file output: graymaps, CSV, tiling SVG, point clouds, frames.

Grids are node-centred: axis ``k`` holds ``lo_k + i * step_k`` with
``step_k = (hi_k - lo_k) / (n_k - 1)``, so a grid with ``2n - 1`` points
contains the ``n``-point grid's samples bit for bit.  Sampling evaluates each
point with elementwise operations only (no BLAS reductions), which makes the
result independent of how rows are split across threads.
"""

from __future__ import annotations

import base64
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import QCFieldError, ResourceCapError, ValidationError
from .wavefield import DEFAULT_SPEC, PotentialSpec, WaveConfig, as_vector

__all__ = [
    "FieldGrid",
    "OutputError",
    "THREADS_ENV",
    "MAX_POINTS",
    "grid_axes",
    "sample_field",
    "thread_count",
    "level_set_points_3d",
    "normalize_pixels",
    "raster_pixels",
    "render_raster",
    "render_csv",
    "read_csv",
    "render_points",
    "render_tiling_svg",
    "write_frames",
]

THREADS_ENV = "QCFIELD_THREADS"
MAX_POINTS = 512**3


class OutputError(QCFieldError, OSError):
    """Writing an output file failed."""


@dataclass(frozen=True)
class FieldGrid:
    """Sampled potential. ``values[i0, i1, ...]`` sits at ``(axes[0][i0], axes[1][i1], ...)``."""

    region: np.ndarray
    resolution: tuple
    values: np.ndarray

    @property
    def d(self) -> int:
        return len(self.resolution)

    @property
    def axes(self) -> list:
        return grid_axes(self.region, self.resolution)

    @property
    def vmin(self) -> float:
        return float(self.values.min())

    @property
    def vmax(self) -> float:
        return float(self.values.max())

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return os.cpu_count() or 1
        try:
            threads = int(env)
        except ValueError:
            raise ValidationError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if threads < 1:
        raise ValidationError("thread count must be >= 1")
    return threads


def grid_axes(region, resolution) -> list:
    region = np.asarray(region, dtype=float)
    axes = []
    for (lo, hi), n in zip(region, resolution):
        if n == 1:
            axes.append(np.array([(lo + hi) / 2]))
        else:
            step = (hi - lo) / (n - 1)
            axes.append(lo + np.arange(n) * step)
    return axes


def _eval_block(coords, u, cfg, spec):
    """Potential at points given as a list of coordinate arrays (one per axis)."""
    N, d = cfg.N, cfg.d
    alpha, beta = u[:N], u[N:]
    shape = coords[0].shape
    p = np.zeros(shape, dtype=complex)
    g = [np.zeros(shape, dtype=complex) for _ in range(d)]
    for j in range(N):
        y = np.full(shape, cfg.gamma[j])
        for c in range(d):
            y = y + coords[c] * cfg.K[c, j]
        e = np.exp(1j * y)
        fwd = alpha[j] * e
        bwd = beta[j] * e.conj()
        p = p + (fwd + bwd)
        diff = 1j * (fwd - bwd)
        for c in range(d):
            g[c] = g[c] + cfg.K[c, j] * diff
    if spec.is_diagonal:
        grad2 = np.zeros(shape)
        for c in range(d):
            grad2 = grad2 + (g[c].real ** 2 + g[c].imag ** 2)
        return spec.a * (p.real**2 + p.imag**2) - spec.b * grad2
    A = spec.matrix(d)
    w = [p] + g
    out = np.zeros(shape)
    for r in range(d + 1):
        acc = np.zeros(shape, dtype=complex)
        for s in range(d + 1):
            acc = acc + A[r, s] * w[s]
        out = out + (w[r].conj() * acc).real
    return out


def sample_field(region, resolution, u, cfg: WaveConfig, spec: PotentialSpec = DEFAULT_SPEC,
                 threads: int | None = None, max_points: int = MAX_POINTS) -> FieldGrid:
    """Sample the potential on a node-centred grid over ``region`` (shape ``(d, 2)``)."""
    region = np.asarray(region, dtype=float).reshape(cfg.d, 2)
    if np.any(region[:, 1] < region[:, 0]):
        raise ValidationError("region needs lo <= hi on every axis")
    res = tuple(int(r) for r in np.broadcast_to(np.asarray(resolution), (cfg.d,)))
    if any(r < 1 for r in res):
        raise ValidationError(f"resolution must be >= 1 on every axis, got {res}")
    total = int(np.prod(res, dtype=object))
    if total > max_points:
        raise ResourceCapError(f"grid of {total} points exceeds the cap of {max_points}")
    u = as_vector(u, cfg.N)
    axes = grid_axes(region, res)
    values = np.empty(res)
    rest = list(np.meshgrid(*axes[1:], indexing="ij")) if cfg.d > 1 else []

    def row(i):
        coords = [np.full(rest[0].shape if rest else (), axes[0][i])] + rest
        values[i] = _eval_block(coords, u, cfg, spec)

    n = thread_count(threads)
    if n == 1 or res[0] == 1:
        for i in range(res[0]):
            row(i)
    else:
        with ThreadPoolExecutor(max_workers=n) as ex:
            list(ex.map(row, range(res[0])))
    return FieldGrid(region, res, values)


def level_set_points_3d(grid: FieldGrid, fraction: float) -> np.ndarray:
    """Grid points with ``psi <= min + fraction * (max - min)``, as an ``(M, 3)`` array."""
    if grid.d != 3:
        raise ValidationError(f"level-set extraction needs a 3D grid, got d={grid.d}")
    if not 0 < fraction < 1 and fraction != 1:
        raise ValidationError("fraction must lie in (0, 1]")
    lo, hi = grid.vmin, grid.vmax
    mask = grid.values <= lo + fraction * (hi - lo)
    idx = np.argwhere(mask)
    axes = grid.axes
    return np.column_stack([axes[k][idx[:, k]] for k in range(3)])


def normalize_pixels(values) -> np.ndarray:
    """Linear min-max map to 0..255 (rounded); a constant array maps to 128."""
    v = np.asarray(values, dtype=float)
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return np.full(v.shape, 128, dtype=np.uint8)
    return np.rint((v - lo) / (hi - lo) * 255).astype(np.uint8)


def raster_pixels(grid: FieldGrid) -> np.ndarray:
    """Image rows for a 2D grid: top row is the largest second coordinate."""
    if grid.d != 2:
        raise ValidationError(f"rasters need a 2D grid, got d={grid.d}")
    return normalize_pixels(grid.values).T[::-1]


def _write(path, data: bytes):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(data)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def render_raster(grid: FieldGrid, path) -> Path:
    """Binary 8-bit portable graymap (P5)."""
    px = raster_pixels(grid)
    h, w = px.shape
    return _write(path, f"P5\n{w} {h}\n255\n".encode("ascii") + px.tobytes())


def _csv_text(rows) -> str:
    return "".join(",".join("%.17g" % v for v in r) + "\n" for r in rows)


def render_csv(grid: FieldGrid, path) -> Path:
    """One line per first-axis index; higher-dimensional grids flatten the trailing axes."""
    rows = grid.values.reshape(grid.resolution[0], -1)
    return _write(path, _csv_text(rows).encode("ascii"))


def read_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def render_points(points, path) -> Path:
    """Point cloud as CSV with an ``x,y,z`` header."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    return _write(path, ("x,y,z\n" + _csv_text(pts)).encode("ascii"))


def _png_data_uri(pixels) -> str:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(pixels, mode="L").save(buf, format="PNG")
    return "data:image/png;base64," + base64.b64encode(buf.getvalue()).decode("ascii")


def render_tiling_svg(g, path, wavelength: float, underlay: FieldGrid | None = None,
                      node_radius: float = 0.04) -> Path:
    """Tiling as SVG in wavelength units; canvas ``(X, Y) = (x1, -x2) / wavelength``.

    Nodes and edges are written in lexicographic order of their lattice
    centres.  An underlay grid is drawn as an embedded PNG whose pixel
    centres land on the grid samples, so both layers share one affine map.
    """
    region = np.asarray(g.region, dtype=float) / wavelength
    if region.shape != (2, 2):
        raise ValidationError("SVG output needs a planar tiling")
    x0, x1 = region[0]
    y0, y1 = region[1]
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{x0:.6f} {-y1:.6f} {x1 - x0:.6f} {y1 - y0:.6f}">\n'
    ]
    if underlay is not None:
        if underlay.d != 2:
            raise ValidationError("underlay must be a 2D grid")
        ureg = underlay.region / wavelength
        nx, ny = underlay.resolution
        hx = (ureg[0, 1] - ureg[0, 0]) / max(nx - 1, 1)
        hy = (ureg[1, 1] - ureg[1, 0]) / max(ny - 1, 1)
        ux, uy = ureg[0, 0] - hx / 2, -(ureg[1, 1] + hy / 2)
        parts.append(
            f'<image x="{ux:.6f}" y="{uy:.6f}" width="{nx * hx:.6f}" height="{ny * hy:.6f}" '
            f'preserveAspectRatio="none" style="image-rendering:pixelated" '
            f'href="{_png_data_uri(raster_pixels(underlay))}"/>\n'
        )
    pts = np.asarray(g.points, dtype=float) / wavelength
    # build_tiling already orders nodes lexicographically and edges by node index
    sw = node_radius / 2
    for i, j in g.edges:
        parts.append(
            f'<line x1="{pts[i, 0]:.6f}" y1="{-pts[i, 1]:.6f}" x2="{pts[j, 0]:.6f}" '
            f'y2="{-pts[j, 1]:.6f}" stroke="black" stroke-width="{sw:.6f}"/>\n'
        )
    for p in pts:
        parts.append(f'<circle cx="{p[0]:.6f}" cy="{-p[1]:.6f}" r="{node_radius:.6f}"/>\n')
    parts.append("</svg>\n")
    return _write(path, "".join(parts).encode("ascii"))


def write_frames(grids, directory, stem: str = "frame", writer=render_raster, ext: str = ".pgm") -> list:
    """Write grids as numbered files ``stem_000.pgm``, ``stem_001.pgm``, ... via ``writer(grid, path)``."""
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {directory}: {exc.strerror or exc}") from exc
    width = max(3, len(str(len(grids) - 1)))
    return [writer(gr, directory / f"{stem}_{i:0{width}d}{ext}") for i, gr in enumerate(grids)]
