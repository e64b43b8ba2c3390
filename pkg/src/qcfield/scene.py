"""YAML scene files for the batch CLI.

A scene bundles a configuration, controls, potential, sampling region and
output choices.  Lengths in the file are in wavelengths.  Example::

    K: fan
    N: 5
    u: [1, 0, 1, 0, 1, 0, 1, 0, 1, 0, -1, 0, -1, 0, -1, 0, -1, 0, -1, 0]
    spec: {a: 1, b: 1}
    region: [[-6, 6], [-6, 6]]
    resolution: 513
    output: {format: pgm, path: arp.pgm}

``u`` lists ``2N`` complex controls as interleaved ``re, im`` pairs.
Alternatively ``alpha`` and ``beta`` give ``N`` entries each, as numbers or
``[re, im]`` pairs.  Relative paths resolve against the scene's directory.
Every problem is reported as ``file:line: field: message``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .errors import QCFieldError, ValidationError
from .quasiperiodicity import moire_angle, moire_wavevectors
from .wavefield import (
    Controls,
    PotentialSpec,
    WaveConfig,
    fan_config,
    icosahedral_config,
    lifted_fan_config,
)

__all__ = ["Scene", "SceneError", "TilingOptions", "TransitionOptions", "parse_scene", "load_scene"]

_KNOWN = {
    "K", "N", "k", "m", "r", "gamma", "check_norms", "u", "alpha", "beta", "spec", "region",
    "resolution", "output", "level_fraction", "tiling", "transition",
}
_FORMATS = {"pgm", "csv", "points"}


class SceneError(ValidationError):
    """Malformed scene; the message names the file, line and field."""

    def __init__(self, source, line, fieldname, message):
        self.source, self.line, self.field = source, line, fieldname
        super().__init__(f"{source}:{line}: {fieldname}: {message}")


class SceneIOError(QCFieldError, OSError):
    """The scene file could not be read."""


@dataclass(frozen=True)
class TilingOptions:
    seed_density: float = 2.0
    svg: Path | None = None
    underlay: bool = False
    max_nodes: int = 10**6


@dataclass(frozen=True)
class TransitionOptions:
    kind: str = "direct"
    frames: int = 6
    translate: np.ndarray | None = None  # physical units
    target: Controls | None = None
    directory: Path | None = None
    samples: int = 257


@dataclass(frozen=True)
class Scene:
    cfg: WaveConfig
    u: Controls
    spec: PotentialSpec
    region: np.ndarray  # physical units, (d, 2)
    resolution: tuple
    output_format: str
    output_path: Path
    level_fraction: float
    tiling: TilingOptions | None
    transition: TransitionOptions | None
    source: Path

    @property
    def base_dir(self) -> Path:
        return self.source.parent


class _Doc:
    """YAML tree with a line number for every dotted field path."""

    def __init__(self, text, source):
        self.source = source
        try:
            node = yaml.compose(text, Loader=yaml.SafeLoader)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            line = mark.line + 1 if mark else 1
            raise SceneError(source, line, "<document>", f"invalid YAML: {getattr(exc, 'problem', exc)}")
        self.lines = {}
        self._loader = yaml.SafeLoader("")
        if node is None:
            raise SceneError(source, 1, "<document>", "empty scene")
        if not isinstance(node, yaml.MappingNode):
            raise SceneError(source, node.start_mark.line + 1, "<document>", "top level must be a mapping")
        self.data = self._build(node, "")

    def _build(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            out = {}
            for k, v in node.value:
                key = str(self._loader.construct_object(k))
                sub = f"{path}.{key}" if path else key
                if key in out:
                    raise SceneError(self.source, k.start_mark.line + 1, sub, "duplicate key")
                out[key] = self._build(v, sub)
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self._build(v, f"{path}[{i}]") for i, v in enumerate(node.value)]
        return self._loader.construct_object(node)

    def error(self, path, message):
        return SceneError(self.source, self.lines.get(path, self.lines.get(path.split(".")[0], 1)), path, message)


def _reals(doc, path, value, shape=None):
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise doc.error(path, "expected numbers") from None
    if arr.dtype == object or not np.all(np.isfinite(arr)):
        raise doc.error(path, "expected finite numbers")
    if shape is not None and arr.shape != shape:
        raise doc.error(path, f"expected shape {shape}, got {arr.shape}")
    return arr


def _complexes(doc, path, value):
    if not isinstance(value, list):
        raise doc.error(path, "expected a list")
    out = []
    for i, v in enumerate(value):
        p = f"{path}[{i}]"
        if isinstance(v, list):
            if len(v) != 2:
                raise doc.error(p, "complex entries are [re, im] pairs")
            re, im = _reals(doc, p, v)
            out.append(complex(re, im))
        else:
            out.append(complex(float(_reals(doc, p, v))))
    return np.array(out)


def _config(doc, d):
    if "K" not in d:
        raise doc.error("K", "missing (a matrix, 'fan', 'lifted_fan', 'moire' or 'icosahedral')")
    K = d["K"]
    gamma = _reals(doc, "gamma", d["gamma"]) if "gamma" in d else None
    try:
        if K == "fan" or K == "lifted_fan":
            if "N" not in d:
                raise doc.error("N", f"required with K: {K}")
            N = d["N"]
            if not isinstance(N, int) or isinstance(N, bool) or N < 2:
                raise doc.error("N", "must be an integer >= 2")
            if K == "fan":
                k = float(_reals(doc, "k", d.get("k", 1.0)))
                if k <= 0:
                    raise doc.error("k", "must be positive")
                cfg = fan_config(N, k)
            else:
                cfg = lifted_fan_config(N)
        elif K == "icosahedral":
            cfg = icosahedral_config()
        elif K == "moire":
            for key in ("m", "r"):
                v = d.get(key)
                if not isinstance(v, int) or isinstance(v, bool):
                    raise doc.error(key, "required integer with K: moire")
            cfg = moire_wavevectors(moire_angle(d["m"], d["r"]))
        elif isinstance(K, list):
            rows = _reals(doc, "K", K)
            if rows.ndim == 1:
                rows = rows[None, :]
            if rows.ndim != 2:
                raise doc.error("K", "expected a list of d rows with N entries each")
            cfg = WaveConfig(rows, check_norms=bool(d.get("check_norms", True)))
        else:
            raise doc.error("K", f"unknown configuration {K!r}")
        if gamma is not None:
            cfg = WaveConfig(cfg.K, gamma, check_norms=cfg.check_norms)
    except SceneError:
        raise
    except ValidationError as exc:
        msg = str(exc)
        field = "gamma" if "gamma" in msg else ("m" if K == "moire" else "K")
        raise doc.error(field, msg) from None
    if "N" in d and isinstance(K, list) and d["N"] != cfg.N:
        raise doc.error("N", f"says {d['N']} but K has {cfg.N} columns")
    return cfg


def _controls(doc, d, cfg, key="u", ab=("alpha", "beta"), prefix=""):
    N = cfg.N
    if key in d:
        vals = _reals(doc, prefix + key, d[key])
        if vals.ndim != 1 or vals.size != 4 * N:
            raise doc.error(prefix + key, f"needs 4N = {4 * N} reals (2N = {2 * N} interleaved re, im pairs), got {vals.size}")
        return Controls.from_interleaved(vals)
    a, b = ab
    if a in d or b in d:
        if a not in d or b not in d:
            raise doc.error(prefix + (a if a not in d else b), "alpha and beta must be given together")
        alpha, beta = _complexes(doc, prefix + a, d[a]), _complexes(doc, prefix + b, d[b])
        for name, v in ((a, alpha), (b, beta)):
            if v.size != N:
                raise doc.error(prefix + name, f"needs N = {N} entries, got {v.size}")
        return Controls.from_ab(alpha, beta)
    raise doc.error(prefix + key, "missing controls (give u or alpha/beta)")


def _spec(doc, d, dim):
    if "spec" not in d:
        return PotentialSpec.diagonal(1.0, 1.0)
    s = d["spec"]
    if not isinstance(s, dict):
        raise doc.error("spec", "expected a mapping with a, b or A")
    extra = set(s) - {"a", "b", "A"}
    if extra:
        raise doc.error(f"spec.{sorted(extra)[0]}", "unknown key")
    if "A" in s:
        if "a" in s or "b" in s:
            raise doc.error("spec", "give either a, b or A")
        rows = s["A"]
        if not isinstance(rows, list) or len(rows) != dim + 1:
            raise doc.error("spec.A", f"needs {dim + 1} rows")
        A = np.array([_complexes(doc, f"spec.A[{i}]", r) for i, r in enumerate(rows)], dtype=object)
        try:
            A = np.array(A.tolist(), dtype=complex)
        except ValueError:
            raise doc.error("spec.A", "rows have different lengths") from None
        if A.shape != (dim + 1, dim + 1):
            raise doc.error("spec.A", f"must be {dim + 1}x{dim + 1}, got {A.shape}")
        try:
            return PotentialSpec.general(A)
        except ValidationError as exc:
            raise doc.error("spec.A", str(exc)) from None
    for key in ("a", "b"):
        if key not in s:
            raise doc.error(f"spec.{key}", "missing")
    return PotentialSpec.diagonal(float(_reals(doc, "spec.a", s["a"])), float(_reals(doc, "spec.b", s["b"])))


def _resolution(doc, value, dim):
    path = "resolution"
    vals = value if isinstance(value, list) else [value] * dim
    if len(vals) != dim:
        raise doc.error(path, f"needs {dim} entries, got {len(vals)}")
    for v in vals:
        if not isinstance(v, int) or isinstance(v, bool) or v < 1:
            raise doc.error(path, f"entries must be integers >= 1, got {v!r}")
    return tuple(vals)


def _path(doc, base, key, value):
    if not isinstance(value, str) or not value:
        raise doc.error(key, "expected a file path")
    p = Path(value)
    return p if p.is_absolute() else base / p


def _positive_int(doc, path, value, minimum=1):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise doc.error(path, f"must be an integer >= {minimum}")
    return value


def _tiling(doc, d, base):
    t = d["tiling"]
    if t is None or t is True:
        t = {}
    if not isinstance(t, dict):
        raise doc.error("tiling", "expected a mapping")
    extra = set(t) - {"seed_density", "svg", "underlay", "max_nodes"}
    if extra:
        raise doc.error(f"tiling.{sorted(extra)[0]}", "unknown key")
    dens = float(_reals(doc, "tiling.seed_density", t.get("seed_density", 2.0)))
    if dens <= 0:
        raise doc.error("tiling.seed_density", "must be positive")
    svg = _path(doc, base, "tiling.svg", t["svg"]) if "svg" in t else None
    underlay = t.get("underlay", False)
    if not isinstance(underlay, bool):
        raise doc.error("tiling.underlay", "must be true or false")
    max_nodes = _positive_int(doc, "tiling.max_nodes", t.get("max_nodes", 10**6))
    return TilingOptions(dens, svg, underlay, max_nodes)


def _transition(doc, d, cfg, base, wavelength):
    t = d["transition"]
    if not isinstance(t, dict):
        raise doc.error("transition", "expected a mapping")
    extra = set(t) - {"kind", "frames", "translate", "target_u", "target_alpha", "target_beta",
                      "directory", "samples"}
    if extra:
        raise doc.error(f"transition.{sorted(extra)[0]}", "unknown key")
    kind = t.get("kind", "direct")
    if kind not in ("direct", "geodesic"):
        raise doc.error("transition.kind", f"must be direct or geodesic, got {kind!r}")
    frames = _positive_int(doc, "transition.frames", t.get("frames", 6), 2)
    samples = _positive_int(doc, "transition.samples", t.get("samples", 257), 2)
    translate = None
    if "translate" in t:
        translate = _reals(doc, "transition.translate", t["translate"], (cfg.d,)) * wavelength
    has_target = any(k in t for k in ("target_u", "target_alpha", "target_beta"))
    target = None
    if has_target:
        target = _controls(doc, t, cfg, "target_u", ("target_alpha", "target_beta"), "transition.")
    if kind == "direct" and translate is None:
        raise doc.error("transition.translate", "a direct path needs a translation")
    if kind == "geodesic" and translate is None and target is None:
        raise doc.error("transition", "a geodesic needs translate or target_u")
    if translate is not None and target is not None:
        raise doc.error("transition", "give translate or a target, not both")
    directory = _path(doc, base, "transition.directory", t["directory"]) if "directory" in t else None
    return TransitionOptions(kind, frames, translate, target, directory, samples)


def parse_scene(text: str, source="<scene>", base_dir=None) -> Scene:
    """Parse scene text; ``base_dir`` anchors relative output paths."""
    source = Path(source)
    base = Path(base_dir) if base_dir is not None else source.parent
    doc = _Doc(text, source)
    d = doc.data
    unknown = sorted(set(d) - _KNOWN)
    if unknown:
        raise doc.error(unknown[0], "unknown field")
    cfg = _config(doc, d)
    dim = cfg.d
    u = _controls(doc, d, cfg)
    spec = _spec(doc, d, dim)
    lam = cfg.wavelength
    if "region" in d:
        region = _reals(doc, "region", d["region"])
        if region.shape != (dim, 2):
            raise doc.error("region", f"needs {dim} [lo, hi] pairs")
        if np.any(region[:, 1] <= region[:, 0]):
            raise doc.error("region", "every axis needs lo < hi")
    else:
        region = np.array([[-6.0, 6.0]] * dim)
    default_res = 128 if dim >= 3 else 513
    resolution = _resolution(doc, d.get("resolution", default_res), dim)
    out = d.get("output", {}) or {}
    if not isinstance(out, dict):
        raise doc.error("output", "expected a mapping")
    extra = set(out) - {"format", "path"}
    if extra:
        raise doc.error(f"output.{sorted(extra)[0]}", "unknown key")
    fmt = out.get("format", "points" if dim == 3 else ("pgm" if dim == 2 else "csv"))
    if fmt not in _FORMATS:
        raise doc.error("output.format", f"must be one of {sorted(_FORMATS)}, got {fmt!r}")
    if fmt == "pgm" and dim != 2:
        raise doc.error("output.format", "pgm output needs a 2D scene")
    if fmt == "points" and dim != 3:
        raise doc.error("output.format", "points output needs a 3D scene")
    ext = {"pgm": ".pgm", "csv": ".csv", "points": ".csv"}[fmt]
    out_path = _path(doc, base, "output.path", out["path"]) if "path" in out else base / (source.stem + ext)
    frac = float(_reals(doc, "level_fraction", d.get("level_fraction", 0.075)))
    if not 0 < frac <= 1:
        raise doc.error("level_fraction", "must lie in (0, 1]")
    tiling = _tiling(doc, d, base) if "tiling" in d else None
    if tiling is not None and dim != 2 and (tiling.svg is not None):
        raise doc.error("tiling.svg", "SVG output needs a 2D scene")
    transition = _transition(doc, d, cfg, base, lam) if "transition" in d else None
    return Scene(cfg, u, spec, region * lam, resolution, fmt, out_path, frac, tiling, transition, source)


def load_scene(path) -> Scene:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneIOError(f"cannot read scene {path}: {exc.strerror or exc}") from exc
    return parse_scene(text, path, path.parent)
