"""Deterministic escape-time rasters of parameter and dynamical planes, written as binary PPM.

Rows are computed in independent blocks (optionally on a thread pool) and
assembled by row index, so the thread count never changes the bytes.
"""
from __future__ import annotations

import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import metadata

import numpy as np

from .dynamics import _Polynomial
from .rotation import RotationNumber, multiplier

__all__ = [
    "RenderConfig",
    "Raster",
    "FIG1_VIEWPORT",
    "render_parameter_plane",
    "render_dynamical_plane",
    "parameter_escape_counts",
    "write_ppm",
    "read_ppm",
]

BOUNDED_RGB = (214, 226, 240)
POLE_RGB = (255, 0, 0)
SIEGEL_RGB = (255, 170, 0)
BUBBLE_RGBS = ((0, 150, 80), (200, 40, 160), (30, 90, 220), (150, 110, 0), (0, 170, 190), (120, 60, 200))
ROW_BLOCK = 16

# a-plane window for lambda = exp(pi i sqrt 2) framing the whole non-escaping region (about 10% of pixels)
FIG1_VIEWPORT = {"center": complex(-2.75, -2.5), "width": 11.0}


@dataclass(frozen=True)
class RenderConfig:
    center: complex = 0j
    width: float = 4.0
    height: float | None = None  # defaults to width * h / w (square pixels)
    resolution: tuple[int, int] = (512, 512)
    max_iter: int = 1000
    escape_radius: float = 100.0
    overlays: dict = field(default_factory=dict)  # {"siegel_boundary": bool, "bubbles_to_gen": int}
    threads: int = 1

    def __post_init__(self):
        w, h = self.resolution
        if w < 16 or h < 16:
            raise ValueError("resolution must be at least 16x16")
        if self.escape_radius < 4:
            raise ValueError("escape_radius must be >= 4")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.width > 0) or (self.height is not None and not self.height > 0):
            raise ValueError("region width and height must be positive")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @property
    def region_height(self) -> float:
        w, h = self.resolution
        return self.height if self.height is not None else self.width * h / w

    def pixel_centers(self, rows: slice | None = None) -> np.ndarray:
        """Complex coordinates of pixel centers, shape ``(rows, w)``; row 0 is the top."""
        w, h = self.resolution
        rows = rows or slice(0, h)
        H = self.region_height
        x = self.center.real - self.width / 2 + (np.arange(w) + 0.5) * self.width / w
        y = self.center.imag + H / 2 - (np.arange(h)[rows] + 0.5) * H / h
        return x[None, :] + 1j * y[:, None]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["center"] = [self.center.real, self.center.imag]
        d["resolution"] = list(self.resolution)
        return d


@dataclass
class Raster:
    pixels: np.ndarray  # (h, w, 3) uint8, row-major
    meta: dict

    def __post_init__(self):
        if self.pixels.dtype != np.uint8 or self.pixels.ndim != 3 or self.pixels.shape[2] != 3:
            raise ValueError("pixels must be an (h, w, 3) uint8 array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def tobytes(self) -> bytes:
        return np.ascontiguousarray(self.pixels).tobytes()


def _version() -> str:
    try:
        return "v" + metadata.version("zakeri")
    except metadata.PackageNotFoundError:
        return "v0+unknown"


def _escape_counts(a2, a3, lam, starts, max_iter, radius):
    """First ``n`` with ``|P^n(z)| > radius`` over several start points, for ``P(z) = lam z + a2 z^2 + a3 z^3``.

    Arrays broadcast elementwise; bounded points get ``max_iter``.  The count is the
    minimum over ``starts`` (a parameter is bounded only if every critical orbit is).
    """
    shape = np.broadcast(a2, *starts).shape
    best = np.full(shape, max_iter, dtype=np.int64)
    a2 = np.broadcast_to(a2, shape).ravel()
    a3 = np.broadcast_to(a3, shape).ravel()
    flat = best.ravel()
    r2 = radius * radius
    for z0 in starts:
        z = np.broadcast_to(z0, shape).ravel().astype(complex)
        idx = np.arange(z.size)
        b2, b3 = a2.copy(), a3.copy()
        for n in range(max_iter):
            out = z.real * z.real + z.imag * z.imag > r2
            if out.any():
                hit = idx[out]
                flat[hit] = np.minimum(flat[hit], n)
                keep = ~out
                z, idx, b2, b3 = z[keep], idx[keep], b2[keep], b3[keep]
                if not z.size:
                    break
            # points already beaten by an earlier start cannot lower the minimum
            if n % 8 == 7:
                keep = flat[idx] > n + 1
                z, idx, b2, b3 = z[keep], idx[keep], b2[keep], b3[keep]
            z = z * (lam + z * (b2 + z * b3))
    return best


def parameter_escape_counts(rot: RotationNumber | complex, plane: str, params: np.ndarray,
                            max_iter: int = 1000, radius: float = 100.0) -> np.ndarray:
    """Escape counts of both critical orbits, vectorized over parameters; ``-1`` marks the pole ``c = 0``."""
    lam = multiplier(rot) if isinstance(rot, (RotationNumber, float)) else complex(rot)
    params = np.asarray(params, dtype=complex)
    if plane == "a":
        s = np.sqrt(params)
        disc = np.sqrt(s * s - 3 * lam)
        starts = [(-s + disc) / 3, (-s - disc) / 3]
        return _escape_counts(s, np.ones_like(s), lam, starts, max_iter, radius)
    if plane == "c":
        pole = params == 0
        c = np.where(pole, 1.0, params)
        a2 = -lam * (1 + 1 / c) / 2
        a3 = lam / (3 * c)
        counts = _escape_counts(a2, a3, lam, [np.ones_like(c), c], max_iter, radius)
        counts[pole] = -1
        return counts
    raise ValueError("plane must be 'a' or 'c'")


def _shade(counts: np.ndarray, max_iter: int) -> np.ndarray:
    """Escaped pixels: bright for fast escape, dark near the bounded set; bounded: uniform light shade."""
    out = np.empty(counts.shape + (3,), dtype=np.uint8)
    t = np.log1p(np.clip(counts, 0, None)) / math.log1p(max_iter)
    v = 1.0 - np.sqrt(t)
    out[..., 0] = np.round(30 + 200 * v).astype(np.uint8)
    out[..., 1] = np.round(20 + 170 * v).astype(np.uint8)
    out[..., 2] = np.round(40 + 110 * v).astype(np.uint8)
    out[counts >= max_iter] = BOUNDED_RGB
    out[counts < 0] = POLE_RGB
    return out


def _rows_parallel(cfg: RenderConfig, fn) -> np.ndarray:
    w, h = cfg.resolution
    blocks = [slice(i, min(i + ROW_BLOCK, h)) for i in range(0, h, ROW_BLOCK)]
    if cfg.threads == 1:
        parts = [fn(cfg.pixel_centers(b)) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(lambda b: fn(cfg.pixel_centers(b)), blocks))
    return np.concatenate(parts, axis=0)


def render_parameter_plane(rot: RotationNumber, plane: str, cfg: RenderConfig) -> Raster:
    """Escape-time picture of the ``a``-plane (``lam z + sqrt(a) z^2 + z^3``) or ``c``-plane (critical points 1, c)."""
    if plane not in ("a", "c"):
        raise ValueError("plane must be 'a' or 'c'")
    counts = _rows_parallel(cfg, lambda p: parameter_escape_counts(rot, plane, p, cfg.max_iter, cfg.escape_radius))
    meta = {"kind": "parameter", "plane": plane, "rot": str(rot), "config": cfg.to_dict(), "version": _version()}
    return Raster(_shade(counts, cfg.max_iter), meta)


def _draw_polyline(pixels: np.ndarray, cfg: RenderConfig, poly: np.ndarray, rgb) -> None:
    w, h = cfg.resolution
    H = cfg.region_height
    poly = np.asarray(poly, dtype=complex)
    a, b = poly, np.roll(poly, -1)
    px = max(cfg.width / w, H / h)
    steps = np.maximum(1, np.ceil(np.abs(b - a) / (0.5 * px)).astype(int))
    pts = np.concatenate([a[i] + (b[i] - a[i]) * np.arange(steps[i]) / steps[i] for i in range(len(a))])
    col = np.floor((pts.real - (cfg.center.real - cfg.width / 2)) / cfg.width * w).astype(int)
    row = np.floor(((cfg.center.imag + H / 2) - pts.imag) / H * h).astype(int)
    ok = (col >= 0) & (col < w) & (row >= 0) & (row < h)
    pixels[row[ok], col[ok]] = rgb


def render_dynamical_plane(f, cfg: RenderConfig, model=None, tree=None) -> Raster:
    """Escape-time picture of the filled Julia set of a polynomial, with optional Siegel/bubble overlays."""
    if not isinstance(f, _Polynomial):
        raise TypeError("only polynomial maps can be rendered")
    overlays = dict(cfg.overlays or {})
    if overlays.get("siegel_boundary") and model is None:
        raise ValueError("siegel_boundary overlay needs a Siegel model")
    gen = int(overlays.get("bubbles_to_gen", 0) or 0)
    if gen and tree is None:
        raise ValueError("bubble overlay needs a bubble tree")
    coeffs = np.asarray(f.coeffs, dtype=complex)
    r2 = cfg.escape_radius ** 2

    def counts_for(z):
        shape = z.shape
        z = z.ravel().copy()
        best = np.full(z.size, cfg.max_iter, dtype=np.int64)
        idx = np.arange(z.size)
        for n in range(cfg.max_iter):
            out = z.real * z.real + z.imag * z.imag > r2
            if out.any():
                best[idx[out]] = n
                z, idx = z[~out], idx[~out]
                if not z.size:
                    break
            acc = np.full_like(z, coeffs[-1])
            for cf in coeffs[-2::-1]:
                acc = acc * z + cf
            z = acc
        return best.reshape(shape)

    pixels = _shade(_rows_parallel(cfg, counts_for), cfg.max_iter)
    if gen:
        for b in sorted(tree.bubbles.values(), key=lambda b: b.generation):
            if 1 <= b.generation <= gen:
                _draw_polyline(pixels, cfg, b.boundary, BUBBLE_RGBS[(b.generation - 1) % len(BUBBLE_RGBS)])
    if overlays.get("siegel_boundary"):
        _draw_polyline(pixels, cfg, model.polygon()[2], SIEGEL_RGB)
    meta = {"kind": "dynamical", "map": type(f).__name__, "config": cfg.to_dict(), "version": _version()}
    return Raster(pixels, meta)


def ppm_bytes(raster: Raster) -> bytes:
    return f"P6\n{raster.width} {raster.height}\n255\n".encode("ascii") + raster.tobytes()


def write_ppm(raster: Raster, path) -> None:
    """Binary PPM, written to a temporary file in the target directory and renamed into place."""
    path = os.fspath(path)
    data = ppm_bytes(raster)
    d = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".ppm")
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def read_ppm(path) -> np.ndarray:
    """Minimal binary PPM (P6, maxval 255) reader returning an ``(h, w, 3)`` uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens, pos = [], 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        if data[pos:pos + 1] == b"#":
            pos = data.index(b"\n", pos) + 1
            continue
        end = pos
        while not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    pos += 1
    if tokens[0] != b"P6" or int(tokens[3]) != 255:
        raise ValueError("not a P6 PPM with maxval 255")
    w, h = int(tokens[1]), int(tokens[2])
    body = data[pos:]
    if len(body) != 3 * w * h:
        raise ValueError("PPM body length does not match header")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)
