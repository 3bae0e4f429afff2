"""Plane-geometry helpers for closed polylines (numpy, vectorized over query points)."""
from __future__ import annotations

import numpy as np


def winding_number(poly: np.ndarray, z) -> np.ndarray:
    """Winding numbers of the closed polygon ``poly`` around each point of ``z``."""
    poly = np.asarray(poly, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    d = poly[None, :] - z[:, None]
    step = np.angle(np.roll(d, -1, axis=1) / d)
    return np.rint(step.sum(axis=1) / (2 * np.pi)).astype(int)


def distance_to_polyline(poly: np.ndarray, z, closed: bool = True) -> np.ndarray:
    """Euclidean distance from each point of ``z`` to the polyline ``poly``."""
    poly = np.asarray(poly, dtype=complex)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a = poly if closed else poly[:-1]
    b = np.roll(poly, -1) if closed else poly[1:]
    seg = b - a
    L2 = np.abs(seg) ** 2
    L2 = np.where(L2 == 0, 1.0, L2)
    out = np.empty(len(z))
    # chunk to bound memory on long polylines
    chunk = max(1, 2_000_000 // max(len(a), 1))
    for i in range(0, len(z), chunk):
        zz = z[i:i + chunk, None]
        t = np.clip(np.real((zz - a) * np.conj(seg)) / L2, 0.0, 1.0)
        out[i:i + chunk] = np.abs(zz - (a + t * seg)).min(axis=1)
    return out


def diameter(points: np.ndarray, max_points: int = 512) -> float:
    points = np.asarray(points, dtype=complex)
    if len(points) > max_points:
        points = points[:: int(np.ceil(len(points) / max_points))]
    return float(np.abs(points[:, None] - points[None, :]).max())


def is_simple_polygon(poly: np.ndarray) -> bool:
    """Brute-force check that no two non-adjacent edges of the closed polygon cross."""
    p = np.asarray(poly, dtype=complex)
    a, b = p, np.roll(p, -1)
    n = len(p)

    def cross(u, v):
        return u.real * v.imag - u.imag * v.real

    for i in range(n):
        d1 = cross(b[i] - a[i], a - a[i])
        d2 = cross(b[i] - a[i], b - a[i])
        d3 = cross(b - a, a[i] - a)
        d4 = cross(b - a, b[i] - a)
        hit = (d1 * d2 < 0) & (d3 * d4 < 0)
        hit[[i, (i - 1) % n, (i + 1) % n]] = False
        if hit.any():
            return False
    return True
