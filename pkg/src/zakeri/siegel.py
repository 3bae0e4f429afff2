"""Linearization of the Siegel fixed point 0.

The series ``psi(w) = sum b_k w^k`` with ``b_1 = 1`` solves ``psi(lam w) = f(psi(w))``.
Its disk of convergence has radius ``r`` (the conformal radius of the Siegel
disk).  The boundary normalization ``psibar(u) = psi(s u)``, ``|u| <= 1``, with
``psibar(1)`` equal to the critical point 1, uses the complex scale ``s``.  We
read ``s`` off the critical orbit: on the boundary ``f^k(1) = psibar(e^{2 pi i k theta})``,
so ``s`` is the first Fourier coefficient of that orbit, which a bump-weighted
Birkhoff sum recovers.

Polar coordinates: ``z = psibar(rho e^{2 pi i angle})``.  The series is trusted
for ``rho <= 0.9``; boundary points come from orbit samples.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ._geometry import distance_to_polyline, winding_number
from .dynamics import _bump_weights
from .errors import EscapeError, UnresolvedError
from .rotation import RotationNumber

__all__ = [
    "SiegelModel",
    "Polar",
    "linearization_series",
    "boundary_orbit",
    "backward_boundary_orbit",
    "fourier_scale",
    "build_model",
    "conformal_radius",
    "functional_residual",
    "polar_coordinates",
    "contains",
    "boundary_csv",
    "TRUSTED_RHO",
]

TRUSTED_RHO = 0.9
ESCAPE_BOUND = 10.0
SMALL_DIVISOR_FLOOR = 1e-14


def linearization_series(f, N: int) -> np.ndarray:
    """Coefficients ``b[0..N]`` (``b[0] = 0``, ``b[1] = 1``) of the linearizer of ``f`` at 0.

    Matching ``w^k`` in ``psi(lam w) = f(psi(w))`` gives
    ``(lam^k - lam) b_k = sum_{j >= 2} a_j [w^k] psi^j``, where the right side only
    involves ``b_1 .. b_{k-1}``.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    a = np.asarray(f.coeffs, dtype=complex)
    lam = a[1]
    d = len(a) - 1
    b = np.zeros(N + 1, dtype=complex)
    b[1] = 1
    # powers[j][k] = [w^k] psi^j, filled up to index k as we go
    powers = {j: np.zeros(N + 1, dtype=complex) for j in range(2, d + 1)}
    for k in range(2, N + 1):
        rhs = 0j
        lower = b
        for j in range(2, d + 1):
            pj = powers[j]
            pj[k] = np.dot(b[1:k], lower[k - 1:0:-1])
            rhs += a[j] * pj[k]
            lower = pj
        div = lam**k - lam
        if abs(div) < SMALL_DIVISOR_FLOOR:
            raise UnresolvedError(
                f"small divisor |lam^{k} - lam| = {abs(div):.3g}; rotation number too close to rational for N={N}"
            )
        b[k] = rhs / div
    return b


def _horner(b: np.ndarray, w):
    acc = np.zeros_like(np.asarray(w, dtype=complex))
    for c in b[:0:-1]:
        acc = (acc + c) * w
    return acc


def _horner_derivative(b: np.ndarray, w):
    k = np.arange(len(b))
    db = (b * k)[1:]
    acc = np.zeros_like(np.asarray(w, dtype=complex))
    for c in db[::-1]:
        acc = acc * w + c
    return acc


def boundary_orbit(f, K: int, base: complex = 1.0) -> np.ndarray:
    """``f^k(base)`` for ``k = 0..K``; raises :class:`EscapeError` if the orbit leaves ``|z| < 10``."""
    out = np.empty(K + 1, dtype=complex)
    z = complex(base)
    for k in range(K + 1):
        if not abs(z) < ESCAPE_BOUND:
            raise EscapeError(f"critical orbit escaped at step {k} (|z| = {abs(z):.3g})")
        out[k] = z
        z = f(z)
    return out


def fourier_scale(orbit: np.ndarray, theta: float) -> complex:
    """Bump-weighted estimate of ``lim (1/n) sum f^k(1) e^{-2 pi i k theta}``."""
    k = np.arange(len(orbit))
    w = _bump_weights(len(orbit))
    return complex(np.sum(w * orbit * np.exp(-2j * math.pi * ((k * theta) % 1.0))))


def _interpolate_on_circle(angles: np.ndarray, points: np.ndarray, target: float) -> complex:
    order = np.argsort(angles)
    a, p = angles[order], points[order]
    i = int(np.searchsorted(a, target)) % len(a)
    j = (i - 1) % len(a)
    da = (a[i] - a[j]) % 1.0
    t = ((target - a[j]) % 1.0) / da if da > 0 else 0.0
    return complex(p[j] + t * (p[i] - p[j]))


def backward_boundary_orbit(f, theta: float, Kb: int, reference: np.ndarray, base: complex = 1.0) -> np.ndarray:
    """``x_{-j}`` for ``j = 0..Kb``: the preimages of ``base`` on the Siegel boundary.

    Among all preimages of ``x_{-j+1}`` we keep the one closest to the point
    interpolated from the forward reference orbit at angle ``-j theta``.
    """
    ang_ref = (np.arange(len(reference)) * theta) % 1.0
    out = np.empty(Kb + 1, dtype=complex)
    out[0] = base
    for j in range(1, Kb + 1):
        est = _interpolate_on_circle(ang_ref, reference, (-j * theta) % 1.0)
        cand = np.asarray(f.preimages(out[j - 1]))
        out[j] = cand[np.argmin(np.abs(cand - est))]
    return out


@dataclass(frozen=True)
class Polar:
    rho: float
    angle: float | None
    flagged: bool = False
    note: str = ""


@dataclass(frozen=True, eq=False)
class SiegelModel:
    f: object
    theta: float
    coeffs: np.ndarray
    scale: complex
    radius_estimate: float
    forward: np.ndarray
    backward: np.ndarray
    rot: RotationNumber | None = None
    _poly: tuple = field(default=None, repr=False)

    @property
    def lam(self) -> complex:
        return complex(self.f.coeffs[1])

    @property
    def K(self) -> int:
        return len(self.forward) - 1

    @property
    def Kb(self) -> int:
        return len(self.backward) - 1

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def psi(self, w):
        """Truncated linearizer, ``b_1 = 1`` normalization."""
        val = _horner(self.coeffs, w)
        return complex(val) if np.ndim(val) == 0 else val

    def psi_bar(self, u):
        """``psi(s u)``: the boundary-normalized linearizer, ``|u| < 1``."""
        return self.psi(self.scale * np.asarray(u, dtype=complex))

    def angle_of(self, k: int) -> float:
        return (k * self.theta) % 1.0

    def boundary_point(self, k: int) -> complex:
        """The boundary point with angle ``k theta``: ``f^k(1)`` or a boundary preimage of 1."""
        if 0 <= k <= self.K:
            return complex(self.forward[k])
        if -self.Kb <= k < 0:
            return complex(self.backward[-k])
        raise UnresolvedError(f"boundary index {k} outside sampled range [-{self.Kb}, {self.K}]")

    def polygon(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """All boundary samples sorted by angle: ``(ks, angles, points)``."""
        ks = np.concatenate([-np.arange(self.Kb, 0, -1), np.arange(self.K + 1)])
        pts = np.concatenate([self.backward[:0:-1], self.forward])
        ang = (ks * self.theta) % 1.0
        order = np.argsort(ang, kind="stable")
        return ks[order], ang[order], pts[order]

    def ray_point(self, rho: float, angle: float) -> complex:
        """``psibar(rho e^{2 pi i angle})``; ``rho = 1`` only at sampled legal angles."""
        if rho >= 1.0:
            k = self._index_of_angle(angle)
            return self.boundary_point(k)
        return complex(self.psi_bar(rho * cmath.exp(2j * math.pi * angle)))

    def _index_of_angle(self, angle: float, tol: float = 1e-9) -> int:
        ks, ang, _ = self.polygon()
        d = np.abs(((ang - angle) + 0.5) % 1.0 - 0.5)
        i = int(np.argmin(d))
        if d[i] > tol:
            raise UnresolvedError(f"angle {angle} is not a sampled boundary angle")
        return int(ks[i])

    def to_dict(self) -> dict:
        return {
            "N": self.N,
            "theta": self.theta,
            "coeffs": [[c.real, c.imag] for c in self.coeffs[1:]],
            "scale": [self.scale.real, self.scale.imag],
            "radius_estimate": self.radius_estimate,
            "K": self.K,
            "Kb": self.Kb,
        }


def _lsq_radius(b: np.ndarray) -> float:
    N = len(b) - 1
    k = np.arange(max(2, N // 2), N + 1)
    mag = np.abs(b[k])
    if np.all(mag == 0):
        return math.inf
    keep = mag > 0
    slope = np.polyfit(k[keep], np.log(mag[keep]), 1)[0]
    return math.exp(-slope)


def build_model(
    f,
    rot: RotationNumber | float,
    N: int = 200,
    K: int = 2000,
    Kb: int = 2000,
    fourier_iters: int = 20000,
    base: complex = 1.0,
) -> SiegelModel:
    """Series, boundary orbit samples and the boundary scale for ``f`` (critical point ``base`` on the boundary)."""
    theta = float(rot)
    if abs(abs(f.coeffs[1]) - 1) > 1e-12:
        raise ValueError("the multiplier at 0 must have modulus 1")
    if abs(f.coeffs[1] - cmath.exp(2j * math.pi * theta)) > 1e-12:
        raise ValueError("multiplier does not match the rotation number")
    b = linearization_series(f, N)
    long_orbit = boundary_orbit(f, max(K, fourier_iters), base)
    scale = fourier_scale(long_orbit[:fourier_iters], theta)
    backward = backward_boundary_orbit(f, theta, Kb, long_orbit, base)
    return SiegelModel(
        f=f,
        theta=theta,
        coeffs=b,
        scale=scale,
        radius_estimate=_lsq_radius(b),
        forward=long_orbit[: K + 1].copy(),
        backward=backward,
        rot=rot if isinstance(rot, RotationNumber) else None,
    )


def conformal_radius(model_or_coeffs) -> float:
    """Radius of convergence from a least-squares fit of ``log |b_k|`` on the upper half of the series.

    Returns ``math.inf`` when the tail vanishes (linear maps).
    """
    b = model_or_coeffs.coeffs if isinstance(model_or_coeffs, SiegelModel) else np.asarray(model_or_coeffs)
    return _lsq_radius(b)


def radius_diagnostics(model: SiegelModel) -> dict:
    r = conformal_radius(model)
    pts = np.concatenate([model.forward, model.backward])
    dmin = float(np.abs(pts).min())
    ratio = r / abs(model.scale) if model.scale else math.inf
    return {
        "lsq_radius": r,
        "fourier_radius": abs(model.scale),
        "boundary_min_modulus": dmin,
        "low_confidence": not (0.25 <= ratio <= 4) or dmin < 0.5 * min(r, abs(model.scale)),
    }


def functional_residual(model: SiegelModel, frac: float = 0.5, samples: int = 256) -> float:
    """``max |psi(lam w) - f(psi(w))|`` on ``|w| = frac * radius_estimate``."""
    w = frac * model.radius_estimate * np.exp(2j * math.pi * np.arange(samples) / samples)
    lam = model.f.coeffs[1]
    return float(np.abs(model.psi(lam * w) - model.f(model.psi(w))).max())


def polar_coordinates(model: SiegelModel, z: complex, tol: float = 1e-9) -> Polar | None:
    """Polar coordinates of ``z`` in the Siegel disk, or ``None`` when ``z`` is outside.

    Boundary samples answer exactly.  Interior points are inverted by Newton's
    method on the series from the best radial-grid seed; results with
    ``rho > 0.9`` are flagged because the truncated series is not trusted there.
    """
    z = complex(z)
    if abs(z) < 1e-14:
        return Polar(0.0, None)
    ks, ang, pts = model.polygon()
    dist = np.abs(pts - z)
    i = int(np.argmin(dist))
    if dist[i] <= tol * (1 + abs(z)):
        return Polar(1.0, float(ang[i]))
    inside = contains(model, z)
    if inside is False:
        return None
    rr = np.linspace(0.05, 0.95, 19)
    tt = np.arange(64) / 64
    seeds = (rr[:, None] * np.exp(2j * math.pi * tt[None, :])).ravel()
    u = seeds[np.argmin(np.abs(model.psi_bar(seeds) - z))]
    s = model.scale
    converged = False
    for _ in range(60):
        r = model.psi(s * u) - z
        if abs(r) < tol:
            converged = True
            break
        du = r / (s * _horner_derivative(model.coeffs, s * u))
        u = u - du
        if abs(u) > 1.2:
            break
    rho = abs(u)
    angle = (cmath.phase(u) / (2 * math.pi)) % 1.0
    if not converged:
        return Polar(min(rho, 1.0), angle, True, "newton did not converge")
    if inside is None or rho > TRUSTED_RHO:
        return Polar(rho, angle, True, "0.9 < rho < 1: series accuracy unquantified")
    return Polar(rho, angle)


def contains(model: SiegelModel, z: complex, tol: float = 1e-6) -> bool | None:
    """Winding number test against the sorted boundary-sample polygon; ``None`` within ``tol`` of it."""
    _, _, pts = model.polygon()
    if distance_to_polyline(pts, z)[0] < tol:
        return None
    return bool(winding_number(pts, z)[0] == 1)


def boundary_csv(model: SiegelModel) -> str:
    lines = ["k,angle,re,im"]
    for k in range(-model.Kb, model.K + 1):
        p = model.boundary_point(k)
        lines.append(f"{k},{model.angle_of(k):.17g},{p.real:.17g},{p.imag:.17g}")
    return "\n".join(lines) + "\n"
