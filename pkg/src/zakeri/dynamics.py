"""Polynomial families, Blaschke fractions and root solving.

Families
--------
``QuadraticMap``  ``Q(z) = lam z (1 - z/2)``, critical point 1.
``CubicMap``      ``P_c(z) = lam z (1 - (1 + 1/c) z / 2 + z^2 / (3c))``, critical points 1 and c.
``FigOneMap``     ``f(z) = lam z + sqrt(a) z^2 + z^3`` (principal square root).

All evaluate elementwise on numpy arrays.  ``preimages`` returns every solution
of ``map(z) = w`` with multiplicity, polished by Newton steps.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import PoleError
from .rotation import RotationNumber, multiplier

__all__ = [
    "QuadraticMap",
    "CubicMap",
    "FigOneMap",
    "BlaschkeFraction",
    "RigidRotation",
    "PolynomialMap",
    "critical_points",
    "preimages",
    "escape_time",
    "circle_rotation_number",
    "tune_rotation",
    "conjugate_parameter",
    "figone_to_cubic",
    "cubic_to_figone",
    "make_family",
]

NEWTON_POLISH_STEPS = 3
GOLDEN_THETA = (math.sqrt(5) - 1) / 2


def _lam(lam) -> complex:
    if isinstance(lam, RotationNumber):
        return multiplier(lam)
    return complex(lam)


class _Polynomial:
    """Shared evaluation and root solving for the polynomial families."""

    coeffs: np.ndarray  # ascending powers, coeffs[0] == 0

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        c = self.coeffs
        acc = c[-1] * np.ones_like(np.asarray(z, dtype=complex))
        for a in c[-2::-1]:
            acc = acc * z + a
        return acc if np.ndim(z) else complex(acc)

    eval = __call__

    def derivative(self, z):
        c = self.coeffs
        d = c[1:] * np.arange(1, len(c))
        acc = d[-1] * np.ones_like(np.asarray(z, dtype=complex))
        for a in d[-2::-1]:
            acc = acc * z + a
        return acc if np.ndim(z) else complex(acc)

    def iterate(self, z, n: int):
        for _ in range(n):
            z = self(z)
        return z

    def orbit_derivative(self, z: complex, n: int) -> complex:
        """``(f^n)'(z)`` by the chain rule."""
        d = 1 + 0j
        for _ in range(n):
            d *= self.derivative(z)
            z = self(z)
        return d

    def preimages_array(self, w) -> np.ndarray:
        """All preimages of each ``w``; shape ``w.shape + (degree,)``."""
        w = np.asarray(w, dtype=complex)
        flat = w.reshape(-1)
        roots = self._initial_roots(flat)
        roots = self._polish(roots, flat)
        bad = np.abs(self(roots) - flat[:, None]).max(axis=1) > 1e-10 * (1 + np.abs(flat))
        if bad.any():
            roots[bad] = self._polish(_companion_roots(self.coeffs, flat[bad]), flat[bad])
        return roots.reshape(w.shape + (self.degree,))

    def preimages(self, w: complex) -> list[complex]:
        return [complex(z) for z in self.preimages_array(np.array([w]))[0]]

    def _polish(self, roots, w):
        roots = roots.copy()
        for _ in range(NEWTON_POLISH_STEPS):
            f = self(roots) - w[:, None]
            d = self.derivative(roots)
            ok = np.abs(d) > 1e-300
            step = np.where(ok, f / np.where(ok, d, 1), 0)
            cand = roots - step
            better = np.abs(self(cand) - w[:, None]) < np.abs(f)
            roots = np.where(better, cand, roots)
        return roots

    def _initial_roots(self, w):
        if self.degree == 1:
            return ((w - self.coeffs[0]) / self.coeffs[1])[:, None]
        if self.degree == 2:
            return _quadratic_roots(self.coeffs, w)
        if self.degree == 3:
            return _cubic_roots(self.coeffs, w)
        return _companion_roots(self.coeffs, w)


def _quadratic_roots(coeffs, w):
    c0 = coeffs[0] - w
    b, a = coeffs[1], coeffs[2]
    disc = np.sqrt(b * b - 4 * a * c0)
    # pick the sign that avoids cancellation
    s = np.where(np.real(np.conj(b) * disc) >= 0, 1, -1)
    q = -0.5 * (b + s * disc)
    safe = np.abs(q) > 0
    r1 = q / a
    r2 = np.where(safe, c0 / np.where(safe, q, 1), r1)
    return np.stack([r1, r2], axis=-1)


def _cubic_roots(coeffs, w):
    # Cardano on the depressed cubic; companion fallback handles inaccurate cases
    a3, a2, a1 = coeffs[3], coeffs[2], coeffs[1]
    a0 = coeffs[0] - w
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = np.sqrt((q / 2) ** 2 + (p / 3) ** 3)
    u3a, u3b = -q / 2 + disc, -q / 2 - disc
    u3 = np.where(np.abs(u3a) >= np.abs(u3b), u3a, u3b)
    u = u3 ** (1 / 3)
    omega = cmath.exp(2j * math.pi / 3)
    out = []
    for k in range(3):
        uk = u * omega**k
        safe = np.abs(uk) > 0
        vk = np.where(safe, -p / (3 * np.where(safe, uk, 1)), 0)
        out.append(uk + vk - b / 3)
    return np.stack(out, axis=-1)


def _companion_roots(coeffs, w):
    n = len(coeffs) - 1
    m = len(w)
    lead = coeffs[-1]
    comp = np.zeros((m, n, n), dtype=complex)
    comp[:, 1:, :-1] = np.eye(n - 1)
    low = np.tile(np.asarray(coeffs[:-1], dtype=complex), (m, 1))
    low[:, 0] -= w
    comp[:, :, -1] = -low / lead
    return np.linalg.eigvals(comp)


@dataclass(frozen=True)
class QuadraticMap(_Polynomial):
    lam: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", _lam(self.lam))

    @property
    def coeffs(self):
        return np.array([0, self.lam, -self.lam / 2], dtype=complex)

    def critical_points(self) -> list[complex]:
        return [1 + 0j]

    def _initial_roots(self, w):
        # Q(z) = w  <=>  (1 - z)^2 = 1 - 2w/lam
        s = np.sqrt(1 - 2 * w / self.lam)
        return np.stack([1 - s, 1 + s], axis=-1)

    @property
    def name(self):
        return "q"


@dataclass(frozen=True)
class CubicMap(_Polynomial):
    lam: complex
    c: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", _lam(self.lam))
        object.__setattr__(self, "c", complex(self.c))
        if self.c == 0:
            raise ValueError("c = 0 is the puncture of the cubic family")

    @property
    def coeffs(self):
        lam, c = self.lam, self.c
        return np.array([0, lam, -lam * (1 + 1 / c) / 2, lam / (3 * c)], dtype=complex)

    def critical_points(self) -> list[complex]:
        return [1 + 0j, self.c]

    @property
    def name(self):
        return "cubic"


@dataclass(frozen=True)
class FigOneMap(_Polynomial):
    lam: complex
    a: complex

    def __post_init__(self):
        object.__setattr__(self, "lam", _lam(self.lam))
        object.__setattr__(self, "a", complex(self.a))

    @property
    def sqrt_a(self) -> complex:
        return cmath.sqrt(self.a)

    @property
    def coeffs(self):
        return np.array([0, self.lam, self.sqrt_a, 1], dtype=complex)

    def critical_points(self) -> list[complex]:
        # f'(z) = 3 z^2 + 2 sqrt(a) z + lam
        r = _quadratic_roots(np.array([self.lam, 2 * self.sqrt_a, 3], dtype=complex), np.zeros(1))[0]
        return [complex(x) for x in r]

    @property
    def name(self):
        return "figone"


class PolynomialMap(_Polynomial):
    """A polynomial fixing 0, given by ascending coefficients (``coeffs[0]`` must be 0)."""

    def __init__(self, coeffs):
        coeffs = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
        if len(coeffs) < 2 or coeffs[0] != 0:
            raise ValueError("need a nonconstant polynomial with f(0) = 0")
        self._coeffs = coeffs

    @property
    def coeffs(self):
        return self._coeffs

    @property
    def lam(self) -> complex:
        return complex(self._coeffs[1])

    def critical_points(self) -> list[complex]:
        d = self._coeffs[1:] * np.arange(1, len(self._coeffs))
        if len(d) == 1:
            return []
        return [complex(r) for r in np.roots(d[::-1])]

    @property
    def name(self):
        return "poly"


def critical_points(f) -> list[complex]:
    return f.critical_points()


def preimages(f, w: complex) -> list[complex]:
    return f.preimages(w)


def escape_time(f, z0: complex, radius: float = 100.0, max_iter: int = 1000) -> tuple[bool, int]:
    """First ``n`` with ``|f^n(z0)| > radius``; ``z0`` itself counts as iteration 0."""
    if radius < 4 or max_iter < 1:
        raise ValueError("need radius >= 4 and max_iter >= 1")
    z = complex(z0)
    for n in range(max_iter + 1):
        if abs(z) > radius:
            return True, n
        if n < max_iter:
            z = f(z)
    return False, max_iter


# --- the c <-> 1/c involution and the Fig. 1 parameterization -----------------


def conjugate_parameter(c: complex, lam=None, samples: int = 50, tol: float = 1e-10):
    """Return ``(1/c, A)`` with ``A(z) = z / c`` and ``A o P_c = P_{1/c} o A``.

    The witness is checked on sample points before it is returned.
    """
    c = complex(c)
    if c == 0:
        raise ValueError("c must be nonzero")
    lam = multiplier(GOLDEN_THETA) if lam is None else _lam(lam)
    p, p_inv = CubicMap(lam, c), CubicMap(lam, 1 / c)

    def witness(z):
        return z / c

    z = 1.5 * np.exp(2j * math.pi * np.arange(samples) / samples) * np.linspace(0.2, 1, samples)
    err = np.abs(witness(p(z)) - p_inv(witness(z))).max()
    if err > tol * max(1.0, abs(c), 1 / abs(c)) ** 3:
        raise AssertionError(f"conjugacy witness failed, residual {err:g}")
    return 1 / c, witness


def cubic_to_figone(c: complex, lam) -> complex:
    """The ``a`` with ``[f_a]_0 = [P_c]_0``: ``a = 3 lam (1 + c)^2 / (4c)``."""
    lam = _lam(lam)
    c = complex(c)
    return 3 * lam * (1 + c) ** 2 / (4 * c)


def figone_to_cubic(a: complex, lam, check: bool = True) -> complex:
    """The ``c`` with ``[P_c]_0 = [f_a]_0``.

    With critical points ``r1, r2`` of ``f_a`` the rescaling ``z = r1 w``
    sends ``f_a`` to ``P_c`` with ``c = r2 / r1``.  The choice of which critical
    point is normalized to 1 only changes ``c`` to ``1/c``.  A double critical
    point gives ``c = 1``.
    """
    lam = _lam(lam)
    f = FigOneMap(lam, a)
    r1, r2 = sorted(f.critical_points(), key=lambda r: (round(r.real, 12), round(r.imag, 12)))
    if abs(r1 - r2) < 1e-12 * max(1.0, abs(r1)):
        c = 1 + 0j
    else:
        c = r2 / r1
    if check and c != 1:
        p = CubicMap(lam, c)
        w = 0.7 * np.exp(2j * math.pi * np.arange(16) / 16)
        res = np.abs(f(r1 * w) / r1 - p(w)).max()
        if res > 1e-8:
            raise AssertionError(f"figone_to_cubic conjugacy residual {res:g}")
    return c


# --- circle maps ---------------------------------------------------------------


@dataclass(frozen=True)
class BlaschkeFraction:
    """``B(z) = e^{2 pi i t} z^3 (z - p)/(1 - conj(p) z) (z - q)/(1 - conj(q) z)``."""

    t: float
    p: complex
    q: complex

    def __post_init__(self):
        if abs(self.p) <= 1 or abs(self.q) <= 1:
            raise ValueError("need |p| > 1 and |q| > 1")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        p, q = self.p, self.q
        den = (1 - np.conj(p) * z) * (1 - np.conj(q) * z)
        if np.any(np.abs(den) < 1e-300):
            raise PoleError("evaluation at a pole of the Blaschke fraction")
        val = np.exp(2j * math.pi * self.t) * z**3 * (z - p) * (z - q) / den
        return complex(val) if val.ndim == 0 else val

    eval = __call__

    def lift(self, x):
        """A continuous lift ``F`` of ``B`` on the circle, ``F(x + 1) = F(x) + 1``.

        On ``|z| = 1`` each factor equals ``conj(z) e^{2i arg(z - p)}`` and
        ``arg(z - p) = arg(-p) + Arg(1 - z/p)`` is continuous because ``|p| > 1``.
        """
        z = np.exp(2j * math.pi * np.asarray(x, dtype=float))
        offs = (cmath.phase(-self.p) + cmath.phase(-self.q)) / math.pi
        var = (np.angle(1 - z / self.p) + np.angle(1 - z / self.q)) / math.pi
        return self.t + x + offs + var

    def circle_degree(self, samples: int = 4096) -> int:
        x = np.arange(samples + 1) / samples
        ang = np.unwrap(np.angle(self(np.exp(2j * math.pi * x))))
        return int(round((ang[-1] - ang[0]) / (2 * math.pi)))

    def is_circle_homeomorphism(self, samples: int = 4096) -> bool:
        """True when the lift is strictly increasing on a sample grid."""
        x = np.arange(samples + 1) / samples
        return bool(np.all(np.diff(self.lift(x)) > 0))

    def with_t(self, t: float) -> "BlaschkeFraction":
        return BlaschkeFraction(t, self.p, self.q)


@dataclass(frozen=True)
class RigidRotation:
    t: float

    def __call__(self, z):
        return np.exp(2j * math.pi * self.t) * np.asarray(z)

    def lift(self, x):
        return x + self.t

    def with_t(self, t: float) -> "RigidRotation":
        return RigidRotation(t)


def _bump_weights(n: int) -> np.ndarray:
    s = (np.arange(n) + 0.5) / n
    w = np.exp(-1.0 / (s * (1 - s)))
    return w / w.sum()


def circle_rotation_number(circle_map, iters: int = 20000, x0: float = 0.0, weighted: bool = True) -> float:
    """Rotation number (mod 1) from Birkhoff averages of the lift displacement.

    ``weighted=True`` uses a smooth bump weight, which converges much faster
    than the plain mean for smooth circle diffeomorphisms; the plain mean has the
    classical ``< 1/iters`` error.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    if isinstance(circle_map, BlaschkeFraction) and not circle_map.is_circle_homeomorphism():
        raise ValueError("Blaschke fraction does not restrict to a circle homeomorphism; rotation number undefined")
    xs = np.empty(iters + 1)
    x = float(x0)
    lift = circle_map.lift
    for n in range(iters):
        xs[n] = x
        x = float(lift(x))
        if not math.isfinite(x):
            raise PoleError("lift blew up along the orbit")
    xs[iters] = x
    disp = np.diff(xs)
    if weighted:
        rho = float(np.dot(_bump_weights(iters), disp))
    else:
        rho = (xs[-1] - xs[0]) / iters
    return rho % 1.0


def _lifted_rho(circle_map, iters, weighted):
    # real-valued rotation number of the lift, not reduced mod 1
    xs = [0.0]
    x = 0.0
    for _ in range(iters):
        x = float(circle_map.lift(x))
        xs.append(x)
    disp = np.diff(xs)
    return float(np.dot(_bump_weights(iters), disp)) if weighted else (xs[-1] - xs[0]) / iters


def tune_rotation(circle_map, target: float, iters: int = 20000, tol: float = 1e-12, max_steps: int = 80):
    """Bisection on ``t`` so that the rotation number of ``circle_map.with_t(t)`` is ``target``.

    The lifted rotation number is nondecreasing in ``t`` and gains exactly 1 as
    ``t`` gains 1, which brackets the solution in a unit interval.
    """
    base = _lifted_rho(circle_map.with_t(0.0), iters, True)
    goal = base + (target - base) % 1.0
    lo, hi = 0.0, 1.0
    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        if _lifted_rho(circle_map.with_t(mid), iters, True) < goal:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            break
    t = 0.5 * (lo + hi)
    return t, circle_map.with_t(t)


def make_family(name: str, lam, c=None, a=None):
    name = name.lower()
    if name == "q":
        return QuadraticMap(lam)
    if name == "cubic":
        if c is None:
            raise ValueError("cubic family needs c")
        return CubicMap(lam, c)
    if name == "figone":
        if a is None:
            raise ValueError("figone family needs a")
        return FigOneMap(lam, a)
    raise ValueError(f"unknown polynomial family {name!r}")
