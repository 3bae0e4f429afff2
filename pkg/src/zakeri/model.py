"""The dynamical correspondence eta between a cubic and the quadratic model, the
parameter map Phi(c) = eta(c), and the quotient of the Siegel boundary by
``alpha ~ 1 - alpha``.

Points carry a multi-angle and a polar radius.  The last angle is stored as an
integer ``m`` (angle ``-m theta``) when it is a legal angle and as a real
``tail_angle`` otherwise; in the latter case ``ma`` holds only the preceding
entries (an even-length prefix, or ``None`` on the Siegel disk).

Attach points shared by a bubble and the bubble it hangs from are reported with
the odd-length (shorter) reading: the root of ``a + (a[-1], m)`` is the boundary
point ``a + (a[-1], m)`` of ``a``, never ``a + (a[-1], m, m)`` with rho = 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._geometry import distance_to_polyline, winding_number
from .bubbles import BubbleTree
from .dynamics import CubicMap, QuadraticMap, _bump_weights, escape_time
from .errors import DomainError, EscapeError, UnresolvedError
from .multiangle import MultiAngle, validate
from .rotation import RotationNumber, convergents, multiplier
from .siegel import _interpolate_on_circle, boundary_orbit, build_model, fourier_scale, polar_coordinates

__all__ = [
    "ModelPoint",
    "ModelTrees",
    "eta_eval",
    "locate_point",
    "phi",
    "quotient_project",
    "symmetry_residual",
    "zakeri_curve_points",
    "boundary_gap",
]

INFINITE_RHO = math.inf
BOUNDED_ITERS = 10_000
ON_CURVE_TOL = 5e-3
# orbit length of the Birkhoff averages; the curve sampler and phi must agree on it
BIRKHOFF_ITERS = 20_000
RECURRENCE_FACTOR = 10.0
LOCATE_TOL = 1e-6


@dataclass(frozen=True)
class ModelPoint:
    ma: MultiAngle | None
    rho: float
    embedded: complex | None
    tail_angle: float | None = None
    quotient_canonical: bool = False
    resolved: bool = True
    depth: int = 0
    theta: float = 0.0
    notes: tuple[str, ...] = field(default=())

    @property
    def address(self) -> tuple[int, ...]:
        """Address of the bubble holding the point (``()`` for the Siegel disk)."""
        ms = self.ma.ms if self.ma is not None else ()
        if self.tail_angle is None:
            n = len(ms) // 2
        else:
            n = (len(ms) + 1) // 2
        return ms[: 2 * n - 1] if n else ()

    @property
    def last_angle(self) -> float | None:
        if self.tail_angle is not None:
            return self.tail_angle
        if self.ma is None:
            return None
        return (-self.ma.ms[-1] * self.theta) % 1.0

    @property
    def on_siegel_boundary(self) -> bool:
        return not self.address and self.rho == 1.0

    @property
    def canonical_angle(self) -> float | None:
        if not self.on_siegel_boundary:
            return None
        a = self.last_angle
        return min(a, 1.0 - a) if a is not None else None

    def to_dict(self) -> dict:
        e = self.embedded
        return {
            "address": None if self.ma is None else list(self.ma.ms),
            "tail_angle": self.tail_angle,
            "rho": None if math.isinf(self.rho) else self.rho,
            "embedded": None if e is None else [e.real, e.imag],
            "canonical_angle": self.canonical_angle,
            "depth": self.depth,
            "resolved": self.resolved,
            "notes": list(self.notes),
        }


def _split(ma, tail_angle, theta):
    """``(bubble address, generation, siegel angle, siegel index or None)`` of a point."""
    ms = tuple(ma.ms) if ma is not None else ()
    if tail_angle is None:
        if not ms:
            raise ValueError("a point needs a multi-angle or a tail angle")
        n = len(ms) // 2
        address = ms[: 2 * n - 1] if n else ()
        g = address[-1] + 1 if address else 0
        k = g - ms[-1]
        return address, g, (k * theta) % 1.0, k
    if len(ms) % 2:
        raise ValueError("with a tail angle the integer part must have even length")
    address = ms[:-1]
    g = address[-1] + 1 if address else 0
    return address, g, (tail_angle + g * theta) % 1.0, None


def eta_eval(q_tree: BubbleTree, ma, rho: float, tail_angle: float | None = None) -> ModelPoint:
    """The point of the quadratic model with multi-angle ``ma`` and polar radius ``rho``."""
    if ma is not None and not isinstance(ma, MultiAngle):
        ma = validate(ma)
    if not (0.0 <= rho <= 1.0):
        raise ValueError("rho must lie in [0, 1]")
    theta = q_tree.theta
    address, g, beta, k = _split(ma, tail_angle, theta)
    try:
        if rho == 0.0:
            z = q_tree.get(address).center if address else 0j
            if z is None:
                raise UnresolvedError(f"center of bubble {list(address)} is undefined")
        elif rho == 1.0 and k is None:
            b = q_tree.get(address)
            z = _interpolate_on_circle(q_tree.vertex_angles(b) + g * theta, b.boundary, beta)
        else:
            z = q_tree.point(address, rho, beta, index=k)
    except UnresolvedError as exc:
        deepest = ()
        for n in range(1, len(address) + 1, 2):
            if tuple(address[:n]) in q_tree.bubbles:
                deepest = address[:n]
        raise UnresolvedError(f"{exc}; deepest resolved prefix {list(deepest)}", partial=deepest) from exc
    notes = ("boundary point interpolated between samples",) if (rho == 1.0 and k is None) else ()
    return ModelPoint(ma, rho, complex(z), tail_angle, depth=g, theta=theta, notes=notes)


def _legal_index(angle: float, theta: float, limit: int, tol: float = 1e-9) -> int | None:
    """``m`` with ``-m theta == angle (mod 1)`` for some ``0 <= m <= limit``."""
    m = np.arange(limit + 1)
    d = np.abs(((-m * theta - angle) + 0.5) % 1.0 - 0.5)
    i = int(np.argmin(d))
    return int(m[i]) if d[i] < tol else None


def _point_in_bubble(tree: BubbleTree, b, z: complex) -> ModelPoint:
    """Multi-angle data of ``z`` in the closure of bubble ``b`` (``f^gen`` transports it to the Siegel disk)."""
    theta, g = tree.theta, b.generation
    w = tree.f.iterate(z, g) if g else z
    pol = polar_coordinates(tree.model, w, tol=1e-9)
    if pol is None:
        raise UnresolvedError(f"f^{g}(z) is not in the Siegel disk")
    notes = (pol.note,) if pol.flagged and pol.note else ()
    if pol.angle is None:  # the center
        ms = b.address + (b.address[-1],) if b.address else (0,)
        return ModelPoint(MultiAngle(ms), 0.0, None, depth=g, theta=theta, notes=notes)
    alpha = (pol.angle - g * theta) % 1.0
    last = b.last
    m = _legal_index(alpha, theta, g + tree.model.Kb)
    rho = 1.0 if pol.rho >= 1.0 else float(pol.rho)
    if m is not None and m >= max(last, 0) and not (b.address and m == last and rho == 1.0):
        ms = (b.address + (last, m)) if b.address else (m,)
        return ModelPoint(MultiAngle(ms), rho, None, depth=g, theta=theta, notes=notes)
    if b.address and m == last and rho == 1.0:
        # the root: report it as a boundary point of the bubble it hangs from
        return _attach_reading(tree, b, theta, notes)
    prefix = MultiAngle(b.address + (last,)) if b.address else None
    return ModelPoint(prefix, rho, None, alpha, depth=g, theta=theta, notes=notes)


def _attach_reading(tree, b, theta, notes=()):
    return ModelPoint(MultiAngle(b.address), 1.0, None, depth=b.parent.generation if b.parent else 0,
                      theta=theta, notes=tuple(notes))


def locate_point(tree: BubbleTree, z: complex, max_gen: int | None = None, tol: float = LOCATE_TOL) -> ModelPoint:
    """Multi-angle and polar radius of ``z`` in the bubble structure of ``tree``.

    ``embedded`` is left ``None``; it belongs to the quadratic model (see :func:`eta_eval`).
    """
    f, theta = tree.f, tree.theta
    z = complex(z)
    escaped, _ = escape_time(f, z, max_iter=BOUNDED_ITERS)
    if escaped:
        raise DomainError("z escapes: outside the filled Julia set")
    delta = tree.delta.boundary
    near = distance_to_polyline(delta, z)[0]
    if near < tol or winding_number(delta, z)[0] != 0:
        return _point_in_bubble(tree, tree.delta, z)
    candidates = [b for b in tree.bubbles.values() if b.address and (max_gen is None or b.generation <= max_gen)]
    candidates.sort(key=lambda b: (b.generation, b.address))
    hits, deepest = [], None
    for b in candidates:
        d = distance_to_polyline(b.boundary, z)[0]
        if d < tol or winding_number(b.boundary, z)[0] != 0:
            hits.append((b, d))
    if not hits:
        # deepest bubble whose children surround z is not decided without the wedges; report the
        # nearest bubble as a truncated prefix
        if candidates:
            deepest = min(candidates, key=lambda b: distance_to_polyline(b.boundary, z)[0])
        ms = deepest.address if deepest is not None else (0,)
        return ModelPoint(MultiAngle(ms, truncated=True), INFINITE_RHO, None, resolved=False,
                          depth=deepest.generation if deepest is not None else 0, theta=theta,
                          notes=("not in any constructed bubble closure; nearest bubble address reported",))
    interior = [b for b, d in hits if d >= tol]
    b = interior[0] if interior else hits[0][0]
    if len(interior) > 1:
        raise UnresolvedError("point inside several bubble polygons", partial=[x.address for x in interior])
    return _point_in_bubble(tree, b, z)


@dataclass
class ModelTrees:
    """Quadratic model with its bubble tree, shared by repeated ``phi`` calls."""

    rot: RotationNumber
    max_gen: int = 6
    K: int = 2000
    Kb: int = 2000
    q_tree: BubbleTree | None = None

    def __post_init__(self):
        if self.q_tree is None:
            q = QuadraticMap(self.rot)
            self.q_tree = BubbleTree(q, build_model(q, self.rot, K=self.K, Kb=self.Kb))
            self.q_tree.build(self.max_gen)

    @property
    def theta(self) -> float:
        return float(self.rot)

    def cubic_tree(self, c: complex) -> BubbleTree:
        f = CubicMap(self.rot, c)
        tree = BubbleTree(f, build_model(f, self.rot, K=self.K, Kb=self.Kb), critical=c)
        tree.build(self.max_gen)
        return tree


def _birkhoff(f, base, theta, iters=BIRKHOFF_ITERS):
    try:
        return fourier_scale(boundary_orbit(f, iters, base=base), theta)
    except EscapeError:
        return None


def _recurs_like_critical_value(f, z: complex, rot: RotationNumber, q_range=(500, 20_000)) -> bool:
    """Does ``z`` return near itself along convergent denominators as closely as 1 does?

    Points of the Siegel boundary satisfy ``f^q(z) -> z`` along the denominators ``q``
    of the convergents of theta; a point of a bubble closure lands on the boundary
    instead and stays a fixed distance away.
    """
    qs = [q for _, q in convergents(rot, 40) if q_range[0] <= q <= q_range[1]]
    if not qs:
        raise ValueError("no convergent denominators in range")
    zs = np.array([1.0 + 0j, complex(z)])
    orbit = [zs]
    for _ in range(max(qs)):
        zs = f(zs)
        orbit.append(zs)
    e = np.array([np.abs(orbit[q] - orbit[0]) for q in qs]).max(axis=0)
    return bool(e[1] <= RECURRENCE_FACTOR * e[0] + 1e-12)


def phi(c: complex, rot: RotationNumber, trees: ModelTrees | None = None, max_gen: int = 6) -> ModelPoint:
    """``eta(c)`` for the cubic with critical points 1 and ``c`` (1 on the Siegel boundary)."""
    trees = trees or ModelTrees(rot, max_gen=max_gen)
    theta = float(rot)
    c = complex(c)
    if abs(c - 1) < 1e-12:
        return eta_eval(trees.q_tree, MultiAngle((0,)), 1.0)
    f = CubicMap(rot, c)
    for z in (1.0, c):
        escaped, n = escape_time(f, z, max_iter=BOUNDED_ITERS)
        if escaped:
            raise DomainError(f"critical point {z} escapes after {n} iterations: outside the connectedness locus")
    s1, sc = _birkhoff(f, 1.0, theta), _birkhoff(f, c, theta)
    if s1 is None or sc is None:
        raise DomainError("a critical orbit left the bounded region")
    ratio = abs(sc) / abs(s1)
    if ratio > 1 + ON_CURVE_TOL:
        raise DomainError("1 is not on the Siegel boundary for this parameter (c is)")
    if abs(ratio - 1) <= ON_CURVE_TOL:
        delta = (cmath.phase(sc / s1) / (2 * math.pi)) % 1.0
        if _recurs_like_critical_value(f, c, rot):
            m = _legal_index(delta, theta, trees.K)
            if m is not None:
                mp = eta_eval(trees.q_tree, MultiAngle((m,)), 1.0)
            else:
                mp = eta_eval(trees.q_tree, None, 1.0, tail_angle=delta)
            return replace(mp, notes=mp.notes + (f"c on the Siegel boundary; angular difference {delta:.12g}",))
    tree = trees.cubic_tree(c)
    loc = locate_point(tree, c, max_gen=trees.max_gen)
    if not loc.resolved:
        return loc
    ep = eta_eval(trees.q_tree, loc.ma, loc.rho, loc.tail_angle)
    return replace(ep, notes=loc.notes + ep.notes)


def quotient_project(mp: ModelPoint) -> ModelPoint:
    """Identify Siegel-boundary angles ``alpha ~ 1 - alpha``; canonical angle in ``[0, 1/2]``."""
    if not mp.on_siegel_boundary or mp.quotient_canonical:
        return mp
    a = mp.last_angle
    if a <= 0.5:
        return replace(mp, quotient_canonical=True)
    return replace(mp, ma=None, tail_angle=1.0 - a, quotient_canonical=True)


def _quotient_distance(p: ModelPoint, q: ModelPoint) -> float:
    if p.on_siegel_boundary and q.on_siegel_boundary:
        return abs(p.canonical_angle - q.canonical_angle)
    if p.embedded is None or q.embedded is None:
        raise UnresolvedError("phi unresolved; compare only resolved values")
    if p.on_siegel_boundary != q.on_siegel_boundary:
        return abs(p.embedded - q.embedded)
    return abs(p.embedded - q.embedded)


def symmetry_residual(c: complex, rot: RotationNumber, trees: ModelTrees | None = None) -> float:
    """Distance in quotient coordinates between ``phi(c)`` and ``phi(1/c)``."""
    trees = trees or ModelTrees(rot)
    p = quotient_project(phi(c, rot, trees))
    q = quotient_project(phi(1 / complex(c), rot, trees))
    for x in (p, q):
        if not x.resolved:
            raise UnresolvedError("phi unresolved", partial=x)
    return _quotient_distance(p, q)


def boundary_gap(cs, rot: RotationNumber, iters: int = 4000) -> np.ndarray:
    """``|C(1)| - |C(c)|`` for the cubics ``P_c``, vectorized over ``cs``.

    ``C(z)`` is the weighted Birkhoff average of ``P^k(z) e^{-2 pi i k theta}``: its
    modulus equals the boundary scale when the orbit of ``z`` lies on the Siegel
    boundary and is smaller otherwise.  Escaping orbits count as modulus 0.
    """
    theta = float(rot)
    lam = multiplier(rot)
    cs = np.atleast_1d(np.asarray(cs, dtype=complex))
    a2 = -lam * (1 + 1 / cs) / 2
    a3 = lam / (3 * cs)
    w = _bump_weights(iters)
    rot_k = np.exp(-2j * math.pi * ((np.arange(iters) * theta) % 1.0))
    out = []
    for z0 in (np.ones_like(cs), cs.copy()):
        z = z0
        acc = np.zeros_like(cs)
        alive = np.ones(cs.shape, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            for k in range(iters):
                alive &= np.abs(z) < 10
                acc += np.where(alive, w[k] * rot_k[k] * z, 0)
                z = np.where(alive, z * (lam + z * (a2 + z * a3)), 0)
        out.append(np.where(alive, np.abs(acc), 0.0))
    return out[0] - out[1]


def zakeri_curve_points(rot: RotationNumber, n: int, r_range=(0.05, 20.0), steps: int = 30,
                        iters: int = BIRKHOFF_ITERS, offset: float = 0.0) -> np.ndarray:
    """Parameters ``c`` with both critical points on the Siegel boundary, one per ray ``arg c``.

    Geometric bisection in ``|c|`` along ``n`` rays on the sign of :func:`boundary_gap`
    (negative near 0, positive near infinity).  Rays without a sign change give nan.
    """
    phis = 2 * math.pi * (np.arange(n) + 0.5 + offset) / n
    u = np.exp(1j * phis)
    lo = np.full(n, math.log(r_range[0]))
    hi = np.full(n, math.log(r_range[1]))
    g_lo = boundary_gap(np.exp(lo) * u, rot, iters)
    g_hi = boundary_gap(np.exp(hi) * u, rot, iters)
    ok = (g_lo < 0) & (g_hi > 0)
    for _ in range(steps):
        mid = (lo + hi) / 2
        g = boundary_gap(np.exp(mid) * u, rot, iters)
        pos = g > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    c = np.exp((lo + hi) / 2) * u
    return np.where(ok, c, np.nan)
