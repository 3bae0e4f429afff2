"""Bubbles (iterated pullbacks of the Siegel disk), bubble chains and bubble rays.

Addressing.  A bubble is addressed by the multi-angle of its root, an odd-length
legal sequence ``(m_0, m_0, m_2, m_2, ..., m_{2n})``.  Its generation is
``m_{2n} + 1``.  The bubble ``a + (a[-1], m)`` is attached to the bubble ``a`` at
the boundary point of polar angle ``-m theta``; ``(m)`` is attached to the
Siegel disk at the boundary point of angle ``-m theta``.  ``f`` maps the bubble
addressed ``a`` onto the bubble addressed ``Pi(a)`` (the Siegel disk when
``a == (0,)``).

Boundary polylines.  Every bubble boundary is sampled at the same Siegel
boundary indices ``k``: the vertex with index ``k`` is the point ``z`` of the
bubble boundary with ``f^gen(z)`` equal to the Siegel boundary point of angle
``k theta``.  Its polar angle in the bubble is ``(k - gen) theta``.  A child's
boundary is obtained from its image's boundary by continuing one branch of
``f^{-1}`` around the loop, starting at the child's root.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._geometry import diameter, distance_to_polyline, winding_number
from .errors import PullbackError, UnresolvedError
from .multiangle import MultiAngle, MultiAngleStream, pi_step, validate

__all__ = [
    "Bubble",
    "BubbleTree",
    "BubbleRay",
    "attach_point",
    "pull_back_bubble",
    "build_bubble_tree",
    "bubble_chain",
    "trace_bubble_ray",
    "tree_to_json",
]

AMBIGUITY_RATIO = 0.5
LANDING_DIAMETER = 1e-6
MAX_RAY_BUBBLES = 200
INCOMING_STEPS = 48


@dataclass(eq=False)
class Bubble:
    address: tuple[int, ...]  # () for the Siegel disk itself
    generation: int
    root: complex | None
    center: complex | None
    boundary: np.ndarray
    incoming: np.ndarray | None  # polyline from the root to the center
    kind: str = "off-critical"
    parent: "Bubble | None" = None
    image: "Bubble | None" = None
    notes: list[str] = field(default_factory=list)
    children: list["Bubble"] = field(default_factory=list)

    @property
    def multiangle(self) -> MultiAngle | None:
        return MultiAngle(self.address) if self.address else None

    @property
    def is_siegel_disk(self) -> bool:
        return not self.address

    @property
    def last(self) -> int:
        """Last address entry; -1 for the Siegel disk so that its children start at m = 0."""
        return self.address[-1] if self.address else -1

    @property
    def diameter(self) -> float:
        return diameter(self.boundary)

    def __repr__(self):
        return f"Bubble({list(self.address)}, gen={self.generation}, kind={self.kind})"


def _lift_sequence(f, targets: np.ndarray, anchor: complex, exclude: np.ndarray | None = None):
    """Continue one branch of ``f^{-1}`` along ``targets`` starting at the preimage nearest ``anchor``.

    ``exclude`` removes, per step, the preimage nearest the given point.  Returns the
    lifted points and the worst ratio nearest/second-nearest seen along the way.
    """
    roots = f.preimages_array(np.asarray(targets, dtype=complex))
    if exclude is not None:
        drop = np.argmin(np.abs(roots - np.asarray(exclude)[:, None]), axis=1)
        roots[np.arange(len(roots)), drop] = np.nan
    rows = roots.tolist()
    out = np.empty(len(rows), dtype=complex)
    prev = complex(anchor)
    worst = 0.0
    for i, row in enumerate(rows):
        best, second, pick = math.inf, math.inf, 0j
        for r in row:
            if r != r:  # nan
                continue
            d = abs(r - prev)
            if d < best:
                best, second, pick = d, best, r
            elif d < second:
                second = d
        if second < math.inf and second > 0:
            worst = max(worst, best / second)
        out[i] = pick
        prev = pick
    return out, worst


def _lift_loop(f, targets: np.ndarray, anchor: complex, exclude: np.ndarray | None = None):
    """Lift a closed loop starting at ``anchor``; a second lap is taken if the first does not close.

    Returns ``(points, laps, worst_ratio)``; ``laps == 2`` means ``f`` is two-to-one on the component.
    """
    def back_to(last):
        again = f.preimages_array(np.array([targets[0]]))[0]
        if exclude is not None:
            again = np.delete(again, np.argmin(np.abs(again - exclude[0])))
        return complex(again[np.argmin(np.abs(again - last))])

    loop, worst = _lift_sequence(f, targets, anchor, exclude)
    # a wrong sheet is a full root separation away; a double root at the anchor is only ~sqrt(eps) accurate
    tol = max(1e-9 * (1 + abs(anchor)), 1e-2 * float(np.median(np.abs(np.diff(loop)))))
    nxt = back_to(loop[-1])
    if abs(nxt - anchor) < tol:
        return loop, 1, worst
    lap2, w2 = _lift_sequence(f, targets, nxt, exclude)
    if abs(back_to(lap2[-1]) - anchor) >= tol:
        raise PullbackError("lifted boundary loop closes after neither one nor two laps")
    return np.concatenate([loop, lap2]), 2, max(worst, w2)


class BubbleTree:
    """Lazily built, memoized bubbles of one polynomial with a Siegel disk.

    ``get(address)`` constructs a bubble and, recursively, everything it depends on
    (its image bubble and the bubble it is attached to).
    """

    def __init__(self, f, model, critical: complex | None = None):
        self.f = f
        self.model = model
        self.theta = model.theta
        self.critical = critical if critical is not None else self._free_critical_point(f)
        lo, hi = -model.Kb + 1, model.K
        ks = np.arange(lo, hi + 1)
        order = np.argsort((ks * self.theta) % 1.0, kind="stable")
        self.ks = ks[order]
        self._pos = np.empty(len(ks), dtype=int)
        self._pos[self.ks - lo] = np.arange(len(ks))
        self._lo = lo
        self.bubbles: dict[tuple, Bubble] = {}
        pts = np.array([model.boundary_point(int(k)) for k in self.ks])
        self.delta = Bubble((), 0, None, 0j, pts, None)
        self.bubbles[()] = self.delta

    @staticmethod
    def _free_critical_point(f):
        crit = [c for c in f.critical_points() if abs(c - 1) > 1e-12]
        return crit[0] if crit else None

    # --- indexing --------------------------------------------------------------

    def position(self, k: int) -> int:
        if not (self._lo <= k <= self.model.K):
            raise UnresolvedError(f"boundary index {k} outside sampled range; raise K/Kb of the Siegel model")
        return int(self._pos[k - self._lo])

    def vertex(self, bubble: Bubble, k: int) -> complex:
        return complex(bubble.boundary[self.position(k)])

    def vertex_angles(self, bubble: Bubble) -> np.ndarray:
        return ((self.ks - bubble.generation) * self.theta) % 1.0

    # --- construction ------------------------------------------------------------

    def get(self, address) -> Bubble:
        key = tuple(int(m) for m in address)
        if key in self.bubbles:
            return self.bubbles[key]
        ma = validate(key)
        if len(ma) % 2 == 0:
            raise ValueError("bubble addresses have odd length")
        parent = self.get(key[:-2])
        if parent.kind in ("critical", "precritical", "truncated"):
            raise UnresolvedError(f"bubble {list(key)} lies beyond the {parent.kind} bubble {list(parent.address)}")
        if key == (0,):
            b = self._first_bubble()
        else:
            image = self.get(pi_step(ma).ms)
            x = attach_point(self, parent, key[-1])
            b = pull_back_bubble(self, image, x, key)
        b.parent = parent
        parent.children.append(b)
        self.bubbles[key] = b
        return b

    def _first_bubble(self) -> Bubble:
        """The generation-1 bubble attached to the Siegel disk at the critical point 1."""
        f, model = self.f, self.model
        delta_prev = np.array([model.boundary_point(int(k) - 1) for k in self.ks])
        start = self.position(1)
        targets = np.roll(self.delta.boundary, -start)
        excl = np.roll(delta_prev, -start)
        loop, laps, worst = _lift_loop(f, targets, 1.0, exclude=excl)
        boundary = np.roll(loop, start)
        # incoming radius: lift of the ray of angle theta, from the critical value down to 0
        t = np.linspace(0.98, 0.0, INCOMING_STEPS)
        lam = cmath.exp(2j * math.pi * self.theta)
        ray = model.psi_bar(t * lam)
        ray_prev = model.psi_bar(t + 0j)
        inc, worst_in = _lift_sequence(f, ray, 1.0, exclude=ray_prev)
        incoming = np.concatenate([[1.0 + 0j], inc])
        b = Bubble((0,), 1, 1.0 + 0j, complex(incoming[-1]), boundary, incoming, image=self.delta)
        self._classify(b, laps, max(worst, worst_in))
        return b

    def _classify(self, b: Bubble, laps: int, worst: float):
        if worst > AMBIGUITY_RATIO:
            b.notes.append(f"ambiguous continuation (ratio {worst:.2f})")
        if b.image is not None and b.image.kind in ("critical", "precritical"):
            b.kind = "precritical"
        elif laps == 2 or (self.critical is not None and winding_number(b.boundary, self.critical)[0] != 0):
            b.kind = "critical"
            b.notes.append("free critical point inside: two-to-one onto its image")
        if b.kind != "off-critical":
            b.center = None
            b.incoming = None

    # --- walks -----------------------------------------------------------------

    def build(self, max_gen: int, min_diam: float = 0.0) -> list[Bubble]:
        """All constructible bubbles of generation ``<= max_gen`` and diameter ``>= min_diam``."""
        out = []
        frontier = [()]
        while frontier:
            nxt = []
            for addr in frontier:
                last = addr[-1] if addr else -1
                for m in range(last + 1, max_gen):
                    child = addr + (last, m) if addr else (m,)
                    try:
                        b = self.get(child)
                    except UnresolvedError:
                        continue
                    out.append(b)
                    if b.kind == "off-critical":
                        nxt.append(child)
            frontier = nxt
        out.sort(key=lambda b: (b.generation, b.address))
        return [b for b in out if b.diameter >= min_diam]

    def point(self, address, delta_rho: float, delta_angle: float, index: int | None = None) -> complex:
        """The point of the bubble ``address`` whose ``f^gen``-image has Siegel polar coordinates ``(rho, angle)``.

        ``index`` (the Siegel boundary index) is required when ``rho == 1``.
        """
        address = tuple(address)
        if not address:
            if delta_rho >= 1:
                return self.model.boundary_point(index)
            return self.model.ray_point(delta_rho, delta_angle)
        if delta_rho >= 1:
            return self.vertex(self.get(address), index)
        chain = [self.get(address)]
        while chain[-1].address != (0,):
            chain.append(chain[-1].image)
        # radial path in the Siegel disk, lifted level by level anchored at the centers
        t = np.linspace(0.0, delta_rho, max(8, int(40 * delta_rho) + 2))
        u = t * cmath.exp(2j * math.pi * delta_angle)
        lam = cmath.exp(2j * math.pi * self.theta)
        path = self.model.psi_bar(u)
        excl = self.model.psi_bar(u / lam)
        path, worst = _lift_sequence(self.f, path, chain[-1].center, exclude=excl)
        for b in reversed(chain[:-1]):
            if b.center is None:
                raise UnresolvedError(f"center of {b} is undefined")
            path, w = _lift_sequence(self.f, path, b.center)
            worst = max(worst, w)
        if worst > AMBIGUITY_RATIO:
            raise PullbackError(f"ambiguous continuation into {chain[0]} (ratio {worst:.2f})")
        return complex(path[-1])

    def forward_residuals(self, b: Bubble) -> dict:
        """Checks of the bubble invariants: root identity, center, forward-map consistency."""
        f = self.f
        out = {}
        if b.root is not None:
            out["root"] = abs(f.iterate(b.root, b.generation - 1) - 1)
        if b.center is not None:
            out["center"] = abs(f.iterate(b.center, b.generation))
        if b.image is not None:
            img = f(b.boundary)
            if len(img) == len(b.image.boundary):
                # vertices correspond index by index
                out["forward"] = float(np.abs(img - b.image.boundary).max())
            else:
                out["forward"] = float(distance_to_polyline(b.image.boundary, img).max())
        return out


def attach_point(tree: BubbleTree, parent: Bubble, m: int) -> complex:
    """The boundary point of ``parent`` with polar angle ``-m theta`` (``f^m`` of it is 1)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    k = parent.generation - m
    return tree.vertex(parent, k)


def pull_back_bubble(tree: BubbleTree, image: Bubble, attach: complex, address) -> Bubble:
    """The component of ``f^{-1}(image)`` whose closure contains ``attach``.

    ``attach`` must be a preimage of the root of ``image``.  If the lifted loop does
    not close (``f`` is two-to-one on the component) or contains the free critical
    point, the bubble is marked critical and its center left undefined.
    """
    f = tree.f
    address = tuple(address)
    if image.root is not None and abs(f(attach) - image.root) > 1e-8 * (1 + abs(image.root)):
        raise ValueError("attach point is not a preimage of the image bubble's root")
    start = tree.position(1)
    targets = np.roll(image.boundary, -start)
    loop, laps, worst = _lift_loop(f, targets, attach)
    boundary = np.roll(loop, start)
    b = Bubble(address, image.generation + 1, complex(attach), None, boundary, None, image=image)
    if image.incoming is not None:
        inc, w = _lift_sequence(f, image.incoming, attach)
        worst = max(worst, w)
        b.incoming = inc
        b.center = complex(inc[-1])
    tree._classify(b, laps, worst)
    return b


def build_bubble_tree(f, model, max_gen: int, min_diam: float = 0.0, critical: complex | None = None):
    tree = BubbleTree(f, model, critical)
    tree.build(max_gen, min_diam)
    return tree


def bubble_chain(tree: BubbleTree, ma) -> list[Bubble]:
    """``[Siegel disk, bubble(ma[:1]), bubble(ma[:3]), ..., bubble(ma)]`` for an odd-length address."""
    ma = ma if isinstance(ma, MultiAngle) else validate(ma)
    if len(ma) % 2 == 0:
        raise ValueError("bubble addresses have odd length")
    chain = [tree.delta]
    for n in range(1, len(ma) + 1, 2):
        try:
            chain.append(tree.get(ma.ms[:n]))
        except UnresolvedError as exc:
            raise UnresolvedError(str(exc), partial=chain) from exc
    return chain


@dataclass
class BubbleRay:
    chain: list[Bubble]
    rule: MultiAngleStream
    landing_estimate: complex | None
    tail_diameter: float
    period: int | None = None
    multiplier: float | None = None
    periodic_residual: float | None = None
    resolved: bool = False
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        le = self.landing_estimate
        return {
            "rule": self.rule.to_dict(len(self.chain[-1].address)),
            "bubbles": len(self.chain) - 1,
            "landing": None if le is None else [le.real, le.imag],
            "tail_diameter": self.tail_diameter,
            "diameters": [b.diameter for b in self.chain[1:]],
            "period": self.period,
            "multiplier_modulus": self.multiplier,
            "periodic_residual": self.periodic_residual,
            "resolved": self.resolved,
            "notes": self.notes,
        }


def _polish_periodic(f, x: complex, period: int, steps: int = 30) -> complex:
    for _ in range(steps):
        z, d = x, 1 + 0j
        for _ in range(period):
            d *= f.derivative(z)
            z = f(z)
        step = (z - x) / (d - 1)
        x -= step
        if abs(step) < 1e-15 * (1 + abs(x)):
            break
    return x


def trace_bubble_ray(tree: BubbleTree, rule: MultiAngleStream, depth: int = MAX_RAY_BUBBLES,
                     period: int | None = None) -> BubbleRay:
    """Bubbles along ``rule`` until the tail diameter drops below 1e-6 or ``depth`` bubbles.

    When ``period`` is given (the landing point is fixed by ``f^period``), the tail
    centroid is Newton-polished against ``f^period(x) = x`` and the multiplier modulus
    ``|(f^period)'(x)|`` is reported.
    """
    if depth < 3:
        raise ValueError("depth must be >= 3")
    period = period if period is not None else getattr(rule, "period", None)
    chain = [tree.delta]
    diam = math.inf
    for k in range(1, depth + 1):
        b = tree.get(rule.bubble_prefix(k).ms)
        chain.append(b)
        diam = b.diameter
        if diam < LANDING_DIAMETER:
            break
    ray = BubbleRay(chain, rule, None, diam, period)
    diams = [b.diameter for b in chain[1:]]
    if diam >= LANDING_DIAMETER:
        ray.notes.append("tail diameter did not reach 1e-6 within the depth cap (possible parabolic landing)")
        return ray
    x = complex(np.mean(chain[-1].boundary))
    ray.landing_estimate = x
    ray.resolved = True
    if len(diams) > 4 and any(d2 > d1 for d1, d2 in zip(diams[3:], diams[4:])):
        ray.notes.append("tail diameters not monotone")
    if period:
        y = _polish_periodic(tree.f, x, period)
        if abs(y - x) < 1e3 * diam:
            ray.landing_estimate = y
            ray.periodic_residual = abs(tree.f.iterate(y, period) - y)
            ray.multiplier = abs(tree.f.orbit_derivative(y, period))
        else:
            ray.notes.append("Newton polish left the tail neighbourhood; estimate kept unpolished")
    return ray


def tree_to_json(tree: BubbleTree, bubbles: list[Bubble], max_points: int | None = None) -> str:
    nodes = []
    for b in [tree.delta] + list(bubbles):
        pts = b.boundary
        if max_points and len(pts) > max_points:
            pts = pts[:: int(math.ceil(len(pts) / max_points))]
        nodes.append({
            "address": list(b.address),
            "generation": b.generation,
            "root": None if b.root is None else [b.root.real, b.root.imag],
            "center": None if b.center is None else [b.center.real, b.center.imag],
            "kind": b.kind if b.address else "siegel",
            "parent": None if b.parent is None else list(b.parent.address),
            "image": None if b.image is None else list(b.image.address),
            "diameter": b.diameter,
            "boundary": [[p.real, p.imag] for p in pts],
        })
    return json.dumps({"theta": tree.theta, "nodes": nodes})
