"""Integer-coded legal multi-angles and the shift map Pi.

A multi-angle ``(m_0, ..., m_k)`` stands for the angles ``alpha_i = -m_i * theta``.
It is legal when ``m_{2i+1} == m_{2i}`` and ``m_{2i+2} > m_{2i+1}``.

Under the dynamics a multi-angle is shifted by :func:`pi_step`: if the arc
starts through the critical point (``m_0 == m_1 == 0``) the first two entries
are dropped, and every remaining index decreases by one.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .rotation import RotationNumber, legal_angle

__all__ = [
    "IllegalMultiAngle",
    "MultiAngle",
    "MultiAngleStream",
    "validate",
    "pi_step",
    "pi_orbit",
    "is_legal_bubble_address",
    "TERMINAL",
    "parse_multiangle",
]


class IllegalMultiAngle(ValueError):
    """Raised when a sequence violates the legality rules; ``index`` is the first bad entry."""

    def __init__(self, ms, index: int, reason: str):
        self.ms = tuple(ms)
        self.index = index
        super().__init__(f"illegal multi-angle {list(self.ms)} at index {index}: {reason}")


def _first_violation(ms: Sequence[int]) -> tuple[int, str] | None:
    if len(ms) == 0:
        return 0, "empty sequence"
    for i, m in enumerate(ms):
        if int(m) != m or m < 0:
            return i, "entries must be nonnegative integers"
        if i % 2 == 1 and m != ms[i - 1]:
            return i, f"m_{i} must equal m_{i - 1}"
        if i >= 2 and i % 2 == 0 and m <= ms[i - 1]:
            return i, f"m_{i} must exceed m_{i - 1}"
    return None


@dataclass(frozen=True)
class MultiAngle:
    ms: tuple[int, ...]
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "ms", tuple(int(m) for m in self.ms))
        bad = _first_violation(self.ms)
        if bad is not None:
            raise IllegalMultiAngle(self.ms, *bad)

    def __len__(self):
        return len(self.ms)

    def __getitem__(self, i):
        return self.ms[i]

    def __iter__(self):
        return iter(self.ms)

    def angles(self, rot: RotationNumber | float) -> list[float]:
        return [legal_angle(rot, m) for m in self.ms]

    def prefix(self, n: int) -> "MultiAngle":
        return MultiAngle(self.ms[:n])

    @property
    def is_terminal(self) -> bool:
        return self.ms in TERMINAL

    def to_json(self) -> str:
        return json.dumps(list(self.ms))

    def __repr__(self):
        return f"MultiAngle({list(self.ms)}{', truncated' if self.truncated else ''})"


TERMINAL = ((0,), (0, 0))


def validate(ms: Iterable[int]) -> MultiAngle:
    """Return ``ms`` as a :class:`MultiAngle` or raise :class:`IllegalMultiAngle`."""
    return MultiAngle(tuple(ms))


def pi_step(ma: MultiAngle) -> MultiAngle:
    ms = ma.ms
    if ms in TERMINAL:
        raise ValueError(f"Pi is undefined on {list(ms)}")
    if len(ms) >= 2 and ms[0] == 0 and ms[1] == 0:
        rest = ms[2:]
    else:
        rest = ms
    assert all(m >= 1 for m in rest), "legal input never decrements below zero"
    return MultiAngle(tuple(m - 1 for m in rest), truncated=ma.truncated)


def pi_orbit(ma: MultiAngle) -> list[MultiAngle]:
    """Iterate Pi until ``(0)`` or ``(0, 0)`` is reached.

    Every step lowers the last entry by one, so at most ``m_last`` steps occur;
    the cap below is a guard against illegal input slipping through.
    """
    cap = ma.ms[-1] + 1
    orbit = [ma]
    while not orbit[-1].is_terminal:
        if len(orbit) > cap:
            raise AssertionError(f"Pi orbit of {ma} exceeded {cap} steps")
        orbit.append(pi_step(orbit[-1]))
    return orbit


def is_legal_bubble_address(ma: MultiAngle, crit_ma: MultiAngle | None) -> bool:
    """True unless some Pi-iterate of some prefix of ``ma`` equals ``crit_ma``.

    Prefixes are taken first and then pushed forward, i.e. the images
    ``Pi^i(ma[:n])`` for every ``n`` and every ``i`` for which Pi is defined.
    """
    if len(ma) % 2 == 0:
        raise ValueError("bubble addresses have odd length")
    if crit_ma is None:
        return True
    target = tuple(crit_ma.ms)
    for n in range(1, len(ma) + 1):
        s = MultiAngle(ma.ms[:n])
        while True:
            if s.ms == target:
                return False
            if s.is_terminal:
                break
            s = pi_step(s)
    return True


class MultiAngleStream:
    """A possibly infinite legal multi-angle produced entry by entry.

    ``rule(i)`` returns ``m_i``.  Only prefixes are ever materialized; equality
    of streams means agreement up to a stated depth.
    """

    def __init__(self, rule: Callable[[int], int], depth: int = 64, name: str | None = None):
        self.rule = rule
        self.depth = depth
        self.name = name

    def prefix(self, n: int) -> MultiAngle:
        return MultiAngle(tuple(self.rule(i) for i in range(n)), truncated=True)

    def bubble_prefix(self, k: int) -> MultiAngle:
        """Address of the ``k``-th bubble (``k >= 1``) along the stream: its first ``2k - 1`` entries."""
        return self.prefix(2 * k - 1)

    def to_dict(self, n: int | None = None) -> dict:
        n = self.depth if n is None else n
        return {"prefix": list(self.prefix(n).ms), "truncated": True, "depth": n}

    @classmethod
    def from_periodic_gaps(cls, gaps: Sequence[int], start: int = 0, depth: int = 64) -> "MultiAngleStream":
        """Pairs ``m_{2i} = m_{2i+1}``, starting at ``start`` and increasing by the cyclic ``gaps``."""
        gaps = tuple(int(g) for g in gaps)
        if not gaps or min(gaps) < 1:
            raise ValueError("gaps must be positive")
        cycle = sum(gaps)

        def rule(i: int) -> int:
            j = i // 2
            q, r = divmod(j, len(gaps))
            return start + q * cycle + sum(gaps[:r])

        return cls(rule, depth=depth, name=f"gaps{list(gaps)}+{start}")

    def __repr__(self):
        return f"MultiAngleStream({self.name or self.rule!r}, depth={self.depth})"


def parse_multiangle(text: str) -> MultiAngle:
    data = json.loads(text)
    if isinstance(data, dict):
        return MultiAngle(tuple(data["prefix"]), truncated=bool(data.get("truncated", False)))
    return validate(data)
