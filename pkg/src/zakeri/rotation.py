"""Bounded-type rotation numbers given by eventually periodic continued fractions.

A rotation number ``theta`` in (0, 1) is stored through its continued fraction
``[0; a_1, a_2, ...]`` where ``a_1 ... a_r`` is the preperiod and the remaining
coefficients repeat the period forever.  Integer data (coefficients,
convergents, legal-angle indices) stay exact; only ``value`` is a float.

Convergent convention: the recurrence is seeded with ``p_{-1}/q_{-1} = 1/0``
and ``p_0/q_0 = a_0/1 = 0/1``.  :func:`convergents` returns ``p_1/q_1`` onwards,
so the first returned convergent is ``1/a_1``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

__all__ = [
    "RotationNumber",
    "from_quadratic_surd",
    "convergents",
    "legal_angle",
    "multiplier",
    "parse_rotation",
    "PRESETS",
]

UNROLL_TERMS = 80


@dataclass(frozen=True)
class RotationNumber:
    preperiod: tuple[int, ...]
    period: tuple[int, ...]
    value: float = field(init=False)

    def __post_init__(self):
        if not self.period:
            raise ValueError("continued fraction period must be nonempty (rational numbers are excluded)")
        for a in self.preperiod + self.period:
            if int(a) != a or a < 1:
                raise ValueError(f"continued fraction coefficients must be integers >= 1, got {a!r}")
        object.__setattr__(self, "preperiod", tuple(int(a) for a in self.preperiod))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        p, q = _convergent_at(self, UNROLL_TERMS)
        object.__setattr__(self, "value", float(Fraction(p, q)))

    @property
    def bound(self) -> int:
        """Largest continued fraction coefficient."""
        return max(self.preperiod + self.period)

    def coefficient(self, n: int) -> int:
        """The coefficient ``a_n`` for ``n >= 1`` (``a_0 = 0``)."""
        if n == 0:
            return 0
        if n <= len(self.preperiod):
            return self.preperiod[n - 1]
        return self.period[(n - 1 - len(self.preperiod)) % len(self.period)]

    def coefficients(self) -> Iterator[int]:
        n = 1
        while True:
            yield self.coefficient(n)
            n += 1

    @property
    def multiplier(self) -> complex:
        return multiplier(self)

    def __float__(self) -> float:
        return self.value

    def to_cf_string(self) -> str:
        return ",".join(map(str, self.preperiod)) + ":" + ",".join(map(str, self.period))


def _convergent_at(rot: RotationNumber, n: int) -> tuple[int, int]:
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for k in range(1, n + 1):
        a = rot.coefficient(k)
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
    return p, q


def from_quadratic_surd(preperiod, period) -> RotationNumber:
    """Build the rotation number with continued fraction ``[0; preperiod, (period)*]``.

    >>> round(from_quadratic_surd([], [1]).value, 10)
    0.6180339887
    """
    return RotationNumber(tuple(preperiod), tuple(period))


def convergents(rot: RotationNumber, n: int) -> list[tuple[int, int]]:
    """First ``n`` convergents ``(p_k, q_k)``, ``k = 1..n``, of ``rot``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = []
    p_prev, q_prev, p, q = 1, 0, 0, 1
    for k in range(1, n + 1):
        a = rot.coefficient(k)
        p_prev, q_prev, p, q = p, q, a * p + p_prev, a * q + q_prev
        out.append((p, q))
    return out


def legal_angle(rot: RotationNumber | float, m: int) -> float:
    """The legal angle ``-m * theta`` reduced to [0, 1)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    theta = float(rot)
    a = math.fmod(-m * theta, 1.0)
    if a < 0:
        a += 1.0
    return 0.0 if a >= 1.0 else a


def multiplier(rot: RotationNumber | float) -> complex:
    return cmath.exp(2j * math.pi * float(rot))


PRESETS = {
    "golden": ((), (1,)),
    "sqrt2over2": ((1,), (2,)),
}


def parse_rotation(text: str) -> RotationNumber:
    """Parse a preset name or a ``pre:period`` continued fraction like ``1:2`` or ``:1``."""
    text = text.strip()
    if text in PRESETS:
        return from_quadratic_surd(*PRESETS[text])
    if ":" not in text:
        raise ValueError(f"unknown rotation {text!r}; use one of {sorted(PRESETS)} or 'pre:period'")
    pre, per = text.split(":", 1)

    def ints(s):
        return [int(x) for x in s.replace(" ", "").split(",") if x]

    return from_quadratic_surd(ints(pre), ints(per))
