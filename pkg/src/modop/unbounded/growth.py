"""Tail descriptors: monotone bounds on generator singular values.

A bound is a power law ``coef * j**power`` optionally pushed through a
chain of monotone scalar maps.  The maps are the scalar shadows of the
transforms applied to generator blocks:

``z``     ``s -> s / sqrt(1 + s^2)``   (bounded transform, increasing)
``zinv``  ``s -> s / sqrt(1 - s^2)``   (inverse transform, increasing)
``q``     ``s -> 1 / sqrt(1 + s^2)``   (``(1 + t^* t)^{-1/2}``, decreasing)

The textual form nests the maps, e.g. ``"z(2*j^1)"``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

INCREASING = {"z": True, "zinv": True, "q": False}


def _apply(name: str, s: float) -> float:
    if name == "z":
        return 1.0 if math.isinf(s) else s / math.sqrt(1.0 + s * s)
    if name == "zinv":
        return math.inf if s >= 1.0 else s / math.sqrt(1.0 - s * s)
    if name == "q":
        return 0.0 if math.isinf(s) else 1.0 / math.sqrt(1.0 + s * s)
    raise ValueError(f"unknown map {name!r}")


@dataclass(frozen=True)
class TailBound:
    coef: float
    power: float = 0.0
    maps: tuple[str, ...] = ()

    def __post_init__(self):
        if self.coef < 0:
            raise ValueError("bound coefficient must be nonnegative")
        for name in self.maps:
            if name not in INCREASING:
                raise ValueError(f"unknown map {name!r}")

    def value(self, j: int) -> float:
        s = self.coef * float(j) ** self.power
        for name in self.maps:
            s = _apply(name, s)
        return s

    def then(self, name: str) -> TailBound:
        return TailBound(self.coef, self.power, self.maps + (name,))

    def _base_trend(self) -> int:
        if self.coef == 0 or self.power == 0:
            return 0
        return 1 if self.power > 0 else -1

    def trend(self) -> int:
        """+1 nondecreasing and unbounded-ish, -1 decreasing, 0 constant in ``j``."""
        t = self._base_trend()
        for name in self.maps:
            if not INCREASING[name]:
                t = -t
        return t

    def limit(self) -> float:
        if self.coef == 0:
            s = 0.0
        elif self.power > 0:
            s = math.inf
        elif self.power == 0:
            s = self.coef
        else:
            s = 0.0
        for name in self.maps:
            s = _apply(name, s)
        return s

    def infimum_from(self, j0: int) -> float:
        """``inf_{j >= j0} value(j)``."""
        return self.value(j0) if self.trend() >= 0 else self.limit()

    def supremum_from(self, j0: int) -> float:
        return self.value(j0) if self.trend() <= 0 else self.limit()

    def __str__(self) -> str:
        text = f"{self.coef!r}*j^{self.power!r}"
        for name in self.maps:
            text = f"{name}({text})"
        return text


_BASE = re.compile(r"^\s*([0-9eE.+\-]+|inf)\s*(?:\*\s*j\s*(?:\^\s*([0-9eE.+\-]+))?)?\s*$")


def parse_bound(text) -> TailBound:
    """Parse ``"c*j^q"``, ``"c"``, ``"c*j"`` or nested ``"z(...)"`` forms."""
    if isinstance(text, (int, float)):
        return TailBound(float(text))
    if isinstance(text, TailBound):
        return text
    s = str(text).strip()
    maps = []
    while True:
        m = re.match(r"^(zinv|z|q)\((.*)\)$", s)
        if not m:
            break
        maps.append(m.group(1))
        s = m.group(2).strip()
    base = _BASE.match(s)
    if not base:
        raise ValueError(f"cannot parse tail bound {text!r}")
    coef = float(base.group(1))
    if "j" in s:
        power = float(base.group(2)) if base.group(2) is not None else 1.0
    else:
        power = 0.0
    return TailBound(coef, power, tuple(reversed(maps)))


@dataclass(frozen=True)
class GrowthDescriptor:
    """Bounds valid for every index ``j >= start``.

    ``rank`` is the number of nonzero singular values of each tail block;
    ``lower`` bounds the smallest of them from below and ``upper`` bounds the
    largest from above.
    """

    lower: TailBound
    upper: TailBound
    rank: int
    start: int = 1

    def transformed(self, name: str) -> GrowthDescriptor:
        if INCREASING[name]:
            return GrowthDescriptor(self.lower.then(name), self.upper.then(name),
                                    self.rank, self.start)
        return GrowthDescriptor(self.upper.then(name), self.lower.then(name),
                                self.rank, self.start)

    def to_json(self) -> dict:
        return {"sv_lower": str(self.lower), "sv_upper": str(self.upper),
                "rank": self.rank, "start": self.start}

    @classmethod
    def from_json(cls, data: dict) -> GrowthDescriptor:
        return cls(parse_bound(data["sv_lower"]), parse_bound(data["sv_upper"]),
                   int(data["rank"]), int(data.get("start", 1)))
