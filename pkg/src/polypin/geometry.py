"""Coordinates, domains, point configurations and seeded Poisson sampling.

All planar objects live in the rotated "time-cone" frame ``(t, x)``: the
diagonal ``y = x`` of the unrotated square is the ``t`` axis.  Light-cone
coordinates ``u = t + x`` and ``v = t - x`` are derived on demand; a particle
of velocity +1 keeps ``v`` fixed and a particle of velocity -1 keeps ``u``
fixed.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

SQRT2 = math.sqrt(2.0)

STREAMS = ("interior", "boundary+", "boundary-", "axis", "stick-lengths")


@dataclass(frozen=True, order=True)
class Point2:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError(f"non-finite point ({self.t}, {self.x})")

    @property
    def u(self) -> float:
        return self.t + self.x

    @property
    def v(self) -> float:
        return self.t - self.x

    def precedes(self, other: "Point2") -> bool:
        """Strict light-cone order: ``other`` lies in the open forward cone."""
        return self.u < other.u and self.v < other.v


def rotate_to_timecone(a: float, b: float) -> Point2:
    """Rotate an unrotated point ``(a, b)`` by pi/4 clockwise."""
    return Point2((a + b) / SQRT2, (b - a) / SQRT2)


def rotate_back(p: Point2) -> tuple[float, float]:
    return ((p.t - p.x) / SQRT2, (p.t + p.x) / SQRT2)


class PlanarConfig:
    """Finite set of planar points kept in lexicographic ``(t, x)`` order.

    Backed by two float arrays so that configurations with 10^5-10^6 points
    stay cheap; :class:`Point2` objects are produced only on iteration.
    """

    __slots__ = ("_t", "_x")

    def __init__(self, points: Iterable[Point2] = ()):
        pts = list(points)
        t = np.array([p.t for p in pts], dtype=float)
        x = np.array([p.x for p in pts], dtype=float)
        self._set(t, x)

    @classmethod
    def from_arrays(cls, t, x) -> "PlanarConfig":
        obj = cls.__new__(cls)
        obj._set(np.asarray(t, dtype=float).ravel(), np.asarray(x, dtype=float).ravel())
        return obj

    def _set(self, t: np.ndarray, x: np.ndarray) -> None:
        if t.shape != x.shape:
            raise ValueError("t and x must have the same length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(x))):
            raise ValueError("non-finite coordinates")
        order = np.lexsort((x, t))
        t, x = t[order], x[order]
        if len(t) > 1:
            dup = (t[1:] == t[:-1]) & (x[1:] == x[:-1])
            if np.any(dup):
                i = int(np.argmax(dup))
                raise ValueError(f"duplicate point ({t[i]!r}, {x[i]!r})")
        t.setflags(write=False)
        x.setflags(write=False)
        self._t, self._x = t, x

    @property
    def t(self) -> np.ndarray:
        return self._t

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def u(self) -> np.ndarray:
        return self._t + self._x

    @property
    def v(self) -> np.ndarray:
        return self._t - self._x

    @property
    def points(self) -> list[Point2]:
        return list(self)

    def __len__(self) -> int:
        return len(self._t)

    def __iter__(self) -> Iterator[Point2]:
        for t, x in zip(self._t.tolist(), self._x.tolist()):
            yield Point2(t, x)

    def __getitem__(self, i: int) -> Point2:
        return Point2(float(self._t[i]), float(self._x[i]))

    def __contains__(self, p: Point2) -> bool:
        i = np.searchsorted(self._t, p.t, side="left")
        while i < len(self._t) and self._t[i] == p.t:
            if self._x[i] == p.x:
                return True
            i += 1
        return False

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanarConfig):
            return NotImplemented
        return np.array_equal(self._t, other._t) and np.array_equal(self._x, other._x)

    def __repr__(self) -> str:
        return f"PlanarConfig(<{len(self)} points>)"

    def union(self, extra: Iterable[Point2]) -> "PlanarConfig":
        extra = list(extra)
        t = np.concatenate([self._t, [p.t for p in extra]])
        x = np.concatenate([self._x, [p.x for p in extra]])
        return PlanarConfig.from_arrays(t, x)

    def without(self, p: Point2) -> "PlanarConfig":
        keep = ~((self._t == p.t) & (self._x == p.x))
        if keep.all():
            raise KeyError(p)
        return PlanarConfig.from_arrays(self._t[keep], self._x[keep])

    def to_text(self) -> str:
        return "".join(f"{t:.17g} {x:.17g}\n" for t, x in zip(self._t.tolist(), self._x.tolist()))

    @classmethod
    def from_text(cls, text: str) -> "PlanarConfig":
        ts, xs = [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(" ")
            if len(fields) != 2:
                raise ValueError(f"line {lineno}: expected 't x', got {line!r}")
            ts.append(float(fields[0]))
            xs.append(float(fields[1]))
        return cls.from_arrays(ts, xs)


class AxisPoints:
    """Points ``(t_i, 0)`` on the time axis, indexed backward: ``t_1 > t_2 > ...``."""

    __slots__ = ("_t",)

    def __init__(self, times: Iterable[float] = ()):
        t = np.array(sorted((float(s) for s in times), reverse=True), dtype=float)
        if len(t) > 1 and np.any(t[1:] == t[:-1]):
            raise ValueError("duplicate axis points")
        if not np.all(np.isfinite(t)):
            raise ValueError("non-finite axis point")
        t.setflags(write=False)
        self._t = t

    @property
    def times(self) -> np.ndarray:
        return self._t

    @property
    def points(self) -> list[Point2]:
        return [Point2(s, 0.0) for s in self._t.tolist()]

    def __len__(self) -> int:
        return len(self._t)

    def __iter__(self) -> Iterator[Point2]:
        return iter(self.points)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return AxisPoints(self._t[i])
        return Point2(float(self._t[i]), 0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AxisPoints):
            return NotImplemented
        return np.array_equal(self._t, other._t)

    def __repr__(self) -> str:
        return f"AxisPoints({self._t.tolist()!r})"

    def to_text(self) -> str:
        return "".join(f"{t:.17g} 0\n" for t in self._t.tolist())

    @classmethod
    def from_text(cls, text: str) -> "AxisPoints":
        times = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split(" ")
            if len(fields) not in (1, 2) or (len(fields) == 2 and float(fields[1]) != 0.0):
                raise ValueError(f"line {lineno}: expected 't' or 't 0', got {line!r}")
            times.append(float(fields[0]))
        return cls(times)


@dataclass(frozen=True)
class Domain:
    """Bounded domain ``{t0 < t < t1, g-(t) < x < g+(t)}`` with slope +-1 walls.

    ``g+`` rises with slope 1 on ``(t0, t01_plus)`` and falls with slope 1
    afterwards; ``g-`` mirrors it.  In light-cone coordinates the domain is
    the box ``u_lo < u < u_hi, v_lo < v < v_hi`` cut by the slab ``t0 < t < t1``.
    """

    kind: str
    t0: float
    t1: float
    g0_minus: float
    g0_plus: float
    t01_minus: float
    t01_plus: float
    n: float | None = None
    u_lo: float = field(init=False)
    u_hi: float = field(init=False)
    v_lo: float = field(init=False)
    v_hi: float = field(init=False)

    def __post_init__(self):
        vals = (self.t0, self.t1, self.g0_minus, self.g0_plus, self.t01_minus, self.t01_plus)
        if not all(math.isfinite(s) for s in vals):
            raise ValueError("domain parameters must be finite (infinite-area domains are not supported)")
        if not self.t0 < self.t1:
            raise ValueError("need t0 < t1")
        if not (self.t0 <= self.t01_plus <= self.t1 and self.t0 <= self.t01_minus <= self.t1):
            raise ValueError("turning points must lie in [t0, t1]")
        if self.g0_minus > self.g0_plus:
            raise ValueError("need g-(t0) <= g+(t0)")
        object.__setattr__(self, "v_lo", self.t0 - self.g0_plus)
        object.__setattr__(self, "u_hi", self.g0_plus + 2 * self.t01_plus - self.t0)
        object.__setattr__(self, "u_lo", self.t0 + self.g0_minus)
        object.__setattr__(self, "v_hi", 2 * self.t01_minus - self.t0 - self.g0_minus)
        mid = 0.5 * (self.t0 + self.t1)
        if not (self.g_minus(mid) < self.g_plus(mid) and self.g_minus(self.t1) <= self.g_plus(self.t1)):
            raise ValueError("need g- < g+ on (t0, t1)")

    @classmethod
    def triangle(cls, n: float) -> "Domain":
        """Backward light cone of ``(n, 0)`` cut at ``t = 0``."""
        if not n > 0:
            raise ValueError("Triangle(n) needs n > 0")
        return cls("triangle", 0.0, float(n), -float(n), float(n), 0.0, 0.0, n=float(n))

    @classmethod
    def square(cls, n: float) -> "Domain":
        """The unrotated square ``[0, n]^2`` seen in the rotated frame."""
        if not n > 0:
            raise ValueError("Square(n) needs n > 0")
        half = n / SQRT2
        return cls("square", 0.0, 2 * half, 0.0, 0.0, half, half, n=float(n))

    @classmethod
    def general(cls, t0, t1, g0_minus, g0_plus, t01_minus, t01_plus) -> "Domain":
        return cls("general", float(t0), float(t1), float(g0_minus), float(g0_plus),
                   float(t01_minus), float(t01_plus))

    def g_plus(self, t: float) -> float:
        return min(self.g0_plus + (t - self.t0), self.u_hi - t)

    def g_minus(self, t: float) -> float:
        return max(self.g0_minus - (t - self.t0), t - self.v_hi)

    def contains(self, p: Point2) -> bool:
        u, v = p.u, p.v
        return (self.t0 < p.t < self.t1 and self.u_lo < u < self.u_hi
                and self.v_lo < v < self.v_hi)

    def contains_arrays(self, t: np.ndarray, x: np.ndarray) -> np.ndarray:
        u, v = t + x, t - x
        return ((self.t0 < t) & (t < self.t1) & (self.u_lo < u) & (u < self.u_hi)
                & (self.v_lo < v) & (v < self.v_hi))

    def vertices(self) -> list[tuple[float, float]]:
        """Counter-clockwise boundary polygon in ``(t, x)``."""
        raw = [
            (self.t0, self.g0_minus),
            (self.t01_minus, self.g_minus(self.t01_minus)),
            (self.t1, self.g_minus(self.t1)),
            (self.t1, self.g_plus(self.t1)),
            (self.t01_plus, self.g_plus(self.t01_plus)),
            (self.t0, self.g0_plus),
        ]
        out: list[tuple[float, float]] = []
        for p in raw:
            if not out or out[-1] != p:
                out.append(p)
        if len(out) > 1 and out[0] == out[-1]:
            out.pop()
        return out

    @property
    def polygon(self):
        from shapely.geometry import Polygon

        return Polygon(self.vertices())

    @property
    def area(self) -> float:
        return float(self.polygon.area)

    @property
    def left_edge_length(self) -> float:
        return self.g0_plus - self.g0_minus

    @property
    def nw_edge_length(self) -> float:
        return SQRT2 * (self.t01_plus - self.t0)

    @property
    def sw_edge_length(self) -> float:
        return SQRT2 * (self.t01_minus - self.t0)

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [x for _, x in self.vertices()]
        return self.t0, self.t1, min(xs), max(xs)

    def exit_plus(self, v: float) -> tuple[float, float]:
        """Light-cone exit point of a velocity +1 trajectory ``v = const``."""
        if self.u_hi + v <= 2 * self.t1:
            return self.u_hi, v
        return 2 * self.t1 - v, v

    def exit_minus(self, u: float) -> tuple[float, float]:
        if u + self.v_hi <= 2 * self.t1:
            return u, self.v_hi
        return u, 2 * self.t1 - u

    def describe(self) -> str:
        if self.kind in ("triangle", "square"):
            return f"{self.kind}({self.n:.17g})"
        return (f"general({self.t0:.17g},{self.t1:.17g},{self.g0_minus:.17g},"
                f"{self.g0_plus:.17g},{self.t01_minus:.17g},{self.t01_plus:.17g})")

    @classmethod
    def parse(cls, text: str) -> "Domain":
        name, _, rest = text.strip().partition("(")
        args = [float(s) for s in rest.rstrip(")").split(",") if s.strip()]
        if name == "triangle" and len(args) == 1:
            return cls.triangle(args[0])
        if name == "square" and len(args) == 1:
            return cls.square(args[0])
        if name == "general" and len(args) == 6:
            return cls.general(*args)
        raise ValueError(f"cannot parse domain {text!r}")


@dataclass(frozen=True)
class RandomSource:
    """Reproducible random stream identified by ``(seed, stream)``."""

    seed: int
    stream: str = "interior"

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        key = tuple(zlib.crc32(part.encode()) for part in self.stream.split("/"))
        return np.random.default_rng(np.random.SeedSequence(int(self.seed), spawn_key=key))

    def child(self, label) -> "RandomSource":
        return RandomSource(self.seed, f"{self.stream}/{label}")

    def with_stream(self, stream: str) -> "RandomSource":
        return RandomSource(self.seed, stream)


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RandomSource):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_poisson_in_domain(d: Domain, intensity: float, rng) -> PlanarConfig:
    """Poisson point process of the given intensity restricted to ``d``."""
    if intensity < 0:
        raise ValueError("intensity must be >= 0")
    if not math.isfinite(d.area):
        raise ValueError("domain must have finite area")
    gen = _as_generator(rng)
    count = int(gen.poisson(intensity * d.area)) if intensity > 0 else 0
    t_lo, t_hi, x_lo, x_hi = d.bounding_box()
    ts: list[np.ndarray] = []
    xs: list[np.ndarray] = []
    have = 0
    while have < count:
        m = max(2 * (count - have), 16)
        t = gen.uniform(t_lo, t_hi, m)
        x = gen.uniform(x_lo, x_hi, m)
        ok = d.contains_arrays(t, x)
        t, x = t[ok][: count - have], x[ok][: count - have]
        ts.append(t)
        xs.append(x)
        have += len(t)
    if not ts:
        return PlanarConfig()
    return PlanarConfig.from_arrays(np.concatenate(ts), np.concatenate(xs))


def sample_poisson_on_axis(lambda1: float, interval: Sequence[float], rng) -> AxisPoints:
    """One-dimensional Poisson process on ``(a, b)`` of the time axis."""
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ValueError("need a < b")
    if lambda1 < 0:
        raise ValueError("lambda1 must be >= 0")
    gen = _as_generator(rng)
    count = int(gen.poisson(lambda1 * (b - a))) if lambda1 > 0 else 0
    return AxisPoints(gen.uniform(a, b, count))


def sample_axis_marks(lambda_max: float, interval: Sequence[float], rng) -> tuple[np.ndarray, np.ndarray]:
    """Axis times at intensity ``lambda_max`` with uniform thinning marks.

    Keeping the points whose mark is below ``lam / lambda_max`` gives coupled
    (nested) Poisson processes of every intensity ``lam <= lambda_max``.
    """
    a, b = float(interval[0]), float(interval[1])
    gen = _as_generator(rng)
    count = int(gen.poisson(lambda_max * (b - a))) if lambda_max > 0 else 0
    times = gen.uniform(a, b, count)
    marks = gen.uniform(0.0, 1.0, count)
    return times, marks


def thin_axis(times: np.ndarray, marks: np.ndarray, lam: float, lambda_max: float) -> AxisPoints:
    if lambda_max <= 0:
        return AxisPoints()
    return AxisPoints(times[marks < lam / lambda_max])
