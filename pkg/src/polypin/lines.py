"""Broken-line (Hammersley) construction, line counting, geodesics and chain oracles."""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ._engine import ParticleSystem
from .geometry import SQRT2, Domain, PlanarConfig, Point2, _as_generator

ORIGINS = ("interior", "boundary-left-up", "boundary-left-down", "boundary-nw", "boundary-sw")


def _lc_point(u: float, v: float) -> Point2:
    return Point2((u + v) * 0.5, (u - v) * 0.5)


@dataclass(frozen=True)
class BirthEvent:
    location: Point2
    velocity: int  # +1, -1, or 0 for an interior pair
    origin: str

    def as_birth(self):
        p = self.location
        mode = "pair" if self.origin == "interior" else self.velocity
        return (p.t, p.x, p.u, p.v, mode, -1)


@dataclass(frozen=True)
class Segment:
    start: Point2
    end: Point2
    velocity: int
    line_id: int


@dataclass(frozen=True)
class BrokenLine:
    vertices: tuple[Point2, ...]
    segments: tuple[Segment, ...]

    @property
    def x_range(self) -> tuple[float, float]:
        return self.vertices[0].x, self.vertices[-1].x

    def height(self, x: float, extend: bool = False) -> float:
        """Value of ``t = gamma(x)``; NaN outside the line unless ``extend``."""
        xs = [p.x for p in self.vertices]
        ts = [p.t for p in self.vertices]
        if x < xs[0] or x > xs[-1]:
            if not extend:
                return math.nan
            if x < xs[0]:
                slope = (ts[1] - ts[0]) / (xs[1] - xs[0])
                return ts[0] + slope * (x - xs[0])
            slope = (ts[-1] - ts[-2]) / (xs[-1] - xs[-2])
            return ts[-1] + slope * (x - xs[-1])
        return float(np.interp(x, xs, ts))


def _merge_pieces(pieces: Iterable[tuple]) -> list[tuple]:
    """Merge touching collinear pieces on the same carrier."""
    by_carrier: dict[tuple[int, float], list[tuple[float, float]]] = defaultdict(list)
    for vel, c, lo, hi in pieces:
        if lo > hi:
            lo, hi = hi, lo
        if lo != hi:
            by_carrier[(vel, c)].append((lo, hi))
    out = []
    for (vel, c), ivs in by_carrier.items():
        ivs.sort()
        cur_lo, cur_hi = ivs[0]
        for lo, hi in ivs[1:]:
            if lo <= cur_hi:
                cur_hi = max(cur_hi, hi)
            else:
                out.append((vel, c, cur_lo, cur_hi))
                cur_lo, cur_hi = lo, hi
        out.append((vel, c, cur_lo, cur_hi))
    return out


def _endpoints(piece) -> tuple[tuple[float, float], tuple[float, float]]:
    vel, c, lo, hi = piece
    if vel > 0:
        return (lo, c), (hi, c)
    return (c, lo), (c, hi)


class LineSet:
    """Disjoint broken lines in a domain.

    Internally each line is a set of maximal straight pieces
    ``(velocity, carrier, lo, hi)`` in light-cone coordinates; two line sets
    compare equal when these canonical pieces coincide exactly.
    """

    def __init__(self, pieces: Iterable[tuple], domain: Domain, merge: bool = True,
                 anchors: dict[tuple[float, float], Point2] | None = None):
        pieces = _merge_pieces(pieces) if merge else list(pieces)
        parent = list(range(len(pieces)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        seen: dict[tuple[float, float], int] = {}
        for i, pc in enumerate(pieces):
            for key in _endpoints(pc):
                j = seen.setdefault(key, i)
                if j != i:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[ri] = rj
        groups: dict[int, list[tuple]] = defaultdict(list)
        for i, pc in enumerate(pieces):
            groups[find(i)].append(pc)
        keys = sorted(tuple(sorted(g)) for g in groups.values())
        self.domain = domain
        self._keys: tuple[tuple[tuple, ...], ...] = tuple(keys)
        self._lines: list[BrokenLine] | None = None
        # exact (t, x) of birth points, so results map back onto input points
        self._anchors = anchors or {}

    def _point(self, key: tuple[float, float]) -> Point2:
        p = self._anchors.get(key)
        return p if p is not None else _lc_point(*key)

    # --- canonical structure -------------------------------------------------
    @property
    def key(self):
        return self._keys

    @property
    def pieces(self) -> list[tuple]:
        return [pc for line in self._keys for pc in line]

    def __eq__(self, other) -> bool:
        if not isinstance(other, LineSet):
            return NotImplemented
        return self._keys == other._keys

    def __hash__(self):
        return hash(self._keys)

    def __len__(self) -> int:
        return len(self._keys)

    def __repr__(self) -> str:
        return f"LineSet(<{len(self)} lines, {len(self.pieces)} pieces>)"

    # --- public geometry -----------------------------------------------------
    @property
    def lines(self) -> list[BrokenLine]:
        if self._lines is None:
            self._lines = [self._make_line(i, key, self._point) for i, key in enumerate(self._keys)]
        return self._lines

    @staticmethod
    def _make_line(line_id: int, key, point) -> BrokenLine:
        verts: dict[tuple[float, float], Point2] = {}
        segs = []
        for pc in key:
            a, b = _endpoints(pc)
            pa, pb = point(a), point(b)
            verts[a], verts[b] = pa, pb
            segs.append(Segment(pa, pb, pc[0], line_id))
        vertices = tuple(sorted(verts.values(), key=lambda p: (p.x, p.t)))
        segs.sort(key=lambda s: min(s.start.x, s.end.x))
        return BrokenLine(vertices, tuple(segs))

    @property
    def collisions(self) -> list[Point2]:
        """Local maxima: a +1 piece and a -1 piece ending at the same vertex."""
        ends_plus = {(pc[3], pc[1]) for pc in self.pieces if pc[0] > 0}
        ends_minus = {(pc[1], pc[3]) for pc in self.pieces if pc[0] < 0}
        return sorted(_lc_point(*k) for k in ends_plus & ends_minus)

    @property
    def births(self) -> list[Point2]:
        """Local minima: a +1 piece and a -1 piece starting at the same vertex."""
        return sorted(self._point(k) for k in self._birth_keys())

    def _birth_keys(self) -> set[tuple[float, float]]:
        starts_plus = {(pc[2], pc[1]) for pc in self.pieces if pc[0] > 0}
        starts_minus = {(pc[1], pc[2]) for pc in self.pieces if pc[0] < 0}
        return starts_plus & starts_minus

    # --- serialization -------------------------------------------------------
    def to_text(self) -> str:
        out = [f"DOMAIN {self.domain.describe()}\n"]
        for i, line in enumerate(self.lines):
            coords = " ".join(f"{p.t:.17g} {p.x:.17g}" for p in line.vertices)
            out.append(f"LINE {i} {coords}\n")
        return "".join(out)


def sample_boundary_births(d: Domain, lambda2: float, rng, enabled: bool = True) -> list[BirthEvent]:
    """Poisson births on the left, north-west and south-west walls of ``d``.

    Intensities per unit length: ``sqrt(lambda2 / 2)`` for each velocity on the
    vertical wall, ``sqrt(lambda2)`` on the two sloped walls.
    """
    if lambda2 < 0:
        raise ValueError("lambda2 must be >= 0")
    if not enabled or lambda2 == 0:
        return []
    gen = _as_generator(rng)
    out: list[BirthEvent] = []
    left = d.left_edge_length
    rho0 = math.sqrt(lambda2 / 2.0)
    for velocity, origin in ((1, "boundary-left-up"), (-1, "boundary-left-down")):
        k = int(gen.poisson(rho0 * left)) if left > 0 else 0
        for x in gen.uniform(d.g0_minus, d.g0_plus, k).tolist():
            out.append(BirthEvent(Point2(d.t0, x), velocity, origin))
    rho1 = math.sqrt(lambda2)
    k = int(gen.poisson(rho1 * d.nw_edge_length)) if d.nw_edge_length > 0 else 0
    for t in gen.uniform(d.t0, d.t01_plus, k).tolist():
        out.append(BirthEvent(Point2(t, d.g0_plus + (t - d.t0)), -1, "boundary-nw"))
    k = int(gen.poisson(rho1 * d.sw_edge_length)) if d.sw_edge_length > 0 else 0
    for t in gen.uniform(d.t0, d.t01_minus, k).tolist():
        out.append(BirthEvent(Point2(t, d.g0_minus - (t - d.t0)), 1, "boundary-sw"))
    out.sort(key=lambda b: (b.location.t, b.location.x))
    return out


def _interior_births(config: PlanarConfig, d: Domain, owner=-1):
    t, x = config.t, config.x
    if len(t) and not np.all(d.contains_arrays(t, x)):
        bad = int(np.argmin(d.contains_arrays(t, x)))
        raise ValueError(f"point ({t[bad]!r}, {x[bad]!r}) lies outside the domain")
    u, v = t + x, t - x
    return list(zip(t.tolist(), x.tolist(), u.tolist(), v.tolist(), ["pair"] * len(t), [owner] * len(t)))


def build_broken_lines(config: PlanarConfig, births: Sequence[BirthEvent] = (), d: Domain | None = None) -> LineSet:
    """Trace the annihilating particle system started from ``config`` and ``births``."""
    if d is None:
        raise ValueError("a domain is required")
    if not isinstance(config, PlanarConfig):
        config = PlanarConfig(config)
    ev = _interior_births(config, d)
    ev.extend(b.as_birth() for b in births)
    system = ParticleSystem(d).run(ev)
    return LineSet(system.pieces, d, anchors=anchor_map(ev))


def anchor_map(births) -> dict[tuple[float, float], Point2]:
    return {(b[2], b[3]): Point2(b[0], b[1]) for b in births}


def count_lines(ls: LineSet) -> int:
    return len(ls)


def separating_line_count(ls: LineSet, a: Point2, b: Point2, tol: float = 1e-9) -> int:
    """Number of lines (extended by their end rays) having ``a`` and ``b`` on opposite sides."""
    count = 0
    for line in ls.lines:
        da = a.t - line.height(a.x, extend=True)
        db = b.t - line.height(b.x, extend=True)
        if abs(da) < tol or abs(db) < tol:
            raise ValueError("query point lies on a broken line")
        if (da > 0) != (db > 0):
            count += 1
    return count


def extract_geodesic(ls: LineSet, start: Point2, tol: float = 1e-12) -> list[Point2]:
    """Backward space-type path from ``start`` that collects one point per line.

    Move towards smaller ``t`` until a line is met, slide down that line to
    its birth point, collect it, and repeat.
    """
    lines = ls.lines
    if not lines:
        return []
    births = ls._birth_keys()
    tables = []
    for key, line in zip(ls.key, lines):
        xs = np.array([p.x for p in line.vertices])
        ts = np.array([p.t for p in line.vertices])
        tables.append((xs, ts, key))
    out: list[Point2] = []
    t_cur, x_cur = start.t, start.x
    while True:
        best = None
        for idx, (xs, ts, key) in enumerate(tables):
            if x_cur < xs[0] or x_cur > xs[-1]:
                continue
            h = float(np.interp(x_cur, xs, ts))
            if h < t_cur - tol and (best is None or h > best[0]):
                best = (h, idx)
        if best is None:
            return out
        h, idx = best
        piece = _piece_at(tables[idx][2], x_cur, h)
        vel, c, lo, _ = piece
        key = (lo, c) if vel > 0 else (c, lo)
        if key not in births:
            return out
        p = ls._point(key)
        out.append(p)
        t_cur, x_cur = p.t, p.x


def _piece_at(key, x: float, t: float):
    best, best_err = None, math.inf
    for pc in key:
        a, b = _endpoints(pc)
        xa, xb = (a[0] - a[1]) * 0.5, (b[0] - b[1]) * 0.5
        lo_x, hi_x = min(xa, xb), max(xa, xb)
        if lo_x - 1e-12 <= x <= hi_x + 1e-12:
            ta = (a[0] + a[1]) * 0.5
            tt = ta + abs(x - xa)
            err = abs(tt - t)
            if err < best_err:
                best, best_err = pc, err
    return best


# --- chain oracles --------------------------------------------------------


def lis_oracle(config: PlanarConfig) -> int:
    """Longest chain in the light-cone order, by patience sorting."""
    if len(config) == 0:
        return 0
    u, v = config.u, config.v
    order = np.lexsort((-u, v))
    tails: list[float] = []
    for uu in u[order].tolist():
        k = bisect_left(tails, uu)
        if k == len(tails):
            tails.append(uu)
        else:
            tails[k] = uu
    return len(tails)


def brute_force_chain(config: PlanarConfig) -> int:
    """Exact longest chain by dynamic programming over the dominance order."""
    if len(config) > 20:
        raise ValueError("brute_force_chain accepts at most 20 points")
    pts = sorted(config, key=lambda p: (p.t, p.x))
    best = [1] * len(pts)
    for j, q in enumerate(pts):
        for i in range(j):
            if pts[i].precedes(q):
                best[j] = max(best[j], best[i] + 1)
    return max(best, default=0)


def all_longest_chains(config: PlanarConfig, start: Point2 | None = None) -> list[list[Point2]]:
    """Every maximum chain, optionally restricted to the backward cone of ``start``."""
    pts = [p for p in config if start is None or p.precedes(start)]
    if len(pts) > 20:
        raise ValueError("enumeration accepts at most 20 points")
    pts.sort(key=lambda p: (p.t, p.x))
    n = len(pts)
    ending = [1] * n
    for j in range(n):
        for i in range(j):
            if pts[i].precedes(pts[j]):
                ending[j] = max(ending[j], ending[i] + 1)
    top = max(ending, default=0)
    if top == 0:
        return [[]]
    chains: list[list[Point2]] = []

    def walk(j, tail):
        if ending[j] == 1:
            chains.append([pts[j]] + tail)
            return
        for i in range(j):
            if ending[i] == ending[j] - 1 and pts[i].precedes(pts[j]):
                walk(i, [pts[j]] + tail)

    for j in range(n):
        if ending[j] == top:
            walk(j, [])
    return chains


try:  # pragma: no cover - exercised implicitly
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def _levels_py(us, vs, insert):
    tails: list[float] = []
    out = np.empty(len(us), dtype=np.int64)
    for i, uu in enumerate(us.tolist()):
        k = bisect_left(tails, uu)
        out[i] = k + 1
        if insert[i]:
            if k == len(tails):
                tails.append(uu)
            else:
                tails[k] = uu
    return out


if njit is not None:

    @njit(cache=True)
    def _levels_nb(us, vs, insert):  # pragma: no cover - compiled
        n = len(us)
        tails = np.empty(n + 1)
        m = 0
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            uu = us[i]
            lo, hi = 0, m
            while lo < hi:
                mid = (lo + hi) >> 1
                if tails[mid] < uu:
                    lo = mid + 1
                else:
                    hi = mid
            out[i] = lo + 1
            if insert[i]:
                tails[lo] = uu
                if lo == m:
                    m += 1
        return out

    _levels_kernel = _levels_nb
else:  # pragma: no cover
    _levels_kernel = _levels_py


def chain_levels(u: np.ndarray, v: np.ndarray, insert: np.ndarray | None = None) -> np.ndarray:
    """Length of the longest chain ending at each point (inclusive).

    Points with ``insert`` false are queried without joining the
    configuration, so their level counts chains through inserted points only.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if insert is None:
        insert = np.ones(len(u), dtype=bool)
    order = np.lexsort((-u, v))
    lv = _levels_kernel(u[order], v[order], np.asarray(insert, dtype=bool)[order])
    out = np.empty(len(u), dtype=np.int64)
    out[order] = lv
    return out


def backward_levels(u: np.ndarray, v: np.ndarray, insert: np.ndarray | None = None) -> np.ndarray:
    """Length of the longest chain starting at each point (inclusive)."""
    return chain_levels(-np.asarray(u, dtype=float), -np.asarray(v, dtype=float), insert)


def greedy_geodesic(t: np.ndarray, x: np.ndarray, start: Point2, levels: np.ndarray | None = None) -> np.ndarray:
    """Indices of the points collected by the line-following geodesic from ``start``.

    Uses the fact that line ``k`` is the lower envelope of the forward cones
    of the level-``k`` points; this reproduces :func:`extract_geodesic`
    without building the lines.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    u, v = t + x, t - x
    inside = (u < start.u) & (v < start.v)
    if levels is None:
        levels = chain_levels(u, v)
    lv = np.where(inside, levels, 0)
    top = int(lv.max()) if len(lv) else 0
    if top == 0:
        return np.empty(0, dtype=np.int64)
    order = np.argsort(lv, kind="stable")
    bounds = np.searchsorted(lv[order], np.arange(top + 2))
    picked = []
    x_cur = start.x
    for k in range(top, 0, -1):
        idx = order[bounds[k]:bounds[k + 1]]
        j = idx[np.argmin(t[idx] + np.abs(x[idx] - x_cur))]
        picked.append(j)
        x_cur = x[j]
    return np.array(picked, dtype=np.int64)


def chain_per_side(chain: float, d: Domain) -> float:
    """Chain length per unit of the unrotated side (the Ulam normalisation)."""
    if d.kind == "square":
        return chain / d.n
    if d.kind == "triangle":
        return chain * SQRT2 / d.n
    raise ValueError("normalisation defined for square and triangle domains")


def parse_lineset_text(text: str) -> tuple[Domain | None, list[list[Point2]]]:
    domain = None
    lines: list[list[Point2]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        fields = raw.split()
        if not fields:
            continue
        if fields[0] == "DOMAIN":
            domain = Domain.parse(fields[1])
        elif fields[0] == "LINE":
            vals = [float(s) for s in fields[2:]]
            if len(vals) % 2:
                raise ValueError(f"line {lineno}: odd number of coordinates")
            lines.append([Point2(vals[i], vals[i + 1]) for i in range(0, len(vals), 2)])
    return domain, lines
