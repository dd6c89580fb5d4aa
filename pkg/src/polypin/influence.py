"""Influence of points added on the t-axis.

Added points emit *superior* particles whose trajectories (influence paths)
describe exactly how the broken lines change.  Axis points are indexed in
decreasing time order: index 0 is the rightmost (youngest) point, larger
indices are older.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._engine import ParticleSystem
from .geometry import AxisPoints, Domain, PlanarConfig, Point2
from .lines import LineSet, _interior_births, build_broken_lines, count_lines

INF = math.inf

EXITED = "exited-domain"
ANNIHILATED = "pair-annihilated"
TRUNCATED = "truncated-at-return"

PAIR_CLASSES = ("flat", "embedded", "parallel", "crossed")


def _lc(u: float, v: float) -> Point2:
    return Point2((u + v) * 0.5, (u - v) * 0.5)


@dataclass(frozen=True)
class PathSegment:
    start: Point2
    end: Point2
    velocity: int
    label: tuple[int, int]  # (j, velocity); labels alternate (1, sign), (1, -sign), (2, sign), ...


@dataclass(frozen=True)
class InfluencePath:
    origin: Point2
    sign: int
    pieces: tuple[tuple[int, float, float, float], ...]
    end_kind: str
    end: Point2
    partner: tuple[int, int] | None = None  # (owner index, sign) met in a +- annihilation
    owner: int = 0

    @property
    def segments(self) -> list[PathSegment]:
        out = []
        j = 1
        for k, (vel, c, lo, hi) in enumerate(self.pieces):
            if k and vel == self.sign:
                j += 1
            a, b = ((lo, c), (hi, c)) if vel > 0 else ((c, lo), (c, hi))
            out.append(PathSegment(_lc(*a), _lc(*b), vel, (j, vel)))
        return out

    @property
    def vertices(self) -> list[Point2]:
        segs = self.segments
        if not segs:
            return [self.origin]
        return [self.origin] + [s.end for s in segs]

    @property
    def flips(self) -> list[Point2]:
        """Points where the velocity changes."""
        return [s.end for s in self.segments[:-1]]

    @property
    def end_time(self) -> float:
        return self.end.t

    def position_at(self, t: float) -> float | None:
        """``x`` of the path at time ``t``; None outside its lifetime."""
        if t < self.origin.t or t > self.end.t:
            return None
        for s in self.segments:
            if s.start.t <= t <= s.end.t:
                return s.start.x + s.velocity * (t - s.start.t)
        return self.origin.x

    def first_return(self) -> float | None:
        """Time of the first visit to ``x = 0`` after birth (a touch counts)."""
        for k, (vel, c, lo, hi) in enumerate(self.pieces):
            # along a +1 piece v = c is fixed, x = 0 where u = c; similarly for -1
            if lo < c <= hi and not (k == 0 and c == lo):
                return c
        return None

    def truncated(self, t: float) -> "InfluencePath":
        """The part of the path with time at most ``t``."""
        keep = []
        for vel, c, lo, hi in self.pieces:
            t_lo = (lo + c) * 0.5
            if t_lo >= t:
                break
            t_hi = (hi + c) * 0.5
            if t_hi > t:
                hi = 2 * t - c
                keep.append((vel, c, lo, hi))
                break
            keep.append((vel, c, lo, hi))
        if not keep:
            return InfluencePath(self.origin, self.sign, (), TRUNCATED, self.origin, None, self.owner)
        vel, c, lo, hi = keep[-1]
        end = _lc(hi, c) if vel > 0 else _lc(c, hi)
        if t >= self.end.t:
            return self
        return InfluencePath(self.origin, self.sign, tuple(keep), TRUNCATED, end, None, self.owner)

    def is_prefix_of(self, other: "InfluencePath") -> bool:
        """Whether this path follows ``other`` from the origin until it ends."""
        if self.origin != other.origin or self.sign != other.sign:
            return False
        n = len(self.pieces)
        if n == 0:
            return True
        if n > len(other.pieces) or self.pieces[: n - 1] != other.pieces[: n - 1]:
            return False
        a, b = self.pieces[-1], other.pieces[n - 1]
        return a[:3] == b[:3] and a[3] <= b[3]


@dataclass(frozen=True)
class AnnihilationRecord:
    tau: float
    pair_tau: float
    pair_class: str | None = None


@dataclass(frozen=True)
class Attractor:
    index: int
    origin: Point2
    t_hat: float
    e_plus: Point2
    e_minus: Point2
    f_plus: Point2 | None
    f_minus: Point2 | None
    r_plus: float | None
    r_minus: float | None
    boundary_upper: InfluencePath
    boundary_lower: InfluencePath
    exit_plus: bool
    exit_minus: bool
    degenerate: bool = False
    _vertices: tuple[tuple[float, float], ...] = field(default=(), repr=False)

    @property
    def polygon(self):
        from shapely.geometry import Polygon

        if self.degenerate:
            return Polygon()
        return Polygon(self._vertices)

    @property
    def region_vertices(self) -> list[tuple[float, float]]:
        return list(self._vertices)

    def contains_axis_time(self, t: float) -> bool:
        """Whether the axis point ``(t, 0)`` lies inside the attractor."""
        return self.origin.t < t < self.t_hat

    @property
    def ends_by_exit(self) -> bool:
        """Whether ``t_hat`` is reached by a path leaving the domain."""
        return ((self.exit_plus and self.f_plus is not None and self.f_plus.t == self.t_hat)
                or (self.exit_minus and self.f_minus is not None and self.f_minus.t == self.t_hat))


@dataclass
class Augmentation:
    """Result of adding axis points to a scenery."""

    lineset: LineSet
    paths: list[tuple[InfluencePath, InfluencePath]]  # (plus, minus) per axis point
    axis: AxisPoints
    pieces_trace: list[tuple] = field(default_factory=list, repr=False)


# --- the superior particle system -------------------------------------------


def _check_axis_point(p: Point2, d: Domain, config: PlanarConfig):
    if p.x != 0.0:
        raise ValueError(f"added point {p} is not on the t-axis")
    if not d.contains(p):
        raise ValueError(f"added point {p} lies outside the domain")
    if p in config:
        raise ValueError(f"added point {p} coincides with a scenery point")


def _run_superior(config: PlanarConfig, points: Sequence[Point2], d: Domain, births=()):
    ev = _interior_births(config, d)
    ev.extend(b.as_birth() for b in births)
    for k, p in enumerate(points):
        ev.append((p.t, p.x, p.u, p.v, "superior", k))
    system = ParticleSystem(d).run(ev)
    return system, ev


def _paths_from(system: ParticleSystem, points: Sequence[Point2]) -> list[tuple[InfluencePath, InfluencePath]]:
    by_owner: dict[int, dict[int, InfluencePath]] = defaultdict(dict)
    sups = system.superiors
    for tr in sups:
        kind = EXITED if tr.end_kind == "exited" else ANNIHILATED
        partner = None
        if tr.partner is not None:
            other = sups[tr.partner]
            partner = (other.owner, other.sign)
        path = InfluencePath(points[tr.owner], tr.sign, tuple(tr.pieces), kind, _lc(*tr.end), partner, tr.owner)
        by_owner[tr.owner][tr.sign] = path
    return [(by_owner[k][1], by_owner[k][-1]) for k in range(len(points))]


def _trace_pieces(system: ParticleSystem) -> list[tuple]:
    """Regular traces plus superior pieces moving with their own type."""
    sign = {i: tr.sign for i, tr in enumerate(system.superiors)}
    out = []
    for pc, own in zip(system.pieces, system.piece_owner):
        if own < 0 or pc[0] == sign[own]:
            out.append(pc)
    return out


def _subtract(pieces: list[tuple], erase: list[tuple]) -> list[tuple]:
    cut: dict[tuple[int, float], list[tuple[float, float]]] = defaultdict(list)
    for vel, c, lo, hi in erase:
        cut[(vel, c)].append((lo, hi))
    out = []
    for vel, c, lo, hi in pieces:
        holes = sorted(cut.get((vel, c), ()))
        cur = lo
        for a, b in holes:
            if b <= cur or a >= hi:
                continue
            if a > cur:
                out.append((vel, c, cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((vel, c, cur, hi))
    return out


def erase_add(lineset: LineSet, paths: Sequence[tuple[InfluencePath, InfluencePath]]) -> LineSet:
    """Apply the update rule: erase path pieces moving against their type, add the others."""
    erase, add = [], []
    for pair in paths:
        for path in pair:
            for pc in path.pieces:
                (add if pc[0] == path.sign else erase).append(pc)
    pieces = _subtract(lineset.pieces, erase) + add
    anchors = dict(lineset._anchors)
    for pair in paths:
        anchors[(pair[0].origin.u, pair[0].origin.v)] = pair[0].origin
    return LineSet(pieces, lineset.domain, anchors=anchors)


def self_annihilation_time(paths: tuple[InfluencePath, InfluencePath], d: Domain | None = None) -> float:
    """Time at which the two paths of one origin meet; ``inf`` if they never do."""
    plus, minus = paths
    if plus.origin != minus.origin:
        raise ValueError("paths must share their origin")
    if (plus.end_kind == ANNIHILATED and minus.end_kind == ANNIHILATED
            and plus.partner == (minus.owner, -1) and minus.partner == (plus.owner, 1)):
        return plus.end.t
    return INF


def augment_with_point(ls: LineSet, config: PlanarConfig, x: Point2, births=(), check: bool = False):
    """Add one axis point to ``config``.

    Returns ``(lineset, path_plus, path_minus, record)`` where ``lineset`` is
    obtained from ``ls`` by the erase/add rule.  With ``check`` the result is
    compared with a rebuild from scratch.
    """
    d = ls.domain
    _check_axis_point(x, d, config)
    system, _ = _run_superior(config, [x], d, births)
    (plus, minus), = _paths_from(system, [x])
    new = erase_add(ls, [(plus, minus)])
    if check:
        ref = build_broken_lines(config.union([x]), births, d)
        if new != ref:
            raise AssertionError("incremental update disagrees with rebuild")
    tau = self_annihilation_time((plus, minus), d)
    return new, plus, minus, AnnihilationRecord(tau, tau, None)


def augment_with_axis_points(ls: LineSet, config: PlanarConfig, xs: AxisPoints, births=(),
                             mode: str = "simultaneous") -> Augmentation:
    """Add the axis points ``xs`` (strictly decreasing times) to ``config``.

    ``mode="simultaneous"`` runs all superior particles in one sweep with the
    three collision rules; ``mode="sequential"`` inserts the points one by one,
    rightmost first, each new point seeing the earlier ones as regular.
    """
    if not isinstance(xs, AxisPoints):
        xs = AxisPoints(xs)
    d = ls.domain
    pts = xs.points
    if not pts:
        return Augmentation(ls, [], xs)
    for p in pts:
        _check_axis_point(p, d, config)
    if mode == "simultaneous":
        system, ev = _run_superior(config, pts, d, births)
        paths = _paths_from(system, pts)
        trace = _trace_pieces(system)
        new = erase_add(ls, paths)
        return Augmentation(new, paths, xs, trace)
    if mode == "sequential":
        cur_ls, cur_cfg = ls, config
        paths = []
        for p in pts:
            cur_ls, plus, minus, _ = augment_with_point(cur_ls, cur_cfg, p, births)
            paths.append((plus, minus))
            cur_cfg = cur_cfg.union([p])
        return Augmentation(cur_ls, paths, xs)
    raise ValueError(f"unknown mode {mode!r}")


def trace_lineset(aug: Augmentation, d: Domain) -> LineSet:
    """Line set read directly from the particle traces of a simultaneous run."""
    return LineSet(aug.pieces_trace, d)


def is_essential(config: PlanarConfig, x: Point2, d: Domain, births=()) -> bool:
    """Whether adding ``x`` raises the number of broken lines by one."""
    h0 = count_lines(build_broken_lines(config, births, d))
    h1 = count_lines(build_broken_lines(config.union([x]), births, d))
    if h1 - h0 not in (0, 1):
        raise AssertionError(f"line count changed by {h1 - h0}")
    return h1 == h0 + 1


def classify_pair_annihilation(config: PlanarConfig, x: Point2, y: Point2, d: Domain, births=()) -> AnnihilationRecord:
    """Joint annihilation of the superior particles of two axis points.

    ``tau`` is the self-annihilation time of the earlier point alone and
    ``pair_tau`` the last time any of the four superior particles is alive
    (``inf`` if one of them leaves the domain).
    """
    if x == y:
        raise ValueError("points must be distinct")
    first, second = (x, y) if x.t < y.t else (y, x)
    for p in (first, second):
        _check_axis_point(p, d, config)
    ls = build_broken_lines(config, births, d)
    tau_first = augment_with_point(ls, config, first, births)[3].tau
    aug = augment_with_axis_points(ls, config, AxisPoints([second.t, first.t]), births)
    (p2, m2), (p1, m1) = aug.paths  # index 0 is the later (second) point
    four = (p1, m1, p2, m2)
    if any(p.end_kind != ANNIHILATED for p in four):
        return AnnihilationRecord(tau_first, INF, None)
    pair_tau = max(p.end.t for p in four)
    if tau_first < second.t:
        cls = "flat"
    elif p1.partner == (1, -1) and p2.partner == (0, -1):
        lo, hi = m1.position_at(second.t), p1.position_at(second.t)
        inside = lo is not None and hi is not None and lo < 0.0 < hi
        cls = "embedded" if inside else "parallel"
    else:
        cls = "crossed"
    return AnnihilationRecord(tau_first, pair_tau, cls)


def family_annihilation_time(paths: Sequence[tuple[InfluencePath, InfluencePath]]) -> float:
    """Last time any superior particle of the family is alive (``inf`` if one exits)."""
    t = -INF
    for pair in paths:
        for p in pair:
            if p.end_kind != ANNIHILATED:
                return INF
            t = max(t, p.end.t)
    return t


# --- attractors --------------------------------------------------------------


def build_attractor(paths: tuple[InfluencePath, InfluencePath], d: Domain, index: int = 0) -> Attractor:
    """Region enclosed by the two paths up to the first return or end time."""
    plus, minus = paths
    origin = plus.origin
    f_plus = plus.end
    f_minus = minus.end
    r_plus = plus.first_return()
    r_minus = minus.first_return()
    times = [f_plus.t, f_minus.t] + [r for r in (r_plus, r_minus) if r is not None]
    t_hat = min(times)
    up = plus.truncated(t_hat)
    low = minus.truncated(t_hat)
    e_plus = up.end if up.pieces else origin
    e_minus = low.end if low.pieces else origin
    degenerate = t_hat <= origin.t
    verts: list[tuple[float, float]] = []
    if not degenerate:
        verts = [(p.t, p.x) for p in low.vertices]
        verts += [(p.t, p.x) for p in reversed(up.vertices)][:-1]
        _validate_ring(verts, index)
    return Attractor(index, origin, t_hat, e_plus, e_minus, f_plus, f_minus, r_plus, r_minus,
                     up, low, plus.end_kind == EXITED, minus.end_kind == EXITED, degenerate, tuple(verts))


def _validate_ring(verts, index):
    from shapely.geometry import Polygon

    poly = Polygon(verts)
    if not poly.is_valid:
        from shapely.validation import explain_validity

        raise ValueError(f"attractor {index}: boundary is not a simple curve ({explain_validity(poly)})")


def build_attractors(aug: Augmentation) -> list[Attractor]:
    return [build_attractor(pair, aug.lineset.domain, k) for k, pair in enumerate(aug.paths)]


@dataclass(frozen=True)
class Connectivity:
    """``connected[i, j]`` (``i > j``) with a connecting index chain per pair."""

    direct: np.ndarray
    connected: np.ndarray
    witness: dict[tuple[int, int], tuple[int, ...]]

    def pairs(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(self.connected)
        return sorted(zip(ii.tolist(), jj.tolist()))


def attractors_connected(attractors: Sequence[Attractor], xs: AxisPoints | None = None,
                         witnesses: bool = True) -> Connectivity:
    """Chains ``j = i_0 < ... < i_k = i`` with each point inside the next attractor."""
    m = len(attractors)
    times = np.array([a.origin.t for a in attractors]) if xs is None else np.asarray(xs.times)
    t_hat = np.array([a.t_hat for a in attractors])
    idx = np.arange(m)
    # direct[i, j]: i older than j and x_j inside A_i
    direct = ((idx[:, None] > idx[None, :]) & (times[:, None] < times[None, :])
              & (times[None, :] < t_hat[:, None]))
    conn = direct.copy()
    nxt = np.full((m, m), -1, dtype=np.int64)  # next index after j on a chain towards i
    jj, ii = np.nonzero(direct.T)
    nxt[ii, jj] = ii
    for j in range(m - 1, -1, -1):
        # conn[i, j] = direct[i, j] or exists k: direct[k, j] and conn[i, k]
        ks = np.nonzero(direct[:, j])[0]
        for k in ks:
            newly = conn[:, k] & ~conn[:, j]
            conn[newly, j] = True
            nxt[newly, j] = k
    wit: dict[tuple[int, int], tuple[int, ...]] = {}
    if witnesses:
        for i, j in zip(*np.nonzero(conn)):
            chain = [int(j)]
            cur = int(j)
            while cur != i:
                cur = int(nxt[i, cur])
                chain.append(cur)
            wit[(int(i), int(j))] = tuple(chain)
    return Connectivity(direct, conn, wit)


# --- structured text ---------------------------------------------------------


def paths_to_text(paths: Sequence[tuple[InfluencePath, InfluencePath]]) -> str:
    out = []
    for k, pair in enumerate(paths):
        for p in pair:
            coords = " ".join(f"{q.t:.17g} {q.x:.17g}" for q in p.vertices)
            sign = "+" if p.sign > 0 else "-"
            out.append(f"PATH {k} {sign} {p.end_kind} {coords}\n")
    return "".join(out)


def attractors_to_text(attractors: Sequence[Attractor]) -> str:
    out = []
    for a in attractors:
        coords = " ".join(f"{t:.17g} {x:.17g}" for t, x in a.region_vertices)
        out.append(f"ATTRACTOR {a.index} {a.t_hat:.17g} {coords}\n")
    return "".join(out)
