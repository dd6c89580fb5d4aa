"""Monte Carlo pinning experiments on Triangle(n) with points added on the t-axis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (AxisPoints, Domain, Point2, RandomSource, sample_axis_marks,
                       sample_poisson_in_domain, thin_axis)
from .influence import attractors_connected, augment_with_axis_points, build_attractors
from .lines import backward_levels, build_broken_lines, chain_levels, chain_per_side, greedy_geodesic

CSV_COLUMNS = ("n", "lambda1", "lambda2", "replica", "chain", "essential_frac", "visit_density",
               "spanning", "max_transversal", "bulk_essential_frac", "chain_bulk", "axis_points")


@dataclass(frozen=True)
class ReplicaResult:
    replica: int
    chain: int
    chain_bulk: int
    axis_points: int
    essential: int
    bulk_essential: int
    visits: int
    max_transversal: float
    spanning: bool | None

    @property
    def essential_frac(self) -> float:
        return self.essential / self.axis_points if self.axis_points else math.nan

    @property
    def bulk_essential_frac(self) -> float:
        return self.bulk_essential / self.axis_points if self.axis_points else math.nan


@dataclass(frozen=True)
class PinningStats:
    n: float
    lambda1: float
    lambda2: float
    replicas: int
    mean_chain_per_n: float
    chain_per_n_se: float
    essential_fraction: float
    essential_fraction_se: float
    bulk_essential_fraction: float
    bulk_essential_fraction_se: float
    visit_density: float
    visit_density_se: float
    spanning_rate: float
    mean_max_transversal: float
    max_transversal_se: float
    rows: tuple[ReplicaResult, ...] = field(repr=False, default=())

    @property
    def essential_fraction_defined(self) -> bool:
        return not math.isnan(self.essential_fraction)


def _mean_se(values) -> tuple[float, float]:
    a = np.asarray([v for v in values if not (v is None or (isinstance(v, float) and math.isnan(v)))], dtype=float)
    if len(a) == 0:
        return math.nan, math.nan
    if len(a) == 1:
        return float(a[0]), math.nan
    return float(a.mean()), float(a.std(ddof=1) / math.sqrt(len(a)))


def essential_mask(u: np.ndarray, v: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    """For each candidate point: does every longest chain of the configuration use it?

    Equivalently, removing the point shortens the longest chain by one.
    """
    f = chain_levels(u, v)
    b = backward_levels(u, v)
    total = int(f.max()) if len(f) else 0
    critical = (f + b - 1) == total
    per_level = np.bincount(f[critical], minlength=total + 1)
    cand = np.asarray(candidates)
    return critical[cand] & (per_level[f[cand]] == 1)


def bulk_essential_mask(u_bulk, v_bulk, u_add, v_add) -> np.ndarray:
    """For each added point separately: does it lengthen the bulk's longest chain?"""
    if len(u_add) == 0:
        return np.zeros(0, dtype=bool)
    f_bulk = chain_levels(u_bulk, v_bulk)
    total = int(f_bulk.max()) if len(f_bulk) else 0
    u = np.concatenate([u_bulk, u_add])
    v = np.concatenate([v_bulk, v_add])
    ins = np.concatenate([np.ones(len(u_bulk), bool), np.zeros(len(u_add), bool)])
    f = chain_levels(u, v, ins)[len(u_bulk):]
    b = backward_levels(u, v, ins)[len(u_bulk):]
    # chain through the added point alone: (longest ending below) + 1 + (longest starting above)
    return (f + b - 1) > total


def geodesic_visit_density(geodesic, n: float) -> float:
    """Collected points lying on the t-axis, per unit length."""
    if n <= 0:
        raise ValueError("n must be positive")
    return sum(1 for p in geodesic if p.x == 0.0) / n


def spanning_chain_exists(connectivity, attractors, d: Domain | None = None) -> bool:
    """Some connecting chain starts at the oldest axis point and reaches the domain boundary.

    The chain's time span is ``[t_oldest, t_hat]`` and an attractor ending on
    the boundary leaves the domain; together they cross it from the first added
    point to the right-hand boundary.
    """
    m = len(attractors)
    if m == 0:
        return False
    oldest = m - 1
    if attractors[oldest].ends_by_exit:
        return True
    for (i, j) in connectivity.witness:
        if i == oldest and attractors[j].ends_by_exit:
            return True
    return False


def run_replica(n: float, lambda1: float, lambda2: float, replica: int, source: RandomSource,
                lambda1_max: float | None = None, point_to_point: bool = False,
                attractors: bool = False) -> ReplicaResult:
    d = Domain.square(n) if point_to_point else Domain.triangle(n)
    rep = source.child(replica)
    bulk = sample_poisson_in_domain(d, lambda2, rep.child("interior").generator())
    lam_max = max(lambda1, lambda1_max or 0.0)
    if point_to_point or lam_max == 0:
        axis = AxisPoints()
    else:
        times, marks = sample_axis_marks(lam_max, (0.0, float(n)), rep.child("axis").generator())
        axis = thin_axis(times, marks, lambda1, lam_max)
    t_add = axis.times
    x_add = np.zeros_like(t_add)
    t = np.concatenate([bulk.t, t_add])
    x = np.concatenate([bulk.x, x_add])
    u, v = t + x, t - x
    nb, m = len(bulk), len(t_add)
    f = chain_levels(u, v)
    chain = int(f.max()) if len(f) else 0
    fb = f[:nb] if m == 0 else chain_levels(bulk.u, bulk.v)
    chain_bulk = int(fb.max()) if nb else 0
    cand = np.arange(nb, nb + m)
    essential = int(essential_mask(u, v, cand).sum()) if m else 0
    bulk_ess = int(bulk_essential_mask(bulk.u, bulk.v, u[nb:], v[nb:]).sum()) if m else 0
    if point_to_point:
        start = Point2(d.t1, 0.0)
    else:
        start = Point2(float(n), 0.0)
    geo = greedy_geodesic(t, x, start, levels=f)
    visits = int(np.count_nonzero(geo >= nb))
    max_tr = float(np.abs(x[geo]).max()) if len(geo) else 0.0
    spanning = None
    if attractors:
        if m == 0:
            spanning = False
        else:
            ls = build_broken_lines(bulk, (), d)
            aug = augment_with_axis_points(ls, bulk, axis, mode="sequential")
            att = build_attractors(aug)
            con = attractors_connected(att, axis)
            spanning = spanning_chain_exists(con, att, d)
    return ReplicaResult(replica, chain, chain_bulk, m, essential, bulk_ess, visits, max_tr, spanning)


def run_pinning_experiment(n: float, lambda1: float, lambda2: float, replicas: int, rng,
                           lambda1_max: float | None = None, point_to_point: bool = False,
                           attractors: bool = False) -> PinningStats:
    """Replicated pinning experiment; deterministic given ``rng`` (a seed or RandomSource).

    ``lambda1_max`` couples runs at different ``lambda1``: the axis process is
    sampled at ``lambda1_max`` and thinned, so larger ``lambda1`` only adds points.
    """
    if not n > 0:
        raise ValueError("n must be positive")
    if lambda1 < 0 or lambda2 < 0:
        raise ValueError("intensities must be >= 0")
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    if lambda1_max is not None and lambda1_max < lambda1:
        raise ValueError("lambda1_max must be >= lambda1")
    source = rng if isinstance(rng, RandomSource) else RandomSource(int(rng), "pinning")
    rows = tuple(run_replica(n, lambda1, lambda2, r, source, lambda1_max, point_to_point, attractors)
                 for r in range(replicas))
    d = Domain.square(n) if point_to_point else Domain.triangle(n)
    cpn, cpn_se = _mean_se([chain_per_side(r.chain, d) for r in rows])
    ess, ess_se = _mean_se([r.essential_frac for r in rows])
    bess, bess_se = _mean_se([r.bulk_essential_frac for r in rows])
    vis, vis_se = _mean_se([r.visits / n for r in rows])
    tr, tr_se = _mean_se([r.max_transversal for r in rows])
    span = [r.spanning for r in rows if r.spanning is not None]
    span_rate = float(np.mean(span)) if span else math.nan
    return PinningStats(float(n), float(lambda1), float(lambda2), replicas, cpn, cpn_se, ess, ess_se,
                        bess, bess_se, vis, vis_se, span_rate, tr, tr_se, rows)


def pinning_rows(stats: PinningStats, d: Domain | None = None):
    """CSV rows in :data:`CSV_COLUMNS` order."""
    for r in stats.rows:
        yield (stats.n, stats.lambda1, stats.lambda2, r.replica, r.chain, r.essential_frac,
               r.visits / stats.n, "" if r.spanning is None else int(r.spanning), r.max_transversal,
               r.bulk_essential_frac, r.chain_bulk, r.axis_points)


def fit_transversal_exponent(ns, means) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log(mean) ~ log(n)``."""
    ns = np.asarray(ns, dtype=float)
    means = np.asarray(means, dtype=float)
    slope, intercept = np.polyfit(np.log(ns), np.log(means), 1)
    return float(slope), float(intercept)


def transversal_experiment(ns, replicas: int, seed: int, lambda2: float = 1.0):
    """Mean max |x| along the point-to-plane geodesic (no axis points) per ``n``."""
    out = []
    for n in ns:
        st = run_pinning_experiment(n, 0.0, lambda2, replicas, RandomSource(seed, f"transversal/{n}"))
        out.append((float(n), st.mean_max_transversal, st.max_transversal_se))
    slope, _ = fit_transversal_exponent([o[0] for o in out], [o[1] for o in out])
    return slope, out
