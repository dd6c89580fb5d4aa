"""One-dimensional stick percolation: overlapping sticks (model 1) and reinforced sticks (model 2)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .geometry import RandomSource, _as_generator


class Decision(str, Enum):
    PERCOLATES = "percolates"
    DOES_NOT_PERCOLATE = "does_not_percolate"
    UNDETERMINED = "undetermined"


class Stability(str, Enum):
    YES = "yes"
    NO = "no"
    UNDETERMINED = "undetermined"


class NoCriticalPoint(ValueError):
    """Raised when a length law has no finite critical intensity."""


TAIL_CLASSES = ("power", "log_like", "bounded_phi", "super_log")


@dataclass(frozen=True)
class TailClass:
    name: str
    value: float | None = None  # power: tail exponent a (R ~ x^-a, a < 1); log_like: L

    def __post_init__(self):
        if self.name not in TAIL_CLASSES:
            raise ValueError(f"unknown tail class {self.name!r}")
        if self.name == "power" and not (self.value is not None and 0 < self.value < 1):
            raise ValueError("power tail class needs an exponent in (0, 1); use log_like or bounded_phi otherwise")
        if self.name == "log_like" and not (self.value is not None and self.value > 0):
            raise ValueError("log_like tail class needs a positive coefficient")


@dataclass(frozen=True)
class DistributionDescriptor:
    """Stick length law.

    Built-ins: ``pareto(alpha, scale)`` with ``P(S > x) = (scale/x)^alpha``
    beyond ``scale``; ``positive_cauchy(c)``, a half-Cauchy law with
    ``P(S > x) ~ c/x``; ``exponential(mean)``; ``deterministic(length)``.
    ``custom`` takes a sampler, an optional survival function (needed for
    ``phi``) and an optional declared tail class.
    """

    kind: str
    params: tuple[float, ...] = ()
    sampler: Callable | None = field(default=None, compare=False)
    survival: Callable | None = field(default=None, compare=False)
    declared_tail: TailClass | None = None

    def __post_init__(self):
        k, p = self.kind, self.params
        if k == "pareto":
            if len(p) != 2 or not (p[0] > 0 and p[1] > 0):
                raise ValueError("pareto needs alpha > 0 and scale > 0")
        elif k in ("positive_cauchy", "exponential", "deterministic"):
            if len(p) != 1 or not p[0] > 0:
                raise ValueError(f"{k} needs one positive parameter")
        elif k == "custom":
            if self.sampler is None:
                raise ValueError("custom descriptor needs a sampler")
        else:
            raise ValueError(f"unknown distribution kind {k!r}")

    # constructors -----------------------------------------------------------
    @classmethod
    def pareto(cls, alpha: float, scale: float = 1.0):
        return cls("pareto", (float(alpha), float(scale)))

    @classmethod
    def positive_cauchy(cls, c: float):
        return cls("positive_cauchy", (float(c),))

    @classmethod
    def exponential(cls, mean: float):
        return cls("exponential", (float(mean),))

    @classmethod
    def deterministic(cls, length: float):
        return cls("deterministic", (float(length),))

    @classmethod
    def custom(cls, sampler, survival=None, tail_class: TailClass | None = None):
        return cls("custom", (), sampler, survival, tail_class)

    # properties -------------------------------------------------------------
    @property
    def cauchy_scale(self) -> float:
        # half-Cauchy with scale s has P(S > x) ~ 2s/(pi x); s = pi c / 2 gives c/x
        return math.pi * self.params[0] / 2

    @property
    def tail_class(self) -> TailClass | None:
        k, p = self.kind, self.params
        if k == "pareto":
            alpha, scale = p
            if alpha < 1:
                return TailClass("power", alpha)
            if alpha == 1:
                return TailClass("log_like", scale)
            return TailClass("bounded_phi")
        if k == "positive_cauchy":
            return TailClass("log_like", p[0])
        if k in ("exponential", "deterministic"):
            return TailClass("bounded_phi")
        return self.declared_tail

    def describe(self) -> str:
        if self.kind == "custom":
            return "custom"
        return f"{self.kind}({','.join(f'{v:.17g}' for v in self.params)})"

    def survival_fn(self, x):
        """``R(x) = P(S > x)``."""
        x = np.asarray(x, dtype=float)
        k, p = self.kind, self.params
        if k == "pareto":
            alpha, scale = p
            return np.where(x < scale, 1.0, (scale / np.maximum(x, scale)) ** alpha)
        if k == "positive_cauchy":
            return 1.0 - (2 / math.pi) * np.arctan(x / self.cauchy_scale)
        if k == "exponential":
            return np.exp(-x / p[0])
        if k == "deterministic":
            return np.where(x < p[0], 1.0, 0.0)
        if self.survival is None:
            raise ValueError("custom descriptor has no survival function")
        return np.vectorize(self.survival, otypes=[float])(x)

    def sample(self, rng, size: int) -> np.ndarray:
        gen = _as_generator(rng)
        k, p = self.kind, self.params
        if k == "pareto":
            alpha, scale = p
            return scale * (1.0 - gen.random(size)) ** (-1.0 / alpha)
        if k == "positive_cauchy":
            return np.abs(self.cauchy_scale * gen.standard_cauchy(size))
        if k == "exponential":
            return gen.exponential(p[0], size)
        if k == "deterministic":
            return np.full(size, p[0])
        out = np.asarray(self.sampler(gen, size), dtype=float)
        if out.shape != (size,) or np.any(out <= 0):
            raise ValueError("custom sampler must return `size` positive lengths")
        return out


def phi(d: DistributionDescriptor, x: float) -> float:
    """``phi(x) = integral of P(S > u) over [0, x]``."""
    if x < 0:
        raise ValueError("phi needs x >= 0")
    x = float(x)
    k, p = d.kind, d.params
    if x == 0:
        return 0.0
    if k == "pareto":
        alpha, s = p
        if x <= s:
            return x
        if alpha == 1:
            return s + s * math.log(x / s)
        return s + s**alpha * (x ** (1 - alpha) - s ** (1 - alpha)) / (1 - alpha)
    if k == "positive_cauchy":
        s = d.cauchy_scale
        r = x / s
        return x * (1 - (2 / math.pi) * math.atan(r)) + (s / math.pi) * math.log1p(r * r)
    if k == "exponential":
        return p[0] * -math.expm1(-x / p[0])
    if k == "deterministic":
        return min(x, p[0])
    from scipy.integrate import quad

    val, _ = quad(lambda u: float(d.survival_fn(u)), 0.0, x, epsabs=1e-10, limit=200)
    return val


@dataclass(frozen=True)
class CriterionResult:
    decision: Decision
    diagnostic: dict | None = None

    def __eq__(self, other):
        if isinstance(other, (Decision, str)):
            return self.decision == other
        return NotImplemented


def _partial_integrals(d, lam, xs=(1e1, 1e2, 1e3, 1e4)) -> dict:
    from scipy.integrate import quad

    vals = {}
    prev, acc = 0.0, 0.0
    for x in xs:
        piece, _ = quad(lambda u: math.exp(-lam * phi(d, u)), prev, x, limit=200)
        acc += piece
        vals[x] = acc
        prev = x
    return {"partial_integrals": vals,
            "growth_last_decade": vals[xs[-1]] / vals[xs[-2]] if vals[xs[-2]] > 0 else math.inf}


def percolation_criterion(d: DistributionDescriptor, lam: float) -> CriterionResult:
    """Does model 1 percolate at intensity ``lam``?

    Percolation holds iff the integral of ``exp(-lam * phi)`` over the half-line
    is finite; the decision is read off the tail class.
    """
    if not lam > 0:
        raise ValueError("lambda must be positive")
    tc = d.tail_class
    if tc is None:
        return CriterionResult(Decision.UNDETERMINED, _partial_integrals(d, lam))
    if tc.name == "bounded_phi":
        return CriterionResult(Decision.DOES_NOT_PERCOLATE)
    if tc.name in ("power", "super_log"):
        return CriterionResult(Decision.PERCOLATES)
    prod = lam * tc.value
    if prod > 1:
        return CriterionResult(Decision.PERCOLATES)
    if prod < 1:
        return CriterionResult(Decision.DOES_NOT_PERCOLATE)
    return CriterionResult(Decision.UNDETERMINED)


def is_cluster_stable(d: DistributionDescriptor) -> Stability:
    """Percolation for every positive intensity?"""
    tc = d.tail_class
    if tc is None:
        return Stability.UNDETERMINED
    if tc.name in ("power", "super_log"):
        return Stability.YES
    return Stability.NO


def critical_intensity(d: DistributionDescriptor) -> float:
    """Analytic threshold ``1/L`` for log-like laws."""
    tc = d.tail_class
    if tc is None:
        raise NoCriticalPoint("tail class unknown")
    if tc.name == "log_like":
        return 1.0 / tc.value
    if tc.name == "bounded_phi":
        raise NoCriticalPoint("no finite critical point: the system never percolates")
    raise NoCriticalPoint("no finite critical point: the law is cluster-stable")


# --- simulation ------------------------------------------------------------------


@dataclass(frozen=True)
class StickSample:
    seeds: np.ndarray
    lengths: np.ndarray
    T: float


def sample_sticks(lam: float, d: DistributionDescriptor, T: float, rng) -> StickSample:
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    if not T > 0:
        raise ValueError("T must be positive")
    gen = _as_generator(rng)
    k = int(gen.poisson(lam * T)) if lam > 0 else 0
    seeds = np.sort(gen.uniform(0.0, T, k))
    lengths = d.sample(gen, k) if k else np.zeros(0)
    return StickSample(seeds, lengths, float(T))


@dataclass(frozen=True)
class Model1Result:
    max_covered: float  # right end of the first stick's cluster
    n_clusters: int
    spans_window: bool


def first_cluster_reach(seeds: np.ndarray, lengths: np.ndarray) -> float:
    """Right end of the cluster containing the first stick (0 when there are no sticks)."""
    if len(seeds) == 0:
        return 0.0
    ends = np.maximum.accumulate(seeds + lengths)
    gap = np.flatnonzero(seeds[1:] >= ends[:-1])
    return float(ends[gap[0]] if len(gap) else ends[-1])


def count_clusters(seeds: np.ndarray, lengths: np.ndarray) -> int:
    if len(seeds) == 0:
        return 0
    ends = np.maximum.accumulate(seeds + lengths)
    return int(1 + np.count_nonzero(seeds[1:] >= ends[:-1]))


def simulate_model1(lam: float, d: DistributionDescriptor, T: float, rng, sample: StickSample | None = None) -> Model1Result:
    """Overlapping sticks ``[x_i, x_i + S_i]`` seeded by a Poisson process on ``[0, T]``."""
    s = sample or sample_sticks(lam, d, T, rng)
    reach = first_cluster_reach(s.seeds, s.lengths)
    return Model1Result(reach, count_clusters(s.seeds, s.lengths), bool(len(s.seeds) and reach >= s.T))


@dataclass(frozen=True)
class Flight:
    start: float
    end: float
    bonus: int
    counter_after_landing: int


@dataclass(frozen=True)
class Model2Result:
    tagged_survives_to_T: bool
    final_position: float
    flights: tuple[Flight, ...]


def simulate_model2(lam: float, d: DistributionDescriptor, T: float, rng, sample: StickSample | None = None,
                    bonus_mode: str = "all", record: bool = True, max_flights: int = 10_000_000) -> Model2Result:
    """Reinforced sticks: the first-born particle flies, collecting chances.

    It starts with counter 1, gains 1 for each seed passed while airborne,
    loses 1 at each landing and bounces while the counter is positive.  The
    bounce lengths are the lengths attached to the passed seeds, taken in
    order, which are i.i.d. copies of S and couple the run with model 1 on the
    same sample.  ``bonus_mode="first_flight"`` only rewards seeds passed on
    the first flight.
    """
    if bonus_mode not in ("all", "first_flight"):
        raise ValueError("bonus_mode must be 'all' or 'first_flight'")
    s = sample or sample_sticks(lam, d, T, rng)
    seeds, lengths = s.seeds, s.lengths
    if len(seeds) == 0:
        return Model2Result(False, 0.0, ())
    pos = float(seeds[0])
    nxt = 1  # index of the next seed not yet passed
    tokens: list[int] = []  # seeds passed whose length is still unused
    tok_head = 0
    length = float(lengths[0])
    counter = 1
    flights: list[Flight] = []
    first = True
    for _ in range(max_flights):
        end = pos + length
        passed = int(np.searchsorted(seeds, end, side="right")) - nxt
        passed = max(passed, 0)
        bonus = passed if (bonus_mode == "all" or first) else 0
        tokens.extend(range(nxt, nxt + passed))
        nxt += passed
        counter += bonus - 1
        if record:
            flights.append(Flight(pos, end, bonus, counter))
        pos = end
        first = False
        if pos >= s.T:
            return Model2Result(True, pos, tuple(flights))
        if counter <= 0:
            return Model2Result(False, pos, tuple(flights))
        if tok_head < len(tokens):
            length = float(lengths[tokens[tok_head]])
            tok_head += 1
        else:
            # only reachable in first_flight mode: more chances than passed seeds
            length = float(d.sample(_as_generator(rng), 1)[0])
    raise RuntimeError("flight limit exceeded")


# --- critical intensity estimation -------------------------------------------------


@dataclass(frozen=True)
class LambdaCEstimate:
    estimate: float
    ci: tuple[float, float]
    grid: tuple[float, ...]
    decay_exponents: tuple[float, ...]
    span_rates: tuple[tuple[float, ...], ...]
    windows: tuple[float, ...]


def _reach_samples(lam, d, T, replicas, source: RandomSource) -> np.ndarray:
    out = np.empty(replicas)
    for r in range(replicas):
        gen = source.child(f"{lam:.17g}/{r}").generator()
        out[r] = _lazy_reach(lam, d, T, gen)
    return out


def _lazy_reach(lam, d, T, gen, chunk: int = 4096) -> float:
    """First-cluster reach, drawing seeds in chunks until a gap or ``T``."""
    if lam <= 0:
        return 0.0
    pos = gen.exponential(1.0 / lam)
    if pos > T:
        return 0.0
    reach = pos + d.sample(gen, 1)[0]
    while True:
        gaps = gen.exponential(1.0 / lam, chunk)
        seeds = pos + np.cumsum(gaps)
        lengths = d.sample(gen, chunk)
        inside = seeds <= T
        seeds, lengths = seeds[inside], lengths[inside]
        if len(seeds) == 0:
            return float(reach)
        ends = np.maximum(np.maximum.accumulate(seeds + lengths), reach)
        prev = np.concatenate([[reach], ends[:-1]])
        gap = np.flatnonzero(seeds >= prev)
        if len(gap):
            return float(prev[gap[0]])
        reach = ends[-1]
        pos = seeds[-1]
        if not inside.all() or reach >= T:
            return float(reach)


def decay_exponent(reaches: np.ndarray, windows: Sequence[float], min_count: int = 10) -> float:
    """Local slope of ``-log P(reach >= T)`` against ``log T``.

    Uses the two largest windows reached by at least ``min_count`` replicas,
    the closest the data gets to the large-``T`` regime; NaN when fewer than
    two windows qualify.
    """
    w = np.asarray(windows, dtype=float)
    counts = np.array([np.count_nonzero(reaches >= t) for t in w])
    ok = np.flatnonzero(counts >= min_count)
    if len(ok) < 2:
        return math.nan
    a, b = ok[-2], ok[-1]
    return float(-(math.log(counts[b]) - math.log(counts[a])) / (math.log(w[b]) - math.log(w[a])))


def _fit_root(grid, slopes, min_slope) -> float:
    """Zero of a robust (Theil-Sen) line through the clearly decaying points."""
    from scipy.stats import theilslopes

    g = np.asarray(grid)
    s = np.asarray(slopes)
    sel = np.isfinite(s) & (s > min_slope)
    if sel.sum() < 3:
        return math.nan
    a, b, _, _ = theilslopes(s[sel], g[sel])
    if a >= 0:
        return math.nan
    return float(-b / a)


def estimate_lambda_c(d: DistributionDescriptor, windows: Sequence[float], replicas: int, rng,
                      grid: Sequence[float] | None = None, min_slope: float = 0.1,
                      refine: int = 4, bootstrap: int = 200) -> LambdaCEstimate:
    """Estimate the critical intensity of model 1 from finite windows.

    Below the threshold the chance that the first cluster spans ``[0, T]``
    decays like a power of ``T`` whose exponent shrinks linearly to zero at the
    threshold; above it the chance stays positive.  The exponent is measured
    for every intensity on a grid, the line through the clearly decaying
    points is extrapolated to zero, and the grid is then refined around the
    first estimate.  The interval is a replica bootstrap.
    """
    tc = d.tail_class
    if tc is not None and tc.name != "log_like":
        critical_intensity(d)  # raises with the reason
    if replicas < 2:
        raise ValueError("need at least 2 replicas")
    windows = tuple(sorted(float(w) for w in windows))
    if len(windows) < 2:
        raise ValueError("need at least two windows")
    source = rng if isinstance(rng, RandomSource) else RandomSource(int(rng), "lambda-c")
    if grid is None:
        typical = float(np.median(d.sample(source.child("scale").generator(), 2001)))
        grid = tuple(float(g) / typical for g in np.geomspace(0.2, 4.0, 17))
    grid = list(grid)
    reaches = {lam: _reach_samples(lam, d, windows[-1], replicas, source) for lam in grid}

    def estimate_from(rs):
        lams = sorted(rs)
        return _fit_root(lams, [decay_exponent(rs[l], windows) for l in lams], min_slope)

    est = estimate_from(reaches)
    if not math.isfinite(est):
        raise NoCriticalPoint("spanning probability shows no threshold on the grid")
    lo, hi = min(grid), max(grid)
    for lam in np.linspace(0.5 * est, 0.9 * est, refine):
        lam = float(lam)
        if lo < lam < hi and lam not in reaches:
            reaches[lam] = _reach_samples(lam, d, windows[-1], replicas, source)
    est = estimate_from(reaches)
    boot_gen = source.child("bootstrap").generator()
    boots = []
    for _ in range(bootstrap):
        rs = {l: r[boot_gen.integers(0, len(r), len(r))] for l, r in reaches.items()}
        b = estimate_from(rs)
        if math.isfinite(b):
            boots.append(b)
    ci = (float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots else (math.nan, math.nan)
    lams = sorted(reaches)
    return LambdaCEstimate(est, ci, tuple(lams), tuple(decay_exponent(reaches[l], windows) for l in lams),
                           tuple(tuple(float(np.mean(reaches[l] >= w)) for w in windows) for l in lams), windows)
