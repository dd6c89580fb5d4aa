"""Independent reference implementations used only by the tests.

Each one is deliberately simple (quadratic or exhaustive) and shares no code
with the package beyond the data types.
"""

from __future__ import annotations

import bisect
import math
import itertools

import numpy as np


def hammersley_sweep(u, v) -> int:
    """Number of particles of a Hammersley process swept in ``u``.

    Points are processed by increasing ``u``; each one moves the particle with
    the smallest position above its ``v`` down to ``v`` (or creates a particle).
    A plain sorted list with linear insertion, so quadratic in the worst case.
    """
    order = sorted(range(len(u)), key=lambda i: (u[i], -v[i]))
    particles: list[float] = []
    for i in order:
        k = bisect.bisect_left(particles, v[i])
        if k == len(particles):
            particles.append(v[i])
        else:
            particles[k] = v[i]
    return len(particles)


def dp_chain(u, v) -> int:
    """Quadratic dynamic programme for the longest chain in the product order."""
    n = len(u)
    order = sorted(range(n), key=lambda i: (u[i], v[i]))
    best = [1] * n
    for a in range(n):
        i = order[a]
        for b in range(a):
            j = order[b]
            if u[j] < u[i] and v[j] < v[i]:
                best[a] = max(best[a], best[b] + 1)
    return max(best, default=0)


def exhaustive_chains(points):
    """All maximum-length chains by brute force over subsets (tiny inputs only)."""
    pts = sorted(points, key=lambda p: (p.u, p.v))
    best, found = 0, []
    for r in range(len(pts), 0, -1):
        for combo in itertools.combinations(pts, r):
            if all(a.u < b.u and a.v < b.v for a, b in zip(combo, combo[1:])):
                found.append(list(combo))
        if found:
            best = r
            break
    return best, found


def model1_reach_bruteforce(seeds, lengths) -> float:
    """Right end of the cluster of the first stick, by pairwise connectivity.

    Sticks i < j are linked when ``x_j < x_i + S_i``; the cluster of stick 0 is
    grown by repeated passes over all pairs until nothing changes.
    """
    n = len(seeds)
    if n == 0:
        return 0.0
    in_cluster = np.zeros(n, dtype=bool)
    in_cluster[0] = True
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if not in_cluster[i]:
                continue
            for j in range(i + 1, n):
                if not in_cluster[j] and seeds[j] < seeds[i] + lengths[i]:
                    in_cluster[j] = True
                    changed = True
    idx = np.flatnonzero(in_cluster)
    return float(max(seeds[k] + lengths[k] for k in idx))


def resimulate_particles(points, domain, singles=()):
    """Annihilating particle system re-simulated with a linear scan per event.

    Independent of the package engine: no priority queue, no light-cone keys.
    At every step all adjacent pairs and all exits are re-examined and the
    earliest event is applied.  Returns ``(H, collisions)`` where ``H`` is the
    number of births minus the number of collisions and ``collisions`` are the
    ``(t, x)`` meeting points.  ``singles`` are ``(t, x, velocity)`` births of
    one particle each (boundary births).
    """
    births = sorted([(p.t, p.x, 0) for p in points] + [tuple(s) for s in singles])
    live: list[tuple[float, float, int]] = []  # (t_ref, x_ref, velocity)
    collisions = []
    t_now = domain.t0
    b = 0

    def pos(q, t):
        return q[1] + q[2] * (t - q[0])

    def exit_time(q):
        if q[2] > 0:  # t - x fixed, t + x grows
            te = (domain.u_hi + (q[0] - q[1])) / 2.0
        else:
            te = (domain.v_hi + (q[0] + q[1])) / 2.0
        return min(te, domain.t1)

    while True:
        live.sort(key=lambda q: (pos(q, t_now), q[2]))
        best = (births[b][0], "birth", None) if b < len(births) else (math.inf, "", None)
        for k, q in enumerate(live):
            te = exit_time(q)
            if te < best[0]:
                best = (te, "exit", k)
        for k in range(len(live) - 1):
            lo, hi = live[k], live[k + 1]
            if lo[2] > 0 and hi[2] < 0:
                tc = t_now + (pos(hi, t_now) - pos(lo, t_now)) / 2.0
                if tc < min(exit_time(lo), exit_time(hi)) and tc < best[0]:
                    best = (tc, "collide", k)
        t_ev, kind, k = best
        if kind == "":
            break
        t_now = t_ev
        if kind == "birth":
            t, x, vel = births[b]
            live.extend([(t, x, 1), (t, x, -1)] if vel == 0 else [(t, x, vel)])
            b += 1
        elif kind == "exit":
            live.pop(k)
        else:
            lo = live[k]
            collisions.append((t_now, pos(lo, t_now)))
            del live[k:k + 2]
    return len(births) - len(collisions), collisions
