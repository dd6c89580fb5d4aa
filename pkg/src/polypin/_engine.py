"""Event-driven annihilating particle system behind every broken-line build.

Particles move with velocity +1 (``v = t - x`` fixed) or -1 (``u = t + x``
fixed), so a collision between a +1 particle below and a -1 particle above is
located at the light-cone point ``(u_upper, v_lower)`` without any slope
arithmetic.  Every vertex produced is therefore an exact copy of input
coordinates, which makes line sets from different computation paths
comparable with ``==``.

Superior particles carry a type (+1 or -1, the initial velocity) and obey:

* superior vs regular: the superior takes the regular particle's velocity and
  carrier, the regular particle dies;
* superior vs superior of the same type: velocities are exchanged;
* superior vs superior of different types: both die.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass

from .geometry import Domain

# piece = (velocity, carrier, lo, hi); carrier is v for +1 and u for -1, the
# parameter along the piece is u for +1 and v for -1.

EXIT, COLLIDE = 0, 1

ORIGIN_INTERIOR = "interior"
ORIGIN_BOUNDARY = ("boundary-left-up", "boundary-left-down", "boundary-nw", "boundary-sw")


@dataclass
class SuperiorTrace:
    owner: int
    sign: int
    origin: tuple[float, float]  # light-cone (u, v)
    pieces: list  # [(velocity, carrier, lo, hi)] in time order
    end_kind: str = ""
    end: tuple[float, float] | None = None
    partner: int | None = None  # superior index met in a +- annihilation


class ParticleSystem:
    """One sweep over a fixed set of births.

    ``births`` is a list of ``(t, x, u, v, mode, owner)`` tuples where mode is
    ``"pair"`` (two regular particles), ``"superior"`` (two superior
    particles, ``owner`` names the added point), ``+1`` or ``-1`` (a single
    regular boundary particle).
    """

    def __init__(self, domain: Domain):
        self.domain = domain
        self.pieces: list[tuple[int, float, float, float]] = []
        self.piece_owner: list[int] = []  # -1 regular, else superior index
        self.superiors: list[SuperiorTrace] = []
        self.collisions: list[tuple[float, float]] = []

    def run(self, births) -> "ParticleSystem":
        d = self.domain
        t1 = d.t1
        u_hi, v_hi = d.u_hi, d.v_hi
        two_t1 = 2 * t1

        vel: list[int] = []
        coord: list[float] = []
        su: list[float] = []  # segment start u
        sv: list[float] = []  # segment start v
        alive: list[bool] = []
        ver: list[int] = []
        sup: list[int] = []
        above: list[int] = []
        below: list[int] = []
        order: list[int] = []
        heap: list = []
        push = heapq.heappush
        pop = heapq.heappop
        pieces = self.pieces
        piece_owner = self.piece_owner
        superiors = self.superiors
        collisions = self.collisions
        seq = 0

        def new_particle(velocity, c, u, v, s):
            pid = len(vel)
            vel.append(velocity)
            coord.append(c)
            su.append(u)
            sv.append(v)
            alive.append(True)
            ver.append(0)
            sup.append(s)
            above.append(-1)
            below.append(-1)
            return pid

        def schedule_exit(pid):
            nonlocal seq
            if vel[pid] > 0:
                c = coord[pid]
                eu = u_hi if u_hi + c <= two_t1 else two_t1 - c
                ev = c
            else:
                c = coord[pid]
                ev = v_hi if c + v_hi <= two_t1 else two_t1 - c
                eu = c
            seq += 1
            push(heap, ((eu + ev) * 0.5, (eu - ev) * 0.5, EXIT, seq, pid, ver[pid], eu, ev))

        def schedule_pair(lo, hi):
            nonlocal seq
            if lo < 0 or hi < 0 or vel[lo] < 0 or vel[hi] > 0:
                return
            cu, cv = coord[hi], coord[lo]
            tc = (cu + cv) * 0.5
            if tc >= t1:
                return
            seq += 1
            push(heap, (tc, (cu - cv) * 0.5, COLLIDE, seq, lo, ver[lo], hi, ver[hi]))

        def close(pid, eu, ev):
            if vel[pid] > 0:
                piece = (1, coord[pid], su[pid], eu)
            else:
                piece = (-1, coord[pid], sv[pid], ev)
            if piece[2] != piece[3]:
                pieces.append(piece)
                piece_owner.append(sup[pid])
                if sup[pid] >= 0:
                    superiors[sup[pid]].pieces.append(piece)

        def unlink(pid):
            lo, hi = below[pid], above[pid]
            if lo >= 0:
                above[lo] = hi
            if hi >= 0:
                below[hi] = lo
            order.remove(pid)
            return lo, hi

        def kill_superior(pid, kind, eu, ev, partner=None):
            tr = superiors[sup[pid]]
            tr.end_kind = kind
            tr.end = (eu, ev)
            tr.partner = partner

        def pos_at(t):
            def key(pid):
                return t - coord[pid] if vel[pid] > 0 else coord[pid] - t
            return key

        births = sorted(births, key=lambda b: (b[0], b[1]))
        nb = len(births)
        bi = 0
        while bi < nb or heap:
            if bi < nb and (not heap or (births[bi][0], births[bi][1]) <= (heap[0][0], heap[0][1])):
                t, x, u, v, mode, owner = births[bi]
                bi += 1
                idx = bisect_left(order, x, key=pos_at(t))
                lo_n = order[idx - 1] if idx > 0 else -1
                hi_n = order[idx] if idx < len(order) else -1
                if mode == "pair" or mode == "superior":
                    if mode == "superior":
                        s_minus = len(superiors)
                        superiors.append(SuperiorTrace(owner, -1, (u, v), []))
                        superiors.append(SuperiorTrace(owner, 1, (u, v), []))
                        s_plus = s_minus + 1
                    else:
                        s_minus = s_plus = -1
                    a = new_particle(-1, u, u, v, s_minus)
                    b = new_particle(1, v, u, v, s_plus)
                    order[idx:idx] = [a, b]
                    below[a], above[a] = lo_n, b
                    below[b], above[b] = a, hi_n
                    if lo_n >= 0:
                        above[lo_n] = a
                    if hi_n >= 0:
                        below[hi_n] = b
                    schedule_exit(a)
                    schedule_exit(b)
                    schedule_pair(lo_n, a)
                    schedule_pair(b, hi_n)
                else:
                    velocity = int(mode)
                    a = new_particle(velocity, v if velocity > 0 else u, u, v, -1)
                    order.insert(idx, a)
                    below[a], above[a] = lo_n, hi_n
                    if lo_n >= 0:
                        above[lo_n] = a
                    if hi_n >= 0:
                        below[hi_n] = a
                    schedule_exit(a)
                    schedule_pair(lo_n, a)
                    schedule_pair(a, hi_n)
                continue

            ev = pop(heap)
            if ev[2] == EXIT:
                _, _, _, _, pid, pv, eu, evv = ev
                if not alive[pid] or ver[pid] != pv:
                    continue
                close(pid, eu, evv)
                alive[pid] = False
                if sup[pid] >= 0:
                    kill_superior(pid, "exited", eu, evv)
                lo, hi = unlink(pid)
                schedule_pair(lo, hi)
                continue

            _, _, _, _, lo, vlo, hi, vhi = ev
            if not (alive[lo] and alive[hi] and ver[lo] == vlo and ver[hi] == vhi and above[lo] == hi):
                continue
            cu, cv = coord[hi], coord[lo]
            slo, shi = sup[lo], sup[hi]
            if slo < 0 and shi < 0:
                close(lo, cu, cv)
                close(hi, cu, cv)
                alive[lo] = alive[hi] = False
                collisions.append((cu, cv))
                b = below[lo]
                unlink(lo)
                a = above[hi]
                unlink(hi)
                schedule_pair(b, a)
            elif slo >= 0 and shi >= 0:
                close(lo, cu, cv)
                close(hi, cu, cv)
                if superiors[slo].sign != superiors[shi].sign:
                    alive[lo] = alive[hi] = False
                    kill_superior(lo, "annihilated", cu, cv, shi)
                    kill_superior(hi, "annihilated", cu, cv, slo)
                    b = below[lo]
                    unlink(lo)
                    a = above[hi]
                    unlink(hi)
                    schedule_pair(b, a)
                else:
                    vel[lo], coord[lo] = -1, cu
                    vel[hi], coord[hi] = 1, cv
                    for p in (lo, hi):
                        su[p], sv[p] = cu, cv
                        ver[p] += 1
                        schedule_exit(p)
                    schedule_pair(below[lo], lo)
                    schedule_pair(hi, above[hi])
            else:
                s, r = (lo, hi) if slo >= 0 else (hi, lo)
                close(s, cu, cv)
                close(r, cu, cv)
                alive[r] = False
                unlink(r)
                vel[s], coord[s] = vel[r], coord[r]
                su[s], sv[s] = cu, cv
                ver[s] += 1
                schedule_exit(s)
                if vel[s] > 0:
                    schedule_pair(s, above[s])
                else:
                    schedule_pair(below[s], s)
        return self
