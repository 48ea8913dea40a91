"""Slotted Monte-Carlo simulator of saturated EDCA stations.

Time advances busy period by busy period.  After every busy period the
medium is idle for the smallest AIFS, then backoff slots 1, 2, ... follow.
A class takes part from slot ``d_i + 1`` on.  At the start of each slot it
takes part in, a station transmits if its counter is zero and otherwise
decrements it, so the decrement is spent even when somebody else turns the
slot busy.  The first slot holding a transmission ends the idle run: one
transmitter is a success, several are a collision.

Rather than stepping slot by slot, each class keeps a running count of the
slots it has taken part in (``offset``) and every station stores the offset
value at which its counter reaches zero (``target``).  The next busy slot is
then the minimum over class heaps.
"""
from __future__ import annotations

import heapq
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .cycle import ClassMetrics, PerformanceReport
from .model import AccessMode, Scenario, exchange_durations

US_PER_S = 1e6


@dataclass(slots=True)
class StationState:
    cls: int            # class position in Scenario.classes
    target: int         # class offset at which the backoff counter hits zero
    stage: int = 1      # attempt number of the head-of-line packet, 1..retry_limit
    hol_start: float = 0.0
    successes: int = 0
    collisions: int = 0
    drops: int = 0


@dataclass
class SimTrace:
    """Optional instrumentation filled in by :func:`simulate`."""

    transmissions: list = field(default_factory=list)  # (class position, slot n)
    draws: list = field(default_factory=list)          # (class position, window, value)


@dataclass(frozen=True)
class ClassSimStats:
    index: int
    population: int
    successes: int
    attempts: int
    collisions: int
    drops: int
    throughput: float
    service_time: float
    drop_prob: float
    p_c: float
    tau: float           # attempts per backoff slot a station took part in
    t_suc: float         # per-cycle airtime components, us
    t_col: float
    t_idle: float


@dataclass(frozen=True)
class SimStats:
    classes: tuple[ClassSimStats, ...]
    seed: int
    sim_duration: float
    warmup: float
    measured_duration: float
    idle_time: float
    success_time: float
    collision_time: float

    def to_report(self) -> PerformanceReport:
        return PerformanceReport(
            tuple(ClassMetrics(c.index, c.population, c.throughput, c.service_time,
                               c.drop_prob, c.p_c, c.tau, c.t_suc, c.t_col, c.t_idle)
                  for c in self.classes),
            {"source": "simulated", "seed": self.seed,
             "duration_us": self.measured_duration})


def _ratio(a: float, b: float) -> float:
    return a / b if b else 0.0


def simulate(s: Scenario, seed: int, sim_duration: float, warmup: float | None = None,
             immediate_access: bool = True, trace: SimTrace | None = None) -> SimStats:
    """Run one saturated EDCA simulation.

    ``sim_duration`` and ``warmup`` are in microseconds; warm-up defaults to
    5% of the duration and its statistics are discarded.  With
    ``immediate_access=False`` a station whose counter is already zero when
    its AIFS completes waits one more slot before transmitting.
    """
    if warmup is None:
        warmup = 0.05 * sim_duration
    if not sim_duration > warmup >= 0:
        raise ValueError("need sim_duration > warmup >= 0")

    rng = random.Random(seed)
    dur = exchange_durations(s)
    phy = s.phy
    classes = s.classes
    k = len(classes)
    d = s.d
    live = [p for p in s.populated]
    aifs_min = phy.aifs(min(classes[p].aifsn for p in live))
    # busy airtime before the next slot 1: exchange + smallest AIFS
    t_success = [dur.t_success[p] - dur.aifs[p] + aifs_min for p in range(k)]
    if s.access_mode is AccessMode.BASIC:
        t_collision = [dur.t_payload[p] + dur.ack_timeout + aifs_min for p in range(k)]
    else:
        t_collision = [dur.t_rts + dur.cts_timeout + aifs_min for p in range(k)]
    windows = [classes[p].windows() for p in range(k)]
    retry = [c.retry_limit for c in classes]
    first_slot = [d[p] + 1 if immediate_access else d[p] + 2 for p in range(k)]

    stations: list[StationState] = []
    heaps: list[list[tuple[int, int]]] = [[] for _ in range(k)]
    offset = [0] * k

    def draw(p: int, stage: int) -> int:
        w = windows[p][stage - 1]
        v = rng.randint(0, w)
        if trace is not None:
            trace.draws.append((p, w, v))
        return v

    for p in live:
        for _ in range(classes[p].population):
            sid = len(stations)
            st = StationState(cls=p, target=draw(p, 1))
            stations.append(st)
            heaps[p].append((st.target, sid))
        heapq.heapify(heaps[p])

    def tx_slot(p: int, target: int) -> int:
        return max(d[p] + max(target - offset[p], 0) + 1, first_slot[p])

    t = 0.0
    t0 = None
    idle_time = success_time = collision_time = 0.0
    attempts = [0] * k
    opportunities = [0] * k
    svc_sum = [0.0] * k
    svc_n = [0] * k
    base = [(0, 0, 0)] * len(stations)  # per-station counters at warm-up end

    while t < sim_duration:
        if t0 is None and t >= warmup:
            t0 = t
            idle_time = success_time = collision_time = 0.0
            attempts = [0] * k
            opportunities = [0] * k
            svc_sum = [0.0] * k
            svc_n = [0] * k
            base = [(x.successes, x.collisions, x.drops) for x in stations]

        n = min(tx_slot(p, heaps[p][0][0]) for p in live)
        tx: list[int] = []
        for p in live:
            h = heaps[p]
            while h and tx_slot(p, h[0][0]) == n:
                tx.append(heapq.heappop(h)[1])
        for p in live:
            if n > d[p]:
                offset[p] += n - d[p]
                opportunities[p] += (n - d[p]) * classes[p].population

        idle = (n - 1) * phy.t_slot
        t += idle
        idle_time += idle
        if len(tx) == 1:
            st = stations[tx[0]]
            p = st.cls
            busy = t_success[p]
            t += busy
            success_time += busy
            attempts[p] += 1
            st.successes += 1
            svc_sum[p] += t - st.hol_start
            svc_n[p] += 1
            st.hol_start = t
            st.stage = 1
        else:
            busy = max(t_collision[stations[i].cls] for i in tx)
            t += busy
            collision_time += busy
            for i in tx:
                st = stations[i]
                p = st.cls
                attempts[p] += 1
                st.collisions += 1
                st.stage += 1
                if st.stage > retry[p]:
                    st.drops += 1
                    svc_sum[p] += t - st.hol_start
                    svc_n[p] += 1
                    st.hol_start = t
                    st.stage = 1
        for i in tx:
            st = stations[i]
            p = st.cls
            st.target = offset[p] + draw(p, st.stage)
            heapq.heappush(heaps[p], (st.target, i))
            if trace is not None:
                trace.transmissions.append((p, n))

    if t0 is None:
        t0 = t
    measured = t - t0

    rows = []
    for p, c in enumerate(classes):
        mine = [i for i, x in enumerate(stations) if x.cls == p]
        succ = sum(stations[i].successes - base[i][0] for i in mine)
        coll = sum(stations[i].collisions - base[i][1] for i in mine)
        drops = sum(stations[i].drops - base[i][2] for i in mine)
        cycles = _ratio(succ, c.population)
        rows.append(ClassSimStats(
            index=c.index,
            population=c.population,
            successes=succ,
            attempts=attempts[p],
            collisions=coll,
            drops=drops,
            throughput=_ratio(succ * dur.t_payload[p], measured),
            service_time=_ratio(svc_sum[p], svc_n[p]),
            drop_prob=_ratio(drops, drops + succ),
            p_c=_ratio(coll, attempts[p]),
            tau=_ratio(attempts[p], opportunities[p]),
            t_suc=_ratio(success_time, cycles),
            t_col=_ratio(collision_time, cycles),
            t_idle=_ratio(idle_time, cycles),
        ))
    return SimStats(tuple(rows), seed=seed, sim_duration=sim_duration, warmup=warmup,
                    measured_duration=measured, idle_time=idle_time,
                    success_time=success_time, collision_time=collision_time)


def measure_conditional_collision(s: Scenario, seed: int, duration: float) -> np.ndarray:
    """Fraction of transmission attempts that collided, per class position."""
    run = simulate(s, seed, duration)
    return np.array([c.p_c for c in run.classes])


METRICS = ("throughput", "service_time", "drop_prob", "p_c", "tau", "t_suc", "t_col", "t_idle")


@dataclass(frozen=True)
class SimSummary:
    """Across-seed means and 95% confidence half-widths (Student t)."""

    runs: tuple[SimStats, ...]
    mean: PerformanceReport
    ci: tuple[dict, ...]   # per class position: metric -> half-width (nan for one seed)

    @property
    def seeds(self) -> tuple[int, ...]:
        return tuple(r.seed for r in self.runs)


def summarize(runs) -> SimSummary:
    runs = tuple(runs)
    if not runs:
        raise ValueError("no runs to summarize")
    k = len(runs[0].classes)
    q = stats.t.ppf(0.975, len(runs) - 1) if len(runs) > 1 else math.nan
    means, cis = [], []
    for p in range(k):
        vals = {m: np.array([getattr(r.classes[p], m) for r in runs]) for m in METRICS}
        first = runs[0].classes[p]
        means.append(ClassMetrics(first.index, first.population,
                                  *(float(vals[m].mean()) for m in METRICS)))
        if len(runs) > 1:
            cis.append({m: float(q * vals[m].std(ddof=1) / math.sqrt(len(runs)))
                        for m in METRICS})
        else:
            cis.append({m: math.nan for m in METRICS})
    report = PerformanceReport(tuple(means), {
        "source": "simulated", "seeds": tuple(r.seed for r in runs),
        "duration_us": runs[0].sim_duration})
    return SimSummary(runs, report, tuple(cis))


def _run(args):
    s, seed, duration, warmup, immediate = args
    return simulate(s, seed, duration, warmup, immediate_access=immediate)


def simulate_seeds(s: Scenario, seeds, sim_duration: float, warmup: float | None = None,
                   workers: int = 1, immediate_access: bool = True) -> SimSummary:
    """Independent runs, one per seed, merged into a SimSummary (seed order kept)."""
    jobs = [(s, int(seed), sim_duration, warmup, immediate_access) for seed in seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run, jobs))
    else:
        runs = [_run(j) for j in jobs]
    return summarize(runs)
