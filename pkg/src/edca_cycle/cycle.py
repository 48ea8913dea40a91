"""Per-class cycle-time decomposition and the derived performance measures.

The cycle of a tagged class-i station is the interval between two of its
successful transmissions.  Its mean length splits into successful exchanges,
collisions and backoff idle slots; throughput, service time and drop
probability follow from it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fixed_point import FixedPointSolution, SolverConfig, solve
from .model import ExchangeDurations, Scenario, exchange_durations
from .zones import SlotOccupancy, _as_tau, contender_mask, idle_product


class ModelError(ArithmeticError):
    """The analysis hit a degenerate point (e.g. a class that never succeeds)."""


def _p_s_matrix(s: Scenario, tau: np.ndarray) -> np.ndarray:
    """(w_min, K) matrix of success probabilities per slot and class."""
    n_i = np.array([c.population for c in s.classes])
    idle = idle_product(s, tau)
    mask = contender_mask(s)
    return np.where(mask, (n_i * tau / (1.0 - tau))[None, :] * idle[:, None], 0.0)


def p_s_slot(s: Scenario, i: int, n: int, tau) -> float:
    """Probability that exactly one class-i station (and nobody else) transmits in slot n."""
    tau = _as_tau(s, tau)
    if not 1 <= n <= s.w_min:
        raise IndexError(f"slot {n} outside 1..{s.w_min}")
    return float(_p_s_matrix(s, tau)[n - 1, i])


def gamma(s: Scenario, occupancy: SlotOccupancy, tau) -> np.ndarray:
    """Probability that a successful frame belongs to one given station of each class."""
    tau = _as_tau(s, tau)
    ps = _p_s_matrix(s, tau)
    total = ps.sum(axis=1)
    share = np.divide(ps, total[:, None], out=np.zeros_like(ps), where=total[:, None] > 0)
    n_i = np.array([max(c.population, 1) for c in s.classes])
    return (occupancy.b @ share) / n_i


def st_matrix(s: Scenario, g) -> np.ndarray:
    """Mean successes of class j (row) during one class-i cycle (column)."""
    g = np.asarray(g, dtype=float)
    n_i = np.array([c.population for c in s.classes], dtype=float)
    st = np.zeros((len(g), len(g)))
    for i in s.populated:
        if g[i] <= 0:
            raise ModelError(f"class {s.classes[i].index} never transmits successfully")
        st[:, i] = n_i * g / g[i]
    return st


def collision_size(s: Scenario, occupancy: SlotOccupancy, tau) -> tuple[np.ndarray, float | None]:
    """Mean number of colliding stations per slot, and its occupancy average.

    Slots where fewer than two stations contend have no collision size; they
    are NaN in the per-slot vector and left out of the average (their weight
    is renormalized away).  The average is None when no slot allows a
    collision.
    """
    tau = _as_tau(s, tau)
    mask = contender_mask(s)
    n_i = np.array([c.population for c in s.classes])
    ps = _p_s_matrix(s, tau)
    idle = idle_product(s, tau)
    possible = (mask * n_i).sum(axis=1) >= 2
    num = (np.where(mask, n_i * tau, 0.0) - ps).sum(axis=1)
    den = 1.0 - idle - ps.sum(axis=1)
    valid = possible & (den > 0)
    per_slot = np.full(s.w_min, np.nan)
    per_slot[valid] = num[valid] / den[valid]
    if not valid.any():
        return per_slot, None
    w = occupancy.b[valid]
    return per_slot, float(np.dot(w, per_slot[valid]) / w.sum())


@dataclass(frozen=True)
class CycleBreakdown:
    gamma: np.ndarray
    mean_intervening: np.ndarray   # E[Q_i], successes of others between two own ones
    st: np.ndarray
    ct: np.ndarray
    t_suc: np.ndarray
    t_col: np.ndarray
    t_idle: np.ndarray
    n_c_slot: np.ndarray
    n_c: float | None

    @property
    def t_cyc(self) -> np.ndarray:
        return self.t_suc + self.t_col + self.t_idle


def cycle_components(s: Scenario, solution: FixedPointSolution,
                     durations: ExchangeDurations) -> CycleBreakdown:
    tau, p_c = solution.tau, solution.p_c
    g = gamma(s, solution.occupancy, tau)
    st = st_matrix(s, g)
    ct = (p_c / (1.0 - p_c))[:, None] * st
    n_c_slot, n_c = collision_size(s, solution.occupancy, tau)
    t_s = np.asarray(durations.t_success)
    t_c = np.asarray(durations.t_collision)
    t_suc = t_s @ st
    col_air = t_c @ ct
    if n_c is None:
        if np.any(col_air > 0):
            raise ModelError("collision airtime without any slot that allows a collision")
        t_col = np.zeros_like(col_air)
    else:
        t_col = col_air / n_c
    n_i = np.array([max(c.population, 1) for c in s.classes])
    t_idle = solution.mean_backoff * (np.diag(ct) / n_i + 1.0) * s.phy.t_slot
    with np.errstate(divide="ignore"):
        eq = np.where(g > 0, (1.0 - g) / np.where(g > 0, g, 1.0), 0.0)
    return CycleBreakdown(gamma=g, mean_intervening=eq, st=st, ct=ct, t_suc=t_suc,
                          t_col=t_col, t_idle=t_idle, n_c_slot=n_c_slot, n_c=n_c)


@dataclass(frozen=True)
class ClassMetrics:
    index: int
    population: int
    throughput: float
    service_time: float
    drop_prob: float
    p_c: float
    tau: float
    t_suc: float
    t_col: float
    t_idle: float

    @property
    def t_cyc(self) -> float:
        return self.t_suc + self.t_col + self.t_idle


@dataclass(frozen=True)
class PerformanceReport:
    """Per-class results.  ``provenance`` says where they came from."""

    classes: tuple[ClassMetrics, ...]
    provenance: dict = field(default_factory=dict)

    @property
    def total_throughput(self) -> float:
        return sum(c.throughput for c in self.classes)

    def by_index(self, index: int) -> ClassMetrics:
        for c in self.classes:
            if c.index == index:
                return c
        raise KeyError(index)


def performance(s: Scenario, breakdown: CycleBreakdown, solution: FixedPointSolution,
                durations: ExchangeDurations) -> PerformanceReport:
    rows = []
    t_cyc = breakdown.t_cyc
    for p, c in enumerate(s.classes):
        if c.population == 0:
            # no stations: nothing is transmitted and no cycle exists
            rows.append(ClassMetrics(c.index, 0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0))
            continue
        p_drop = float(solution.p_c[p] ** c.retry_limit)
        rows.append(ClassMetrics(
            index=c.index,
            population=c.population,
            throughput=float(c.population * durations.t_payload[p] / t_cyc[p]),
            service_time=float((1.0 - p_drop) * t_cyc[p]),
            drop_prob=p_drop,
            p_c=float(solution.p_c[p]),
            tau=float(solution.tau[p]),
            t_suc=float(breakdown.t_suc[p]),
            t_col=float(breakdown.t_col[p]),
            t_idle=float(breakdown.t_idle[p]),
        ))
    return PerformanceReport(tuple(rows), {
        "source": "analytic",
        "iterations": solution.iterations,
        "residual": solution.residual,
    })


def analyze(s: Scenario, cfg: SolverConfig | None = None) -> PerformanceReport:
    """Solve the fixed point and derive the full report for ``s``."""
    solution = solve(s, cfg)
    durations = exchange_durations(s)
    breakdown = cycle_components(s, solution, durations)
    return performance(s, breakdown, solution, durations)
