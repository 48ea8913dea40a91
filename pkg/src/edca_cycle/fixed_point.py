"""Fixed-point solution for per-class transmission and collision probabilities."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AccessCategoryClass, Scenario
from .zones import (SlotOccupancy, _as_tau, geometric_occupancy, idle_product,
                    slot_occupancy)


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    max_iterations: int = 10000
    damping: float = 0.5
    initial_tau: tuple[float, ...] | None = None  # default: 2 / (cw_min + 2)

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class FixedPointSolution:
    tau: np.ndarray
    p_c: np.ndarray
    occupancy: SlotOccupancy
    mean_backoff: np.ndarray   # slots
    residual: float
    iterations: int


def p_c_given_zone(s: Scenario, i: int, x: int, tau) -> float:
    """Collision probability of class ``i`` transmitting after idle AIFS of zone ``x``."""
    tau = _as_tau(s, tau)
    d = s.d
    if d[x] < d[i]:
        raise ValueError(f"zone {x} opens before class {i} may contend")
    if s.classes[i].population < 1:
        raise ValueError(f"class {i} has no stations")
    idle = 1.0
    for p in s.populated:
        if d[p] <= d[x]:
            idle *= (1.0 - tau[p]) ** s.classes[p].population
    return 1.0 - idle / (1.0 - tau[i])


def _p_c_average(s: Scenario, b: np.ndarray, idle: np.ndarray, tau: np.ndarray) -> np.ndarray:
    # slot n's zone opens exactly the contender set of slot n, so the zone
    # probability is 1 - idle[n] / (1 - tau_i)
    out = np.zeros(len(s.classes))
    for p in s.populated:
        lo = s.d[p]
        w = b[lo:]
        zone = 1.0 - idle[lo:] / (1.0 - tau[p])
        out[p] = np.dot(w, zone) / w.sum()
    # rounding can leave -1e-17 when the class is alone on the channel
    return np.maximum(out, 0.0)


def p_c_average(s: Scenario, i: int, occupancy: SlotOccupancy, tau) -> float:
    """Occupancy-weighted collision probability of class ``i`` over the slots it reaches."""
    if s.classes[i].population < 1:
        raise ValueError(f"class {i} has no stations")
    b = occupancy.b
    lo = s.d[i]
    den = b[lo:].sum()
    if den <= 0:
        raise ValueError(f"class {i} never reaches a backoff slot")
    num = sum(p_c_given_zone(s, i, occupancy.zone_of[n - 1], tau) * b[n - 1]
              for n in range(lo + 1, occupancy.w_min + 1))
    return float(num / den)


def mean_backoff(ac: AccessCategoryClass, p_c: float) -> float:
    """Expected backoff slots drawn before one transmission attempt."""
    if not 0 <= p_c < 1:
        raise ValueError("p_c must lie in [0, 1)")
    r = ac.retry_limit
    acc = sum(p_c ** (k - 1) * (1 - p_c) * w / 2 for k, w in enumerate(ac.windows(), 1))
    return acc / (1 - p_c ** r)


def _mean_backoffs(s: Scenario, p_c: np.ndarray) -> np.ndarray:
    return np.array([mean_backoff(c, p_c[p]) if c.population > 0 else 0.0
                     for p, c in enumerate(s.classes)])


def initial_tau(s: Scenario) -> np.ndarray:
    return np.array([2.0 / (c.cw_min + 2) if c.population > 0 else 0.0
                     for c in s.classes])


def solve(s: Scenario, cfg: SolverConfig | None = None) -> FixedPointSolution:
    """Damped iteration tau -> occupancy -> p_c -> backoff -> tau until max |dtau| <= tol.

    Raises ConvergenceError when the tolerance is not met within
    ``cfg.max_iterations`` updates.
    """
    cfg = cfg or SolverConfig()
    populated = np.array([c.population > 0 for c in s.classes])
    tau = initial_tau(s) if cfg.initial_tau is None else np.asarray(cfg.initial_tau, float)
    tau = np.where(populated, tau, 0.0)
    _as_tau(s, tau)

    residual = np.inf
    for it in range(1, cfg.max_iterations + 1):
        idle = idle_product(s, tau)
        b = geometric_occupancy(1.0 - idle)
        p_c = _p_c_average(s, b, idle, tau)
        ebo = _mean_backoffs(s, p_c)
        tau_new = np.where(populated, 1.0 / (ebo + 1.0), 0.0)
        residual = float(np.max(np.abs(tau_new - tau)))
        if residual <= cfg.tolerance:
            tau = tau_new
            break
        tau = cfg.damping * tau_new + (1 - cfg.damping) * tau
    else:
        raise ConvergenceError(
            f"no convergence after {cfg.max_iterations} iterations "
            f"(residual {residual:.3e} > {cfg.tolerance:.1e})", residual, cfg.max_iterations)

    occupancy = slot_occupancy(s, tau)
    p_c = _p_c_average(s, occupancy.b, idle_product(s, tau), tau)
    return FixedPointSolution(tau=tau, p_c=p_c, occupancy=occupancy,
                              mean_backoff=_mean_backoffs(s, p_c),
                              residual=residual, iterations=it)

