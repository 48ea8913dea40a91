"""Contention zones and the long-run occupancy of post-busy backoff slots.

Slot ``n`` (1-based) is the n-th backoff slot after the smallest AIFS has
elapsed following a busy period.  A class contends in slot ``n`` once its own
AIFS has elapsed, i.e. when ``d_i <= n - 1``.  Classes are addressed by their
position in ``Scenario.classes``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Scenario


@dataclass(frozen=True)
class SlotOccupancy:
    b: np.ndarray          # b[n-1] = long-run share of slot n
    w_min: int
    zone_of: tuple[int, ...]  # zone_of[n-1] = zone label (class position) of slot n


def _check_slot(s: Scenario, n: int) -> None:
    if not 1 <= n <= s.w_min:
        raise IndexError(f"slot {n} outside 1..{s.w_min}")


def contenders_at_slot(s: Scenario, n: int) -> frozenset[int]:
    _check_slot(s, n)
    d = s.d
    return frozenset(p for p in s.populated if d[p] <= n - 1)


def zone_of_slot(s: Scenario, n: int) -> int:
    """Label of the zone slot ``n`` belongs to.

    The zone is named after the contender with the largest ``d``; on a tie
    the higher priority index wins.
    """
    contenders = contenders_at_slot(s, n)
    if not contenders:
        raise ValueError(f"no class contends in slot {n}")
    d = s.d
    return max(contenders, key=lambda p: (d[p], s.classes[p].index))


def contender_mask(s: Scenario) -> np.ndarray:
    """Boolean (w_min, K) matrix: mask[n-1, p] is True when class p contends in slot n."""
    n = np.arange(1, s.w_min + 1)[:, None]
    d = np.array(s.d)[None, :]
    pop = np.array([c.population > 0 for c in s.classes])[None, :]
    return (d <= n - 1) & pop


def _as_tau(s: Scenario, tau) -> np.ndarray:
    tau = np.asarray(tau, dtype=float)
    if tau.shape != (len(s.classes),):
        raise ValueError(f"tau must have one entry per class ({len(s.classes)})")
    if np.any(tau < 0) or np.any(tau >= 1):
        raise ValueError("tau must lie in [0, 1)")
    return tau


def idle_product(s: Scenario, tau) -> np.ndarray:
    """Probability that no contender transmits, for every slot 1..w_min."""
    tau = _as_tau(s, tau)
    n_i = np.array([c.population for c in s.classes])
    factors = np.where(contender_mask(s), (1.0 - tau) ** n_i, 1.0)
    return factors.prod(axis=1)


def p_tr_slot(s: Scenario, n: int, tau) -> float:
    """Probability of at least one transmission in slot ``n``."""
    _check_slot(s, n)
    return float(1.0 - idle_product(s, tau)[n - 1])


def geometric_occupancy(p_tr) -> np.ndarray:
    """Stationary distribution of the slot chain for per-slot busy probabilities.

    Slot n+1 is reached from slot n only when slot n stays idle; every busy
    slot, and the last slot, returns the chain to slot 1.
    """
    p_tr = np.asarray(p_tr, dtype=float)
    u = np.ones_like(p_tr)
    if len(u) > 1:
        u[1:] = np.cumprod(1.0 - p_tr[:-1])
    return u / u.sum()


def slot_occupancy(s: Scenario, tau) -> SlotOccupancy:
    b = geometric_occupancy(1.0 - idle_product(s, tau))
    zones = tuple(zone_of_slot(s, n) for n in range(1, s.w_min + 1))
    return SlotOccupancy(b=b, w_min=s.w_min, zone_of=zones)
