"""Domain types, scenario validation and airtime arithmetic.

All durations are in microseconds and all rates in bits per microsecond
(so 54 Mbps is ``54.0``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Mapping


class ScenarioError(ValueError):
    """Raised when a scenario violates the EDCA parameter constraints."""


class AccessMode(str, Enum):
    BASIC = "basic"
    RTS_CTS = "rts_cts"


@dataclass(frozen=True)
class AccessCategoryClass:
    """Contention parameters of one access category and its station population.

    ``index`` follows the 802.11e convention: a larger index means a higher
    priority.  Every station runs exactly one AC.
    """

    index: int
    aifsn: int
    cw_min: int
    max_stage: int
    retry_limit: int
    population: int
    payload_bytes: int = 1000

    @property
    def cw_max(self) -> int:
        return 2 ** self.max_stage * (self.cw_min + 1) - 1

    def window(self, stage: int) -> int:
        """Contention window W for attempt ``stage`` (1-based), capped at cw_max."""
        if stage < 1:
            raise ValueError("stage is 1-based")
        return min(2 ** (stage - 1) * (self.cw_min + 1) - 1, self.cw_max)

    def windows(self) -> tuple[int, ...]:
        """Windows for every attempt 1..retry_limit."""
        return tuple(self.window(k) for k in range(1, self.retry_limit + 1))


@dataclass(frozen=True)
class PhyProfile:
    """PHY timing constants.  Defaults are 802.11g OFDM at 54/6 Mbps."""

    t_slot: float = 9.0
    sifs: float = 10.0
    data_rate: float = 54.0
    basic_rate: float = 6.0
    preamble_overhead: float = 20.0
    symbol_time: float = 4.0
    service_bits: int = 16
    tail_bits: int = 6
    mac_header_bytes: int = 28
    ack_bytes: int = 14
    rts_bytes: int = 20
    cts_bytes: int = 14
    delta: float = 0.0

    def __post_init__(self):
        for name in ("t_slot", "sifs", "preamble_overhead", "symbol_time", "delta"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be >= 0")
        for name in ("data_rate", "basic_rate"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"{name} must be > 0")
        if self.symbol_time <= 0:
            raise ScenarioError("symbol_time must be > 0")
        for name in ("service_bits", "tail_bits", "mac_header_bytes",
                     "ack_bytes", "rts_bytes", "cts_bytes"):
            if getattr(self, name) < 0:
                raise ScenarioError(f"{name} must be >= 0")

    def bits_per_symbol(self, rate: float) -> float:
        return rate * self.symbol_time

    def aifs(self, aifsn: int) -> float:
        return self.sifs + aifsn * self.t_slot


@dataclass(frozen=True)
class Scenario:
    """A validated set of AC classes sharing one channel.

    Construction normalizes the class order (ascending ``index``) and
    enforces the constraints the analysis relies on; an instance is always
    valid.  ``d`` and ``w_min`` are derived from the populated classes only.
    """

    classes: tuple[AccessCategoryClass, ...]
    phy: PhyProfile = field(default_factory=PhyProfile)
    access_mode: AccessMode = AccessMode.RTS_CTS

    def __post_init__(self):
        classes = tuple(sorted(self.classes, key=lambda c: c.index))
        object.__setattr__(self, "classes", classes)
        object.__setattr__(self, "access_mode", AccessMode(self.access_mode))
        _check(self)

    @property
    def populated(self) -> tuple[int, ...]:
        """Positions (in ``classes``) of classes with at least one station."""
        return tuple(p for p, c in enumerate(self.classes) if c.population > 0)

    @property
    def d(self) -> tuple[int, ...]:
        """Extra AIFS slots of each class beyond the smallest populated AIFSN."""
        base = min(self.classes[p].aifsn for p in self.populated)
        return tuple(c.aifsn - base for c in self.classes)

    @property
    def w_min(self) -> int:
        """Longest possible idle run between transmissions: min cw_max."""
        return min(self.classes[p].cw_max for p in self.populated)

    def position(self, index: int) -> int:
        for p, c in enumerate(self.classes):
            if c.index == index:
                return p
        raise KeyError(f"no class with index {index}")

    def with_class(self, index: int, **changes) -> "Scenario":
        """Copy with fields of the class ``index`` replaced (revalidated)."""
        p = self.position(index)
        classes = list(self.classes)
        classes[p] = replace(classes[p], **changes)
        return replace(self, classes=tuple(classes))


def _check(s: Scenario) -> None:
    if not s.classes:
        raise ScenarioError("scenario has no classes")
    indices = [c.index for c in s.classes]
    if len(set(indices)) != len(indices):
        raise ScenarioError(f"duplicate class indices: {indices}")
    for c in s.classes:
        tag = f"class {c.index}"
        if c.aifsn < 2:
            raise ScenarioError(f"{tag}: aifsn must be >= 2, got {c.aifsn}")
        if c.cw_min < 1 or (c.cw_min + 1) & c.cw_min:
            raise ScenarioError(f"{tag}: cw_min must be 2^k - 1 >= 1, got {c.cw_min}")
        if c.max_stage < 0:
            raise ScenarioError(f"{tag}: max_stage must be >= 0")
        if c.retry_limit < 1:
            raise ScenarioError(f"{tag}: retry_limit must be >= 1")
        if c.population < 0:
            raise ScenarioError(f"{tag}: population must be >= 0")
        if c.payload_bytes < 0:
            raise ScenarioError(f"{tag}: payload_bytes must be >= 0")
    for lo, hi in zip(s.classes, s.classes[1:]):
        if hi.aifsn > lo.aifsn:
            raise ScenarioError(
                f"aifsn must be non-increasing in priority index: class {hi.index} "
                f"has aifsn {hi.aifsn} > class {lo.index} aifsn {lo.aifsn}")
    if not s.populated:
        raise ScenarioError("no class has population > 0")
    w_min = s.w_min
    for p in s.populated:
        if s.d[p] + 1 > w_min:
            raise ScenarioError(
                f"class {s.classes[p].index}: d + 1 = {s.d[p] + 1} exceeds "
                f"W_min = {w_min}; the class would never reach a backoff slot")


def validate_scenario(raw: Scenario | Mapping) -> Scenario:
    """Return a normalized, validated Scenario.

    ``raw`` is either a Scenario (revalidated, idempotent) or a mapping with
    ``classes`` (sequence of mappings), optional ``phy`` mapping and
    ``access_mode``.
    """
    if isinstance(raw, Scenario):
        return Scenario(raw.classes, raw.phy, raw.access_mode)
    classes = tuple(
        c if isinstance(c, AccessCategoryClass) else AccessCategoryClass(**c)
        for c in raw["classes"])
    phy = raw.get("phy") or PhyProfile()
    if not isinstance(phy, PhyProfile):
        phy = PhyProfile(**phy)
    return Scenario(classes, phy, AccessMode(raw.get("access_mode", AccessMode.RTS_CTS)))


def frame_duration(nbytes: int, rate: float, phy: PhyProfile) -> float:
    """OFDM PPDU airtime of an ``nbytes`` MPDU sent at ``rate``."""
    if nbytes < 0:
        raise ValueError("nbytes must be >= 0")
    bits = phy.service_bits + 8 * nbytes + phy.tail_bits
    return phy.preamble_overhead + phy.symbol_time * math.ceil(
        bits / phy.bits_per_symbol(rate))


@dataclass(frozen=True)
class ExchangeDurations:
    """Per-class airtimes of one frame exchange, positions as in ``Scenario.classes``.

    ``t_success`` and ``t_collision`` include the transmitter's AIFS.
    """

    t_payload: tuple[float, ...]
    t_success: tuple[float, ...]
    t_collision: tuple[float, ...]
    aifs: tuple[float, ...]
    t_ack: float
    t_rts: float
    t_cts: float
    ack_timeout: float
    cts_timeout: float


def exchange_durations(s: Scenario) -> ExchangeDurations:
    phy = s.phy
    t_ack = frame_duration(phy.ack_bytes, phy.basic_rate, phy)
    t_rts = frame_duration(phy.rts_bytes, phy.basic_rate, phy)
    t_cts = frame_duration(phy.cts_bytes, phy.basic_rate, phy)
    # EIFS - AIFS
    ack_timeout = phy.sifs + t_ack
    cts_timeout = phy.sifs + t_cts
    t_p = tuple(frame_duration(c.payload_bytes + phy.mac_header_bytes, phy.data_rate, phy)
                for c in s.classes)
    aifs = tuple(phy.aifs(c.aifsn) for c in s.classes)
    # longest frame that can take part in a collision
    t_p_star = max(t_p[p] for p in s.populated)
    dl = phy.delta
    ts, tc = [], []
    for p, c in enumerate(s.classes):
        if s.access_mode is AccessMode.BASIC:
            ts.append(t_p[p] + dl + phy.sifs + t_ack + dl + aifs[p])
            tc.append(max(t_p[p], t_p_star) + ack_timeout + aifs[p])
        else:
            ts.append(t_rts + phy.sifs + t_cts + phy.sifs + t_p[p] + phy.sifs
                      + t_ack + aifs[p] + 4 * dl)
            tc.append(t_rts + cts_timeout + aifs[p])
    return ExchangeDurations(t_payload=t_p, t_success=tuple(ts), t_collision=tuple(tc),
                             aifs=aifs, t_ack=t_ack, t_rts=t_rts, t_cts=t_cts,
                             ack_timeout=ack_timeout, cts_timeout=cts_timeout)


def make_scenario(classes: Iterable[AccessCategoryClass], phy: PhyProfile | None = None,
                  access_mode: AccessMode | str = AccessMode.RTS_CTS) -> Scenario:
    return Scenario(tuple(classes), phy or PhyProfile(), AccessMode(access_mode))
