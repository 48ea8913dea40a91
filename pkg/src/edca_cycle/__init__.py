"""Saturation analysis of IEEE 802.11e EDCA by the cycle-time approach,
with a slotted Monte-Carlo simulator to check it against."""
from .cycle import (ClassMetrics, CycleBreakdown, ModelError, PerformanceReport, analyze,
                    collision_size, cycle_components, gamma, p_s_slot, performance,
                    st_matrix)
from .fixed_point import (ConvergenceError, FixedPointSolution, SolverConfig, mean_backoff,
                          p_c_average, p_c_given_zone, solve)
from .model import (AccessCategoryClass, AccessMode, ExchangeDurations, PhyProfile,
                    Scenario, ScenarioError, exchange_durations, frame_duration,
                    validate_scenario)
from .sim import SimStats, SimSummary, SimTrace, measure_conditional_collision, simulate, simulate_seeds
from .zones import SlotOccupancy, contenders_at_slot, p_tr_slot, slot_occupancy, zone_of_slot

__version__ = "0.1.0"
