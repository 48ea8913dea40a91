from collections import Counter

import numpy as np
import pytest
from scipy import stats

from edca_cycle import (AccessMode, Scenario, SimTrace, analyze, measure_conditional_collision,
                        simulate, simulate_seeds, solve)
from conftest import ac, two_class, single

SECOND = 1e6


def test_same_seed_is_bit_identical():
    s = two_class(6, 4)
    a = simulate(s, 11, 2 * SECOND)
    b = simulate(s, 11, 2 * SECOND)
    assert a == b
    assert simulate(s, 12, 2 * SECOND) != a


@pytest.mark.parametrize("mode", list(AccessMode))
def test_airtime_is_conserved(mode):
    run = simulate(two_class(8, 8, mode=mode), 3, 3 * SECOND)
    total = run.idle_time + run.success_time + run.collision_time
    assert total == pytest.approx(run.measured_duration, rel=1e-12)
    assert run.measured_duration >= run.sim_duration - run.warmup


def test_lone_station_never_collides():
    s = single(1)
    run = simulate(s, 5, 10 * SECOND)
    c = run.classes[0]
    assert c.collisions == c.drops == 0 and c.p_c == 0
    assert run.collision_time == 0
    expected = analyze(s).classes[0].throughput
    assert c.throughput == pytest.approx(expected, rel=0.02)


def test_transmissions_respect_aifs():
    s = two_class(5, 5, aifsn1=5)
    trace = SimTrace()
    simulate(s, 2, SECOND, trace=trace)
    seen = Counter(p for p, _ in trace.transmissions)
    assert seen[0] > 0 and seen[1] > 0
    for p, n in trace.transmissions:
        assert n >= s.d[p] + 1
    # slots 1..3 belong to class 3 alone
    assert min(n for p, n in trace.transmissions if p == 0) == 4


def test_delayed_access_knob():
    s = single(3)
    trace = SimTrace()
    run = simulate(s, 2, SECOND, immediate_access=False, trace=trace)
    assert run.classes[0].successes > 0
    assert min(n for _, n in trace.transmissions) == 2


def test_backoff_draws_are_uniform():
    trace = SimTrace()
    simulate(single(4), 9, 5 * SECOND, trace=trace)
    values = [v for _, w, v in trace.draws if w == 15]
    counts = np.bincount(values, minlength=16)
    assert counts.sum() > 2000
    assert stats.chisquare(counts).pvalue > 1e-3


def test_symmetric_classes_agree():
    s = Scenario((ac(1, 2, 15, 5), ac(3, 2, 15, 5)))
    summary = simulate_seeds(s, range(1, 6), 4 * SECOND)
    a, b = summary.mean.classes
    ca, cb = summary.ci
    for m in ("throughput", "p_c", "service_time"):
        assert abs(getattr(a, m) - getattr(b, m)) <= ca[m] + cb[m]


def test_summary_single_seed_has_nan_ci():
    summary = simulate_seeds(single(2), [7], SECOND)
    assert summary.seeds == (7,)
    assert np.isnan(summary.ci[0]["throughput"])


def test_workers_do_not_change_results():
    s = two_class(3, 3)
    one = simulate_seeds(s, [1, 2], SECOND)
    two = simulate_seeds(s, [1, 2], SECOND, workers=2)
    assert one.runs == two.runs


def test_conditional_collision_lone_station():
    assert measure_conditional_collision(single(1), 1, SECOND)[0] == 0


@pytest.mark.parametrize("n", [5, 15, 30])
def test_conditional_collision_matches_solver(n):
    s = two_class(n, n)
    measured = measure_conditional_collision(s, n, 20 * SECOND)
    np.testing.assert_allclose(measured, solve(s).p_c, rtol=0.10)


def test_warmup_must_be_shorter():
    with pytest.raises(ValueError):
        simulate(single(), 1, SECOND, warmup=SECOND)
