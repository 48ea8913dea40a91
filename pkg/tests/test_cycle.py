import itertools
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edca_cycle import (AccessMode, Scenario, analyze, collision_size,
                        cycle_components, exchange_durations, gamma, p_s_slot, performance,
                        slot_occupancy, solve, st_matrix)
from conftest import ac, two_class, single


def brute_force_collision_size(taus):
    """E[Y | Y >= 2] by enumerating every transmit/silent combination."""
    num = den = 0.0
    for outcome in itertools.product((0, 1), repeat=len(taus)):
        y = sum(outcome)
        if y < 2:
            continue
        pr = 1.0
        for o, t in zip(outcome, taus):
            pr *= t if o else 1 - t
        num += y * pr
        den += pr
    return num / den


def test_p_s_examples():
    s = two_class()
    assert p_s_slot(s, 0, 1, [0.1, 0.1]) == 0.0
    assert p_s_slot(single(1), 0, 3, [0.3]) == pytest.approx(0.3, abs=1e-15)
    s2 = Scenario((ac(1, 2, 15, 1), ac(3, 2, 15, 1)))
    for i in (0, 1):
        assert p_s_slot(s2, i, 2, [0.5, 0.5]) == pytest.approx(0.25, abs=1e-15)


def test_gamma_examples():
    s = single(1)
    assert gamma(s, slot_occupancy(s, [0.2]), [0.2]) == pytest.approx([1.0])
    s = single(7)
    assert gamma(s, slot_occupancy(s, [0.05]), [0.05]) == pytest.approx([1 / 7])
    s = Scenario((ac(1, 2, 15, 4), ac(3, 2, 15, 4)))
    g = gamma(s, slot_occupancy(s, [0.06, 0.06]), [0.06, 0.06])
    np.testing.assert_allclose(g, [1 / 8, 1 / 8], atol=1e-15)


def test_st_examples():
    s = Scenario((ac(1, 3, 31, 1), ac(3, 2, 15, 1)))
    np.testing.assert_allclose(st_matrix(s, [2 / 3, 1 / 3]), [[1, 2], [0.5, 1]], atol=1e-15)
    s = Scenario((ac(1, 2, 15, 5), ac(3, 2, 15, 5)))
    np.testing.assert_allclose(st_matrix(s, [0.1, 0.1]), np.full((2, 2), 5.0))


def test_collision_size_two_stations():
    s = Scenario((ac(1, 3, 31, 1), ac(3, 2, 15, 1)))
    tau = [0.3, 0.6]
    per_slot, mean = collision_size(s, slot_occupancy(s, tau), tau)
    assert np.isnan(per_slot[0])   # only class 3 contends in slot 1
    np.testing.assert_allclose(per_slot[1:], 2.0, atol=1e-12)
    assert mean == pytest.approx(2.0, abs=1e-12)


def test_collision_size_single_station_undefined():
    s = single(1)
    per_slot, mean = collision_size(s, slot_occupancy(s, [0.2]), [0.2])
    assert mean is None and np.all(np.isnan(per_slot))


def test_collision_size_three_stations():
    s = single(3)
    per_slot, _ = collision_size(s, slot_occupancy(s, [0.5]), [0.5])
    assert brute_force_collision_size([0.5] * 3) == pytest.approx(2.25, abs=1e-15)
    np.testing.assert_allclose(per_slot, 2.25, atol=1e-12)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 6), st.integers(1, 6), st.integers(0, 3),
       st.floats(0.001, 0.9), st.floats(0.001, 0.9))
def test_collision_size_matches_enumeration(n1, n3, extra, t1, t3):
    s = Scenario((ac(1, 2 + extra, 31, n1), ac(3, 2, 15, n3)))
    tau = [t1, t3]
    per_slot, _ = collision_size(s, slot_occupancy(s, tau), tau)
    for n in (1, extra + 1, s.w_min):
        members = [t3] * n3 + ([t1] * n1 if s.d[0] <= n - 1 else [])
        if len(members) < 2:
            assert np.isnan(per_slot[n - 1])
        else:
            assert per_slot[n - 1] == pytest.approx(brute_force_collision_size(members),
                                                    abs=1e-10)


def test_single_station_cycle():
    s = single(1, cw_min=15)
    sol = solve(s)
    dur = exchange_durations(s)
    br = cycle_components(s, sol, dur)
    assert br.t_suc[0] == dur.t_success[0]
    assert br.t_col[0] == 0
    assert br.t_idle[0] == 7.5 * s.phy.t_slot
    rep = performance(s, br, sol, dur)
    m = rep.classes[0]
    assert m.throughput == dur.t_payload[0] / (dur.t_success[0] + 7.5 * s.phy.t_slot)
    assert m.drop_prob == 0 and m.service_time == m.t_cyc


def test_zero_collision_probability_gives_zero_ct():
    s = two_class(3, 3)
    sol = solve(s)
    sol0 = replace(sol, p_c=np.zeros(2))
    br = cycle_components(s, sol0, exchange_durations(s))
    assert np.all(br.ct == 0)
    np.testing.assert_allclose(br.t_idle, sol.mean_backoff * s.phy.t_slot)


def test_drop_probability_power():
    s = single(2, retry_limit=2)
    sol = solve(s)
    forced = replace(sol, p_c=np.array([0.5]))
    dur = exchange_durations(s)
    rep = performance(s, cycle_components(s, forced, dur), forced, dur)
    assert rep.classes[0].drop_prob == 0.25
    assert rep.classes[0].service_time == 0.75 * rep.classes[0].t_cyc


def test_breakdown_identities():
    s = two_class(12, 7)
    sol = solve(s)
    br = cycle_components(s, sol, exchange_durations(s))
    n = np.array([12, 7])
    assert abs((n * br.gamma).sum() - 1) <= 1e-12
    np.testing.assert_allclose(np.diag(br.st), n, atol=1e-9)
    assert br.n_c >= 2
    np.testing.assert_allclose(br.mean_intervening, (1 - br.gamma) / br.gamma)
    np.testing.assert_allclose(br.t_cyc, br.t_suc + br.t_col + br.t_idle)


@pytest.mark.parametrize("mode", list(AccessMode))
def test_report_bounds(mode):
    for n in (1, 5, 30):
        rep = analyze(two_class(n, n, mode=mode))
        assert rep.total_throughput <= 1
        for m in rep.classes:
            assert m.throughput > 0
            assert 0 <= m.drop_prob <= 1
            assert m.service_time <= m.t_cyc


def test_permuting_identical_classes_permutes_report():
    a = analyze(Scenario((ac(1, 3, 31, 4), ac(2, 3, 31, 9), ac(3, 2, 15, 4))))
    b = analyze(Scenario((ac(1, 3, 31, 9), ac(2, 3, 31, 4), ac(3, 2, 15, 4))))
    for x, y in ((a.classes[0], b.classes[1]), (a.classes[1], b.classes[0])):
        assert x.throughput == pytest.approx(y.throughput, rel=1e-9)
        assert x.p_c == pytest.approx(y.p_c, rel=1e-9)
    assert a.classes[2].throughput == pytest.approx(b.classes[2].throughput, rel=1e-9)


def test_unpopulated_class_reports_zeros():
    rep = analyze(Scenario((ac(0, 7, 15, 0), ac(1, 3, 31, 3), ac(3, 2, 15, 3))))
    assert rep.by_index(0).throughput == 0
    assert rep.by_index(1).throughput > 0
