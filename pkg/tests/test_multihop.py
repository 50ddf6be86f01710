import numpy as np
import pytest
from test_p2p import clipped_random_schedule

from ehsched.curves import CurveError, PiecewiseCurve, Poly
from ehsched.multihop import (
    Scenario,
    minimize_source_energy,
    solve_throughput,
    source_tangent,
)
from ehsched.p2p import (
    check_feasible,
    energy_of_data_curve,
    schedule_from_data_curve,
    solve_p2p,
)
from ehsched.rate import shannon

CELLS = 1000


def two_hop(ex, relay_energy):
    return Scenario((ex.energy[0], relay_energy), ex.arrival, ex.rates, ex.deadline)


def test_unconstrained_relay_forwards_everything(ex1):
    sc = two_hop(ex1, PiecewiseCurve.buffered(1e9, ex1.horizon))
    sol = solve_throughput(sc, cells=CELLS, minimize_energy=False)
    single = solve_p2p(ex1.energy[0], ex1.arrival, ex1.rates[0], grid=sol.t)
    assert sol.throughput == pytest.approx(single.throughput, rel=1e-6)
    np.testing.assert_allclose(sol.schedules[1].data, sol.schedules[0].data, atol=1e-6 * single.throughput)


def test_example1_throughput(ex1):
    sol = solve_throughput(ex1, cells=4000)
    assert sol.throughput == pytest.approx(2.88, rel=0.03)


def test_zero_relay_energy_starves_chain(ex1):
    sc = two_hop(ex1, PiecewiseCurve.constant(0.0, ex1.horizon))
    sol = solve_throughput(sc, cells=CELLS)
    assert sol.throughput == 0.0


def test_delivered_equals_last_node(ex2):
    sol = solve_throughput(ex2, cells=CELLS)
    assert sol.throughput == sol.schedules[-1].data[-1]
    assert sol.energies == [s.total_energy for s in sol.schedules]


def test_hop_data_causality(ex1, ex2, ex3, step_sc):
    for sc in (ex1, ex2, ex3, step_sc):
        sol = solve_throughput(sc, cells=CELLS)
        for up, down in zip(sol.schedules, sol.schedules[1:]):
            tol = 1e-6 * max(1.0, up.throughput)
            assert np.all(down.data <= up.data + tol)
        for s, E in zip(sol.schedules, sc.energy):
            assert check_feasible(s, E, sc.arrival if s is sol.schedules[0] else s.data).energy_violation <= 1e-6 * max(
                1.0, float(E(sc.deadline))
            )


class TestMinimizeSourceEnergy:
    def test_nothing_to_save(self, ex2):
        sol = solve_throughput(ex2, cells=CELLS, minimize_energy=False)
        src = sol.schedules[0]
        out = minimize_source_energy(src, src.throughput, ex2.rates[0])
        assert out is src
        assert source_tangent(src, src.throughput).T1 == src.T

    def test_parabola(self, rate):
        t = np.linspace(0.0, 2.0, 4001)
        upstream = schedule_from_data_curve(t, t**2, rate)
        out = minimize_source_energy(upstream, 3.0, rate)
        tan = source_tangent(upstream, 3.0)
        assert tan.slope == pytest.approx(2.0, abs=1e-3)
        assert tan.T1 == pytest.approx(1.0, abs=1e-3)
        before = t <= tan.T1
        np.testing.assert_allclose(out.data[before], t[before] ** 2)
        np.testing.assert_allclose(out.data[t >= 1.001], 2.0 * t[t >= 1.001] - 1.0, atol=2e-3)
        assert out.throughput == pytest.approx(3.0, abs=1e-12)
        assert out.total_energy < upstream.total_energy

    def test_example2_energy_drop(self, ex2):
        sol = solve_throughput(ex2, cells=4000)
        assert sol.unminimized[0].total_energy == pytest.approx(5.5, rel=0.05)
        assert sol.energies[0] == pytest.approx(3.8, rel=0.05)
        assert sol.throughput == pytest.approx(2.8, rel=0.05)
        assert sol.tangents[0].T1 < ex2.deadline

    def test_too_much_requested(self, ex2):
        sol = solve_throughput(ex2, cells=CELLS, minimize_energy=False)
        with pytest.raises(CurveError):
            minimize_source_energy(sol.schedules[0], sol.schedules[0].throughput * 1.1, ex2.rates[0])

    def test_downstream_resolve_reproduces_throughput(self, ex1, ex2):
        for sc in (ex1, ex2):
            sol = solve_throughput(sc, cells=CELLS)
            arrivals = PiecewiseCurve.from_samples(sol.t, sol.schedules[0].data)
            again = solve_p2p(sc.energy[1], arrivals, sc.rates[1], grid=sol.t)
            assert again.throughput == pytest.approx(sol.throughput, rel=5e-3)

    def test_trimmed_curve_is_least_energy(self, ex2, rng):
        sol = solve_throughput(ex2, cells=CELLS)
        opt, trimmed = sol.unminimized[0], sol.schedules[0]
        D = trimmed.throughput
        e_min = energy_of_data_curve(sol.t, trimmed.data, ex2.rates[0])
        for _ in range(50):
            shape = np.concatenate(([0.0], np.cumsum(rng.exponential(size=sol.t.size - 1))))
            other = np.minimum(opt.data, D * shape / shape[-1])
            other[-1] = D
            assert energy_of_data_curve(sol.t, other, ex2.rates[0]) >= e_min - 1e-9 * e_min


def test_upstream_optimum_dominates_relay_outcome(ex1, rng):
    """The relay never delivers more when fed any other feasible source curve."""
    t = ex1.grid(400)
    r = ex1.rates[0]
    best_src = solve_p2p(ex1.energy[0], ex1.arrival, r, grid=t)
    arrivals = PiecewiseCurve.from_samples(t, best_src.data)
    best = solve_p2p(ex1.energy[1], arrivals, ex1.rates[1], grid=t).throughput
    for _ in range(100):
        proposal = best_src.power * np.exp(rng.normal(0.0, 0.5, best_src.power.size)) * rng.uniform(0.5, 1.5)
        src = clipped_random_schedule(t, ex1.energy[0], ex1.arrival, r, proposal)
        relay = solve_p2p(ex1.energy[1], PiecewiseCurve.from_samples(t, src.data), ex1.rates[1], grid=t)
        assert relay.throughput <= best + 1e-9 * best


def test_unconstrained_intermediates_collapse_to_single_hop(ex1):
    big = PiecewiseCurve.buffered(1e9, ex1.horizon)
    r = shannon()
    sc = Scenario((ex1.energy[0], big, big, big), ex1.arrival, (r, r, r, r), ex1.deadline)
    sol = solve_throughput(sc, cells=CELLS)
    single = solve_p2p(ex1.energy[0], ex1.arrival, r, grid=sol.t)
    assert sol.throughput == pytest.approx(single.throughput, rel=1e-6)
    assert len(sol.schedules) == 4


def test_three_hop_backward_pass(ex1):
    relay2 = PiecewiseCurve([Poly(20.0, 2.0)], ex1.horizon)
    r = shannon()
    sc = Scenario((ex1.energy[0], ex1.energy[1], relay2), ex1.arrival, (r, r, r), ex1.deadline)
    sol = solve_throughput(sc, cells=CELLS)
    assert sol.tangents[-1] is None
    assert all(tg is not None for tg in sol.tangents[:-1])
    for trimmed, full in zip(sol.schedules, sol.unminimized):
        assert trimmed.total_energy <= full.total_energy + 1e-9
    for up, down in zip(sol.schedules, sol.schedules[1:]):
        assert np.all(down.data <= up.data + 1e-6 * max(1.0, up.throughput))
    assert sol.throughput == pytest.approx(sol.unminimized[-1].throughput, rel=1e-12)


class TestScenario:
    def test_needs_a_hop(self, ex1):
        with pytest.raises(ValueError):
            Scenario((), ex1.arrival, (), 0.6)

    def test_rate_count(self, ex1):
        with pytest.raises(ValueError):
            Scenario(ex1.energy, ex1.arrival, (shannon(),), 0.6)

    def test_deadline_within_domain(self, ex1):
        with pytest.raises(ValueError):
            Scenario(ex1.energy, ex1.arrival, ex1.rates, 0.7)

    def test_default_names(self, ex1):
        assert ex1.names == ("source", "relay", "receiver")
