import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ehsched.curves import (
    CurveError,
    PiecewiseCurve,
    Poly,
    Step,
    is_convex_samples,
    make_grid,
)
from ehsched.p2p import (
    Schedule,
    check_feasible,
    energy_of_data_curve,
    schedule_from_data_curve,
    schedule_from_power,
    solve_p2p,
)
from ehsched.rate import shannon


def test_cubic_energy_constant_power(cubic_energy, rate):
    s = solve_p2p(cubic_energy.energy[0], cubic_energy.arrival, rate, T=1.0)
    np.testing.assert_allclose(s.power, 5.0, rtol=2e-3)
    assert s.throughput == pytest.approx(np.log2(6.0), rel=1e-3)


def test_linear_energy_gives_unit_power(rate):
    E = PiecewiseCurve([Poly(1.0)], 1.0)
    s = solve_p2p(E, PiecewiseCurve.buffered(1e6, 1.0), rate, T=1.0)
    np.testing.assert_allclose(s.power, 1.0, rtol=1e-9)
    assert s.throughput == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("empty", ["energy", "data"])
def test_empty_resource(rate, empty):
    zero = PiecewiseCurve.constant(0.0, 1.0)
    full = PiecewiseCurve.buffered(10.0, 1.0)
    E, B = (zero, full) if empty == "energy" else (full, zero)
    s = solve_p2p(E, B, rate, T=1.0, cells=200)
    assert np.all(s.power == 0.0)
    assert s.throughput == 0.0


def test_two_slot_instance_matches_enumeration(rate):
    E = PiecewiseCurve([Step(1.0, 0.0), Step(1.0, 1.0)], 2.0)
    B = PiecewiseCurve.buffered(1e6, 2.0)
    s = solve_p2p(E, B, rate, T=2.0, cells=400)
    # exhaustive search over {0, 0.25, ..., 2}^2 with cumulative energy limits
    levels = np.arange(0.0, 2.01, 0.25)
    best = max(
        float(rate(a) + rate(b)) for a, b in itertools.product(levels, levels) if a <= 1.0 and a + b <= 2.0
    )
    assert best == pytest.approx(2.0)
    assert s.throughput == pytest.approx(best, rel=1e-9)
    np.testing.assert_allclose(s.power, 1.0, rtol=1e-9)


def test_data_constraint_binds(rate):
    E = PiecewiseCurve.buffered(100.0, 1.0)
    B = PiecewiseCurve([Step(1.0, 0.0), Step(1.0, 0.5)], 1.0)
    s = solve_p2p(E, B, rate, T=1.0, cells=400)
    assert s.throughput == pytest.approx(2.0, rel=1e-9)
    assert check_feasible(s, E, B).ok
    # one bit in each half at constant power r^-1(2)
    np.testing.assert_allclose(s.power, 3.0, rtol=1e-9)


def test_grid_must_end_at_deadline(rate, cubic_energy):
    with pytest.raises(CurveError):
        solve_p2p(cubic_energy.energy[0], cubic_energy.arrival, rate, T=1.0, grid=np.linspace(0.0, 0.5, 11))


def test_nonpositive_deadline(rate, cubic_energy):
    with pytest.raises(CurveError):
        solve_p2p(cubic_energy.energy[0], cubic_energy.arrival, rate, T=0.0)


class TestEnergyOfDataCurve:
    def test_unit_slope(self, rate):
        t = np.linspace(0.0, 1.0, 11)
        assert energy_of_data_curve(t, t, rate) == pytest.approx(1.0, rel=1e-12)

    def test_burst_then_flat(self, rate):
        t = np.linspace(0.0, 1.0, 101)
        data = np.minimum(2.0 * t, 1.0)
        assert energy_of_data_curve(t, data, rate) == pytest.approx(1.5, rel=1e-12)

    def test_decreasing_rejected(self, rate):
        t = np.linspace(0.0, 1.0, 5)
        with pytest.raises(ValueError):
            energy_of_data_curve(t, np.array([0.0, 1.0, 0.5, 1.0, 2.0]), rate)

    def test_matches_schedule_energy(self, rate):
        t = np.linspace(0.0, 1.0, 201)
        s = schedule_from_power(t, np.linspace(0.5, 3.0, 200), rate)
        assert energy_of_data_curve(t, s.data, rate) == pytest.approx(s.total_energy, rel=1e-9)
        back = schedule_from_data_curve(t, s.data, rate)
        np.testing.assert_allclose(back.power, s.power, rtol=1e-9)


class TestCheckFeasible:
    def test_solver_output_passes(self, ex1, rate):
        s = solve_p2p(ex1.energy[0], ex1.arrival, rate, T=0.6, cells=800)
        assert check_feasible(s, ex1.energy[0], ex1.arrival).ok

    def test_doubled_power_violates_energy(self, ex1, rate):
        s = solve_p2p(ex1.energy[0], ex1.arrival, rate, T=0.6, cells=800)
        rep = check_feasible(s.scaled(2.0, rate), ex1.energy[0], ex1.arrival)
        assert not rep.ok
        assert rep.energy_violation > rep.energy_tol

    def test_zero_schedule_passes(self, ex1):
        t = make_grid(0.6, 100)
        z = np.zeros(t.size)
        s = Schedule(t, np.zeros(t.size - 1), z, z)
        rep = check_feasible(s, ex1.energy[0], ex1.arrival)
        assert rep.ok
        assert rep.energy_used == 0.0 and rep.data_used == 0.0

    def test_grid_mismatch(self, ex1, rate):
        s = solve_p2p(ex1.energy[0], ex1.arrival, rate, T=0.6, cells=50)
        with pytest.raises(ValueError):
            check_feasible(s, ex1.energy[0], np.zeros(3))


def clipped_random_schedule(t, E, B, rate, proposal):
    """Sequentially clip ``proposal`` so every grid point respects both limits."""
    El, Bl = E.left(t), B.left(t)
    p = np.zeros(t.size - 1)
    e = b = 0.0
    for k in range(p.size):
        h = t[k + 1] - t[k]
        cap = min((El[k + 1] - e) / h, float(rate.inverse(max(Bl[k + 1] - b, 0.0) / h)))
        p[k] = max(0.0, min(proposal[k], cap))
        e += p[k] * h
        b += float(rate(p[k])) * h
    return schedule_from_power(t, p, rate)


@settings(max_examples=40, deadline=None)
@given(
    a=st.floats(0.5, 50.0),
    k=st.floats(0.5, 3.0),
    e0=st.floats(0.0, 2.0),
    data=st.floats(0.2, 20.0),
    seed=st.integers(0, 2**31),
)
def test_random_feasible_schedules_never_beat_solver(a, k, e0, data, seed):
    rate = shannon()
    T = 1.0
    E = PiecewiseCurve([Poly(a, k, 0.0, e0)], T)
    B = PiecewiseCurve([Step(data / 2, 0.0), Poly(data / 2, 2.0)], T)
    t = make_grid(T, 200)
    opt = solve_p2p(E, B, rate, grid=t)
    assert check_feasible(opt, E, B).ok
    gen = np.random.default_rng(seed)
    proposal = np.maximum(opt.power, 1e-3) * np.exp(gen.normal(0.0, 0.4, opt.power.size))
    rnd = clipped_random_schedule(t, E, B, rate, proposal)
    assert check_feasible(rnd, E, B).ok
    assert rnd.throughput <= opt.throughput + 1e-9 * max(1.0, opt.throughput)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.5, 50.0), k=st.floats(1.0, 4.0), e0=st.floats(0.0, 5.0))
def test_data_curve_convex_when_data_is_plentiful(a, k, e0):
    rate = shannon()
    E = PiecewiseCurve([Poly(a, k, 0.0, e0)], 1.0)
    s = solve_p2p(E, PiecewiseCurve.buffered(1e6, 1.0), rate, T=1.0, cells=300)
    assert is_convex_samples(s.t, s.data, rel_tol=1e-9)
    assert np.all(np.diff(s.power) >= -1e-9 * max(1.0, s.power.max()))
