import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import constants as sc

from nanofiber_orbit import probe as pr
from nanofiber_orbit.dispersion import timescales
from nanofiber_orbit.errors import GridMismatch, InsufficientSampling


@pytest.fixture(scope="module")
def coeff(pipe):
    return pipe.coefficients


@pytest.fixture(scope="module")
def long_trace(coeff, ts):
    times = 5e-8 * np.arange(20001)
    tr = pr.trace(coeff, times)
    pr.analyze(tr, ts)
    return tr


def test_static_term_positive(coeff):
    assert coeff.B > 0
    assert coeff.ms.size == 63 and coeff.V.size == 63


def test_identical_neighbours(pipe, packet):
    u0 = packet.u[packet.ms.tolist().index(468)]
    same = dataclasses.replace(packet, u=np.tile(u0, (packet.ms.size, 1)))
    c = pr.coefficients(same, pipe.probe_mode)
    er2, ep2, ez2 = pipe.probe_mode.profiles(packet.grid.r)
    want = np.sum(u0**2 * (er2 - ep2 + ez2)) * packet.grid.spacing
    np.testing.assert_allclose(c.V, want, rtol=1e-12)
    assert c.B == pytest.approx(np.sum(u0**2 * (er2 + ep2 + ez2)) * packet.grid.spacing, rel=1e-12)


def test_grid_mismatch(pipe, packet):
    bad = dataclasses.replace(packet, u=packet.u[:, ::2])
    with pytest.raises(GridMismatch):
        pr.coefficients(bad, pipe.probe_mode)


def test_initial_value_is_maximum(coeff, long_trace):
    assert long_trace.values[0] == pytest.approx(1 + coeff.modulation_weights.sum(), rel=1e-14)
    assert np.all(long_trace.values <= long_trace.values[0] + 1e-14)
    assert np.all(long_trace.values > 0)


def test_modulation_weight_sum(coeff, long_trace):
    # peak-to-mean modulation about equals the initial visibility under (max-min)/(max+min)
    w = coeff.modulation_weights.sum()
    assert w == pytest.approx(0.40, abs=0.10)
    assert long_trace.analysis.visibility_initial == pytest.approx(w, abs=0.02)


def test_series_matches_quadrature(pipe, coeff, ts):
    rng = np.random.default_rng(20240)
    t = np.sort(rng.uniform(0, ts.T_rev, 20))
    series = pr.trace(coeff, t).values
    direct = pr.trace_direct(pipe.packet, pipe.probe_mode, t, grid=pipe.polar).values
    np.testing.assert_allclose(series, direct, rtol=1e-3)


def test_axis_shift_by_pi(pipe, coeff, ts):
    t = np.linspace(0, ts.T_rev, 7)
    np.testing.assert_allclose(pr.trace(coeff, t, np.pi).values, pr.trace(coeff, t, 0.0).values, rtol=1e-12)
    a = pr.trace_direct(pipe.packet, pipe.probe_mode, t[:3], 0.4, pipe.polar).values
    b = pr.trace_direct(pipe.packet, pipe.probe_mode, t[:3], 0.4 + np.pi, pipe.polar).values
    np.testing.assert_allclose(a, b, rtol=1e-12)


@settings(max_examples=20, deadline=None)
@given(t=st.floats(0, 1e-3), theta=st.floats(0, np.pi))
def test_linearized_resume_shift(coeff, ts, t, theta):
    # advancing by T_resume only adds the global phase 2 pi E1/|E2|, i.e. rotates the axis
    shift = np.pi * ts.E1 / abs(ts.E2)
    a = pr.trace_linearized(coeff, ts.E1, ts.E2, [t + ts.T_resume_sca], theta).values
    b = pr.trace_linearized(coeff, ts.E1, ts.E2, [t], theta - shift).values
    assert a[0] == pytest.approx(b[0], rel=1e-9)


def test_linearized_periodic_for_integer_ratio(coeff):
    E2 = -sc.h * 2.5e3
    E1 = 90 * abs(E2)
    T = timescales(E1, E2, 6).T_resume_sca
    t = np.linspace(0, 2e-4, 301)
    a = pr.trace_linearized(coeff, E1, E2, t + T).values
    b = pr.trace_linearized(coeff, E1, E2, t).values
    np.testing.assert_allclose(a, b, rtol=1e-9)


def test_linearized_close_to_exact_early(coeff, ts):
    t = np.linspace(0, 20e-6, 400)
    exact = pr.trace(coeff, t).values
    lin = pr.trace_linearized(coeff, ts.E1, ts.E2, t).values
    assert np.max(np.abs(exact - lin)) < 0.02


def test_axis_rotation_shifts_time_keeps_mean(coeff, ts):
    t = 1e-9 * np.arange(6000)
    base = pr.trace(coeff, t, 0.0)
    theta = 0.5
    rot = pr.trace(coeff, t, theta)
    first = lambda y: t[np.argmax(y[: int(0.9 * ts.T_osc_sca / 1e-9)])]  # noqa: E731
    assert first(rot.values) - first(base.values) == pytest.approx(theta / np.pi * ts.T_osc_sca, rel=0.03)
    long_t = 5e-8 * np.arange(20001)
    m0 = pr.trace(coeff, long_t, 0.0).values.mean()
    m1 = pr.trace(coeff, long_t, theta).values.mean()
    assert m1 == pytest.approx(m0, abs=2e-3)


def test_morphology(long_trace, ts):
    an = long_trace.analysis
    assert an.T_osc_measured == pytest.approx(ts.T_rot / 2, rel=0.02)
    assert an.T_fall_measured < 2 * ts.T_fall_sca
    for k in (1, 2, 3, 4):
        want = k * ts.T_rev / 4
        got = min(an.resumption_times, key=lambda x: abs(x - want))
        assert got == pytest.approx(want, rel=0.05)
    for p in an.resumed_periods[:4]:
        assert p == pytest.approx(an.T_osc_measured, rel=0.02)
    assert an.visibility_initial == pytest.approx(0.40, abs=0.10)
    assert an.visibility_at_rev / an.visibility_initial == pytest.approx(1 / 3, abs=0.15)


def test_quasi_stationary_by_15us(long_trace):
    sel = (long_trace.times > 15e-6) & (long_trace.times < 60e-6)
    assert np.max(np.abs(long_trace.values[sel] - 1)) < 0.02


def test_suppression_at_eighth_revival(long_trace, ts):
    assert pr.modulation_amplitude(long_trace, ts.T_rev / 8, ts.T_osc_sca) <= 0.02


def test_analyze_synthetic():
    ts = timescales(sc.h * 200e3, -sc.h * 2.5e3, 6)
    t = 2e-8 * np.arange(20000)
    # slow envelope: a decaying envelope pulls crests earlier by ~T^2/(4 pi^2 tau)
    y = 1 + 0.3 * np.exp(-t / 50e-6) * np.cos(2 * np.pi * t / ts.T_osc_sca)
    an = pr.analyze(pr.ScatterTrace(t, y), ts)
    assert an.T_osc_measured == pytest.approx(ts.T_osc_sca, rel=1e-3)
    assert an.visibility_initial == pytest.approx(0.3, rel=0.1)
    assert an.T_fall_measured == pytest.approx(50e-6, rel=0.1)
    assert an.resumption_times == []


def test_analyze_sampling_guard(coeff, ts):
    t = 1e-6 * np.arange(200)
    with pytest.raises(InsufficientSampling):
        pr.analyze(pr.trace(coeff, t), ts)
    with pytest.raises(ValueError):
        pr.trace(coeff, [1.0, 0.5])


def test_visibility():
    assert pr.visibility(np.array([0.6, 1.4])) == pytest.approx(0.4)
    assert pr.visibility(np.ones(5)) == 0.0
