import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pgsim.seeker import (SeekerConfig, SeekerState, delay_step,
                          los_rate_channels, true_los_rate)


class Point:
    def __init__(self, position, velocity):
        self.position = position
        self.velocity = velocity


class TestLosRateChannels:
    def test_vertical_crossing(self):
        # target climbing at 10 m/s at 1 km range dead ahead
        elev, az = los_rate_channels((1000.0, 0.0, 0.0), (0.0, 0.0, 10.0))
        assert elev == pytest.approx(0.01)
        assert az == pytest.approx(0.0)

    def test_horizontal_crossing(self):
        elev, az = los_rate_channels((1000.0, 0.0, 0.0), (0.0, 10.0, 0.0))
        assert elev == pytest.approx(0.0)
        assert az == pytest.approx(0.01)

    def test_pure_closing_has_no_rotation(self):
        elev, az = los_rate_channels((3000.0, 4000.0, 1000.0),
                                     (-300.0, -400.0, -100.0))
        assert elev == pytest.approx(0.0, abs=1e-15)
        assert az == pytest.approx(0.0, abs=1e-15)

    def test_zero_range_rejected(self):
        with pytest.raises(ValueError, match="range"):
            los_rate_channels((0.0, 0.0, 0.0), (1.0, 0.0, 0.0))

    def test_vertical_los_uses_fallback_axis(self):
        elev, az = los_rate_channels((0.0, 0.0, 1000.0), (10.0, 0.0, 0.0))
        assert math.isfinite(elev) and math.isfinite(az)

    def test_descending_target_negative_elevation(self):
        elev, _ = los_rate_channels((1000.0, 0.0, 0.0), (0.0, 0.0, -10.0))
        assert elev == pytest.approx(-0.01)

    @given(yaw=st.floats(-math.pi, math.pi), r=st.floats(500.0, 20000.0),
           vz=st.floats(-50.0, 50.0))
    @settings(max_examples=100, deadline=None)
    def test_elevation_invariant_under_azimuth_rotation(self, yaw, r, vz):
        # rotating the whole geometry about the vertical axis must not
        # change the elevation channel
        c, s = math.cos(yaw), math.sin(yaw)
        base, _ = los_rate_channels((r, 0.0, 0.0), (0.0, 0.0, vz))
        rot, _ = los_rate_channels((r * c, r * s, 0.0), (0.0, 0.0, vz))
        assert rot == pytest.approx(base, rel=1e-9, abs=1e-12)

    @given(scale=st.floats(0.1, 100.0))
    @settings(max_examples=50, deadline=None)
    def test_rate_scales_inversely_with_range(self, scale):
        e1, a1 = los_rate_channels((2000.0, 500.0, 300.0), (-20.0, 30.0, 5.0))
        e2, a2 = los_rate_channels((2000.0 * scale, 500.0 * scale, 300.0 * scale),
                                   (-20.0, 30.0, 5.0))
        assert e2 == pytest.approx(e1 / scale, rel=1e-9, abs=1e-15)
        assert a2 == pytest.approx(a1 / scale, rel=1e-9, abs=1e-15)


class TestTrueLosRate:
    def test_relative_geometry(self):
        m = Point((0.0, 0.0, 0.0), (100.0, 0.0, 0.0))
        t = Point((1000.0, 0.0, 0.0), (100.0, 0.0, 10.0))
        assert true_los_rate(m, t) == pytest.approx((0.01, 0.0))

    def test_translation_invariance(self):
        m = Point((500.0, -200.0, 50.0), (150.0, 10.0, -5.0))
        t = Point((4000.0, 800.0, 1200.0), (-180.0, 20.0, 3.0))
        base = true_los_rate(m, t)
        shift = (1234.0, -567.0, 89.0)
        m2 = Point(tuple(p + s for p, s in zip(m.position, shift)), m.velocity)
        t2 = Point(tuple(p + s for p, s in zip(t.position, shift)), t.velocity)
        assert true_los_rate(m2, t2) == pytest.approx(base, rel=1e-12)


class TestDelayStep:
    def test_zero_lag_is_passthrough(self):
        cfg = SeekerConfig(lag_time_constant=0.0)
        out = delay_step(SeekerState(), (0.02, -0.01), 0.001, cfg)
        assert out.delayed_rate == (0.02, -0.01)

    def test_exponential_step_response(self):
        tau = 0.2
        cfg = SeekerConfig(lag_time_constant=tau)
        state = SeekerState()
        dt = 0.001
        n = 200  # one time constant
        for _ in range(n):
            state = delay_step(state, (1.0, -2.0), dt, cfg)
        want = 1.0 - math.exp(-n * dt / tau)
        assert state.delayed_rate[0] == pytest.approx(want, rel=1e-12)
        assert state.delayed_rate[1] == pytest.approx(-2.0 * want, rel=1e-12)

    def test_step_size_invariance(self):
        cfg = SeekerConfig(lag_time_constant=0.15)
        coarse = delay_step(SeekerState(), (1.0, 0.5), 0.01, cfg)
        fine = SeekerState()
        for _ in range(10):
            fine = delay_step(fine, (1.0, 0.5), 0.001, cfg)
        assert fine.delayed_rate == pytest.approx(coarse.delayed_rate, rel=1e-12)

    def test_tracks_constant_input_exactly_in_limit(self):
        cfg = SeekerConfig(lag_time_constant=0.05)
        state = SeekerState(delayed_rate=(0.03, 0.03))
        for _ in range(2000):
            state = delay_step(state, (0.03, 0.03), 0.001, cfg)
        assert state.delayed_rate == pytest.approx((0.03, 0.03), rel=1e-12)

    def test_sine_gain_and_phase(self):
        # steady-state response of a first-order lag to sin(w t):
        # amplitude 1/sqrt(1+(w tau)^2), phase lag atan(w tau)
        tau, w, dt = 0.1, 3.0, 1e-4
        cfg = SeekerConfig(lag_time_constant=tau)
        state = SeekerState()
        out, ts = [], []
        n = int(20.0 / dt)
        for i in range(n):
            t_mid = i * dt  # input held over [t, t+dt)
            state = delay_step(state, (math.sin(w * t_mid), 0.0), dt, cfg)
            out.append(state.delayed_rate[0])
            ts.append((i + 1) * dt)
        gain = 1.0 / math.sqrt(1.0 + (w * tau) ** 2)
        phase = math.atan(w * tau)
        # compare over the last few cycles
        tail = slice(n - int(4.0 / dt), n)
        for t, y in zip(ts[tail], out[tail]):
            assert y == pytest.approx(gain * math.sin(w * t - phase), abs=2e-3)

    def test_invalid_inputs(self):
        cfg = SeekerConfig(lag_time_constant=0.1)
        with pytest.raises(ValueError):
            delay_step(SeekerState(), (0.0, 0.0), 0.0, cfg)
        with pytest.raises(ValueError):
            delay_step(SeekerState(), (float("nan"), 0.0), 0.001, cfg)
        with pytest.raises(ValueError):
            SeekerConfig(lag_time_constant=-0.1)

    def test_records_last_true_rate(self):
        cfg = SeekerConfig(lag_time_constant=0.3)
        out = delay_step(SeekerState(), (0.07, -0.04), 0.001, cfg)
        assert out.last_true_rate == (0.07, -0.04)
