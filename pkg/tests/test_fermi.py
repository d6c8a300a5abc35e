import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_lab.errors import ExtrapolationError
from causal_lab.fermi import (
    AtomPairConfig,
    causality_scan,
    excitation_amplitude,
    massless_feynman_kernel,
    power_law_fit,
    precausal_fraction,
    reduced_amplitude,
    tail_envelope_exponent,
    tail_scaling_exponent,
)
from causal_lab.kernels import RegulatorSchedule
from causal_lab.propagators import CausalPrescription, ScalarTheory, positive_energy_kernel

import oracles

WAVE = AtomPairConfig(r=1.0, omega0=20.0)


class TestKernel:
    def test_equal_time_value(self):
        k = massless_feynman_kernel(0.0, 1.0, 1e-12)
        assert k.imag == pytest.approx(0.0, abs=1e-20)
        assert k.real == pytest.approx(1 / (4 * math.pi**2), rel=1e-12)

    def test_matches_propagator_quadrature(self):
        # same normalization as the radial quadrature of the propagators module
        for xi, r in [(0.0, 1.0), (0.5, 1.0), (2.0, 1.0)]:
            quad_value = positive_energy_kernel(ScalarTheory(0.0), xi, r).value
            closed = massless_feynman_kernel(xi, r, 1e-9)
            assert abs(quad_value - closed) < 1e-6 * abs(closed)

    def test_even_and_conjugate(self):
        xi = np.linspace(-3, 3, 13)
        plus = massless_feynman_kernel(xi, 1.0, 0.01)
        minus = massless_feynman_kernel(xi, 1.0, 0.01, CausalPrescription.MINUS)
        assert np.array_equal(plus, plus[::-1])
        assert np.array_equal(minus, plus.conj())


class TestAmplitude:
    def test_zero_coupling(self):
        assert excitation_amplitude(AtomPairConfig(1.0, 20.0, lam=0.0), 1.5).value == 0

    @settings(max_examples=10, deadline=None)
    @given(lam=st.floats(0.1, 5), ratio=st.sampled_from([0.4, 0.8, 1.6]))
    def test_coupling_homogeneity(self, lam, ratio):
        base = reduced_amplitude(WAVE, ratio, 0.01)
        scaled = reduced_amplitude(AtomPairConfig(1.0, 20.0, lam=lam), ratio, 0.01)
        assert abs(scaled - lam * lam * base) <= 1e-14 * abs(scaled)

    @pytest.mark.parametrize(
        "omega0, ratio, eps",
        [(20.0, 0.5, 0.02), (20.0, 2.0, 0.05), (10.0, 0.7, 0.03), (40.0, 1.5, 0.05), (15.0, 0.3, 0.02)],
    )
    def test_reduction_against_double_integral(self, omega0, ratio, eps):
        config = AtomPairConfig(1.0, omega0)
        reduced = reduced_amplitude(config, ratio, eps)
        double = oracles.fermi_double_integral(1.0, omega0, 1.0, ratio, eps)
        assert abs(reduced - double) < 1e-6 * abs(double)

    def test_minus_is_conjugate(self):
        for dt in (0.5, 1.5, 2.5):
            plus = excitation_amplitude(WAVE, dt)
            minus = excitation_amplitude(WAVE, dt, CausalPrescription.MINUS)
            assert abs(minus.value - plus.value.conjugate()) <= 2 * plus.error + 1e-18

    def test_vanishes_for_short_windows(self):
        amps = [abs(excitation_amplitude(WAVE, dt).value) for dt in (1e-3, 1e-2, 1e-1)]
        assert amps[0] < amps[1] < amps[2] < 1e-4
        assert amps[0] < 1e-8

    def test_refuses_window_on_light_cone(self):
        with pytest.raises(ExtrapolationError, match="refine"):
            excitation_amplitude(WAVE, 1.0005)

    def test_explicit_schedule_is_used(self):
        config = AtomPairConfig(1.0, 20.0, regulator=RegulatorSchedule((4e-3, 2e-3, 1e-3)))
        a = excitation_amplitude(config, 1.5)
        b = excitation_amplitude(WAVE, 1.5)
        assert abs(a.value - b.value) <= a.error + b.error

    @pytest.mark.parametrize("omega0", [20.0, 40.0])
    def test_window_monotone_after_light_cone(self, omega0):
        config = AtomPairConfig(1.0, omega0)
        res = [excitation_amplitude(config, dt) for dt in np.linspace(1.25, 3.0, 8)]
        mods = np.array([abs(x.value) for x in res])
        errs = np.array([x.error for x in res])
        assert np.all(np.diff(mods) >= -2 * errs[1:])


@pytest.fixture(scope="module")
def scan():
    ratios = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.1, 1.2, 1.4, 1.6, 1.8, 2.0]
    return causality_scan(WAVE, ratios)


class TestCausality:
    def test_jump_across_light_cone(self, scan):
        mods = np.abs(scan.amplitudes)
        before = mods[scan.delta_taus < 1.0].max()
        after = mods[scan.delta_taus > 1.0].min()
        assert after > 5 * before

    def test_precausal_finite(self, scan):
        pre = np.abs(scan.amplitudes[scan.delta_taus < 1.0])
        assert np.all(pre > 0)
        assert scan.precausal_ratio < 0.1

    def test_scan_validation(self):
        with pytest.raises(ValueError):
            causality_scan(WAVE, [0.5, 0.4])
        with pytest.raises(ValueError):
            causality_scan(WAVE, [])

    def test_precausal_fraction_small(self):
        assert precausal_fraction(WAVE, 0.5) < 0.05


class TestScaling:
    def test_exact_power_law(self):
        x = np.array([10.0, 20.0, 40.0, 80.0])
        slope, resid = power_law_fit(x, 3.7 / x**2)
        assert slope == pytest.approx(-2.0, abs=1e-10)
        assert resid < 1e-10

    @pytest.mark.parametrize("n", [4, 5, 10, 20])
    def test_bounded_modulation(self, n):
        x = np.logspace(1, 2, n)
        slope, _ = power_law_fit(x, (2 + np.sin(x)) / x**2)
        assert -2.3 <= slope <= -1.7

    def test_preconditions(self):
        configs = [AtomPairConfig(1.0, w) for w in (10.0, 20.0, 40.0, 80.0)]
        with pytest.raises(ValueError, match="four"):
            tail_scaling_exponent(configs[:3])
        with pytest.raises(ValueError, match="wave zone"):
            tail_scaling_exponent([AtomPairConfig(1.0, w) for w in (2.0, 20.0, 40.0, 80.0)])
        with pytest.raises(ValueError, match="span"):
            tail_scaling_exponent([AtomPairConfig(1.0, w) for w in (10.0, 12.0, 14.0, 16.0)])

    @pytest.mark.parametrize("x", [160.0, 320.0])
    def test_precausal_asymptotic_form(self, x):
        # two integrations by parts: A(rho r) -> -lam^2 f(x)/(8 pi^2 x^2),
        # f(x) = 1 - cos(rho x)/(1 - rho^2)
        rho = 0.5
        amp = excitation_amplitude(AtomPairConfig(1.0, x), rho).value
        f = 1 - math.cos(rho * x) / (1 - rho * rho)
        assert amp.real / (-f / (8 * math.pi**2 * x * x)) == pytest.approx(1.0, abs=0.05)
        assert abs(amp.imag) < 1e-6 * abs(amp.real)

    def test_asymptotic_form_alone_misses_the_residual_gate(self):
        # the leading law at x in {10, 20, 40, 80} is already too rough for a 0.5 residual
        x = np.array([10.0, 20.0, 40.0, 80.0])
        _, resid = power_law_fit(x, (1 - np.cos(0.5 * x) / 0.75) / x**2)
        assert resid > 0.5

    def test_envelope_exponent(self):
        configs = [AtomPairConfig(1.0, w) for w in (10.0, 20.0, 40.0, 80.0)]
        slope, resid = tail_envelope_exponent(configs)
        assert -2.3 <= slope <= -1.7
        assert resid < 0.2
