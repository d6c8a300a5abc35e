import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_lab.errors import CausalLabError
from causal_lab.flavor import (
    ChannelPair,
    FlavorState,
    MesonSystem,
    cp_rate_difference,
    decay_amplitude,
    decay_rate,
    effective_hamiltonian,
    evolve_flavor,
    kabir_asymmetry_formula,
    oscillation_asymmetry,
    transition_probabilities,
)

import oracles

REFERENCE = MesonSystem(m1=0.5, m2=0.51, gamma1=0.1, gamma2=0.005, imM12=1e-4)
# frozen after cross-checking against the evolved linear response below
KABIR_REFERENCE = -8.063660477453580e-3

phase = st.floats(-math.pi, math.pi)
magnitude = st.floats(0.0, 3.0)


def _first_order_amplitudes(system, t):
    """Dyson series in ImM12 to first order, in the (K1, K2) basis."""
    l1 = complex(system.m1, -0.5 * system.gamma1)
    l2 = complex(system.m2, -0.5 * system.gamma2)
    x = system.imM12

    def integral(la, lb):
        # int_0^t exp(-i la (t - s)) exp(-i lb s) ds
        d = lb - la
        return cmath.exp(-1j * la * t) * (cmath.exp(-1j * d * t) - 1) / (-1j * d)

    u = np.diag([cmath.exp(-1j * l1 * t), cmath.exp(-1j * l2 * t)]).astype(complex)
    u[0, 1] = -1j * (1j * x) * integral(l1, l2)
    u[1, 0] = -1j * (-1j * x) * integral(l2, l1)
    return u


class TestEvolution:
    def test_hamiltonian_diagonal_without_mixing(self):
        h = effective_hamiltonian(MesonSystem(0.5, 0.51, 0.1, 0.005))
        assert h[0, 1] == 0 and h[1, 0] == 0

    @pytest.mark.parametrize("state, expected", [(FlavorState.K0, (1, 0)), (FlavorState.K0BAR, (0, 1))])
    def test_initial_state(self, state, expected):
        amps = evolve_flavor(REFERENCE, state, 0.0)
        assert np.allclose(amps, expected, atol=1e-15)

    @pytest.mark.parametrize("t", [0.5, 5.0, 20.0, 80.0])
    def test_matches_expm(self, t):
        u = oracles.flavor_expm(effective_hamiltonian(REFERENCE), t)
        for state in FlavorState:
            psi = u @ state.cp_components
            ref = (math.sqrt(0.5) * (psi[0] + psi[1]), math.sqrt(0.5) * (psi[0] - psi[1]))
            assert np.allclose(evolve_flavor(REFERENCE, state, t), ref, rtol=0, atol=1e-13)

    @pytest.mark.parametrize("t", [1.0, 10.0, 40.0])
    def test_first_order_perturbation(self, t):
        u = _first_order_amplitudes(REFERENCE, t)
        exact = oracles.flavor_expm(effective_hamiltonian(REFERENCE), t)
        assert np.max(np.abs(u - exact)) < 10 * (REFERENCE.imM12 * t) ** 2 + 1e-15

    def test_degenerate_symmetric_system(self):
        sys = MesonSystem(0.5, 0.5, 0.1, 0.1)
        p, pbar = transition_probabilities(sys, 3.0)
        assert p == pytest.approx(pbar, abs=1e-15)

    def test_degenerate_eigenvalues_regular(self):
        sys = MesonSystem(0.5, 0.5, 0.1, 0.1, imM12=0.0)
        u = oracles.flavor_expm(effective_hamiltonian(sys), 7.0)
        assert np.allclose(evolve_flavor(sys, FlavorState.K0, 7.0)[0], 0.5 * (u[0, 0] + u[1, 1]), atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(
        g1=st.floats(0.001, 0.5),
        g2=st.floats(0.001, 0.5),
        dm=st.floats(-0.05, 0.05),
        x=st.floats(-0.01, 0.01),
    )
    def test_total_probability_non_increasing(self, g1, g2, dm, x):
        sys = MesonSystem(0.5, 0.5 + dm, g1, g2, x)
        totals = []
        for t in np.linspace(0, 50, 26):
            a, b = evolve_flavor(sys, FlavorState.K0, t)
            totals.append(abs(a) ** 2 + abs(b) ** 2)
        assert np.all(np.diff(totals) <= 1e-12)


class TestAsymmetry:
    def test_no_mixing_phase_no_asymmetry(self):
        sys = MesonSystem(0.5, 0.51, 0.1, 0.005, 0.0)
        for t in (1.0, 10.0, 50.0):
            assert oscillation_asymmetry(sys, t) == 0.0

    def test_equal_widths_suppressed(self):
        sys = MesonSystem(0.5, 0.51, 0.05, 0.05, 1e-4)
        bound = 1e-2 * abs(sys.imM12) / abs(sys.delta_m)
        for t in (5.0, 10.0, 50.0):
            assert abs(oscillation_asymmetry(sys, t)) < bound

    def test_reference_at_t10(self):
        assert oscillation_asymmetry(REFERENCE, 10.0) == pytest.approx(kabir_asymmetry_formula(REFERENCE), rel=0.05)

    def test_frozen_reference_value(self):
        assert kabir_asymmetry_formula(REFERENCE) == pytest.approx(KABIR_REFERENCE, rel=1e-12)
        assert abs(KABIR_REFERENCE) == pytest.approx(2e-4 * 0.095 / (0.01**2 + 0.0475**2), rel=1e-12)

    def test_formula_vanishes_without_width_difference(self):
        sys = MesonSystem(0.5, 0.51, 0.05, 0.05, 1e-4)
        assert kabir_asymmetry_formula(sys) == 0.0
        assert kabir_asymmetry_formula(MesonSystem(0.5, 0.51, 0.1, 0.005, 0.0)) == 0.0

    def test_orientation_sign(self):
        # swapping the roles of K1 and K2 keeps the value under the width-based S/L rule
        swapped = MesonSystem(0.51, 0.5, 0.005, 0.1, -1e-4)
        assert kabir_asymmetry_formula(swapped) == pytest.approx(kabir_asymmetry_formula(REFERENCE), rel=1e-12)
        assert oscillation_asymmetry(swapped, 10.0) == pytest.approx(oscillation_asymmetry(REFERENCE, 10.0), rel=1e-9)

    def test_degenerate_formula(self):
        with pytest.raises(CausalLabError):
            kabir_asymmetry_formula(MesonSystem(0.5, 0.5, 0.1, 0.1, 1e-4))

    def test_negative_time(self):
        with pytest.raises(ValueError):
            evolve_flavor(REFERENCE, FlavorState.K0, -1.0)


class TestDirectCP:
    def test_all_phases_zero(self):
        assert decay_amplitude(ChannelPair(1.0, 0.5)) == 1.5

    def test_weak_phase_flips_only(self):
        ch = ChannelPair(1.0, 0.0, delta0=1.0, phi0=0.2)
        assert abs(decay_amplitude(ch) - cmath.exp(1.2j)) < 1e-15
        assert abs(decay_amplitude(ch, conjugate_weak=True) - cmath.exp(0.8j)) < 1e-15

    def test_hand_expansion(self):
        ch = ChannelPair(1.0, 0.5, delta0=0.3)
        assert decay_rate(ch) == pytest.approx(1 + 0.25 + 2 * 0.5 * math.cos(0.3), abs=1e-15)

    def test_large_phase_example(self):
        ch = ChannelPair(1.0, 1.0, delta0=math.pi / 2, phi0=0.01)
        diff = cp_rate_difference(ch)
        direct = abs(decay_amplitude(ch)) ** 2 - abs(decay_amplitude(ch, True)) ** 2
        assert abs(diff) == pytest.approx(4 * math.sin(0.01), rel=1e-12)
        assert abs(diff - direct) < 1e-14

    @settings(max_examples=200, deadline=None)
    @given(a0=magnitude, a2=magnitude, d0=phase, d2=phase, p0=phase, p2=phase)
    def test_closed_form(self, a0, a2, d0, d2, p0, p2):
        ch = ChannelPair(a0, a2, d0, d2, p0, p2)
        ref = -4 * a0 * a2 * math.sin(d0 - d2) * math.sin(p0 - p2)
        assert abs(cp_rate_difference(ch) - ref) < 1e-12

    @given(a0=magnitude, a2=magnitude, d=phase, p0=phase, p2=phase)
    def test_equal_strong_phases_vanish(self, a0, a2, d, p0, p2):
        assert cp_rate_difference(ChannelPair(a0, a2, d, d, p0, p2)) == 0.0

    @given(a0=magnitude, a2=magnitude, d0=phase, d2=phase, p=phase)
    def test_equal_weak_phases_vanish(self, a0, a2, d0, d2, p):
        assert cp_rate_difference(ChannelPair(a0, a2, d0, d2, p, p)) == 0.0

    @given(a0=magnitude, a2=magnitude, d0=phase, d2=phase, p0=phase, p2=phase)
    def test_antisymmetries(self, a0, a2, d0, d2, p0, p2):
        base = cp_rate_difference(ChannelPair(a0, a2, d0, d2, p0, p2))
        flipped = cp_rate_difference(ChannelPair(a0, a2, d0, d2, -p0, -p2))
        swapped = cp_rate_difference(ChannelPair(a2, a0, d2, d0, p2, p0))
        assert abs(base + flipped) < 1e-14
        assert abs(base - swapped) < 1e-14
