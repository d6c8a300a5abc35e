"""Neutral-meson mixing, oscillation asymmetry and direct-CP rate differences.

The effective Hamiltonian lives in the CP basis (K1, K2):

    H = [[m1 - i g1/2,   +i ImM12 ],
         [ -i ImM12,   m2 - i g2/2]]

and flavour states are |K0> = (|K1> + |K2>)/sqrt2, |K0bar> = (|K1> - |K2>)/sqrt2.

Sign convention. With the +i ImM12 entry in the (1,2) slot, the oscillation
asymmetry evaluates to

    A = -2 ImM12 (g1 - g2) / ((m1 - m2)^2 + ((g1 - g2)/2)^2)

at first order in ImM12 (see :func:`kabir_asymmetry_formula`). When K1 is the
short-lived state (g1 > g2) this is minus the textbook expression written with
Delta m = m_S - m_L and Delta Gamma = Gamma_S - Gamma_L; when K2 is short
lived the two agree.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import CausalLabError

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class MesonSystem:
    m1: float
    m2: float
    gamma1: float
    gamma2: float
    imM12: float = 0.0

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError("widths gamma1, gamma2 must be positive")

    @property
    def short_is_k1(self) -> bool:
        """S labels the larger width; ties go to K1."""
        return self.gamma1 >= self.gamma2

    @property
    def delta_m(self) -> float:
        """``m_S - m_L``."""
        return self.m1 - self.m2 if self.short_is_k1 else self.m2 - self.m1

    @property
    def delta_gamma(self) -> float:
        """``Gamma_S - Gamma_L`` (never negative)."""
        return abs(self.gamma1 - self.gamma2)


class FlavorState(enum.Enum):
    K0 = "K0"
    K0BAR = "K0bar"

    @property
    def cp_components(self) -> np.ndarray:
        sign = 1.0 if self is FlavorState.K0 else -1.0
        return np.array([_SQRT_HALF, sign * _SQRT_HALF], dtype=complex)


@dataclass(frozen=True)
class ChannelPair:
    """Two isospin channels with strong phases ``delta`` and weak phases ``phi``."""

    A0: float
    A2: float
    delta0: float = 0.0
    delta2: float = 0.0
    phi0: float = 0.0
    phi2: float = 0.0

    def __post_init__(self):
        if self.A0 < 0 or self.A2 < 0:
            raise ValueError("channel magnitudes must be >= 0")


def effective_hamiltonian(system: MesonSystem) -> np.ndarray:
    """``M - i Gamma/2`` in the (K1, K2) basis."""
    x = system.imM12
    return np.array(
        [
            [complex(system.m1, -0.5 * system.gamma1), 1j * x],
            [-1j * x, complex(system.m2, -0.5 * system.gamma2)],
        ]
    )


def _evolution_matrix(h: np.ndarray, t: float) -> np.ndarray:
    # exp(-iHt) = exp(-i tau t) [cos(W t) 1 - i t sinc(W t) (H - tau 1)], W^2 = ((a-d)/2)^2 + bc;
    # the sinc form is regular at degenerate eigenvalues (W -> 0)
    tau = 0.5 * (h[0, 0] + h[1, 1])
    half = 0.5 * (h[0, 0] - h[1, 1])
    w = cmath.sqrt(half * half + h[0, 1] * h[1, 0])
    wt = w * t
    if abs(wt) < 1e-4:
        sinc = 1 - wt * wt / 6 + wt**4 / 120
        cos = 1 - wt * wt / 2 + wt**4 / 24
    else:
        sinc = cmath.sin(wt) / wt
        cos = cmath.cos(wt)
    traceless = h - tau * np.eye(2)
    return cmath.exp(-1j * tau * t) * (cos * np.eye(2) - 1j * t * sinc * traceless)


def evolve_flavor(system: MesonSystem, initial: FlavorState, t: float) -> tuple[complex, complex]:
    """Amplitudes ``(<K0|psi(t)>, <K0bar|psi(t)>)`` for a pure flavour start."""
    if t < 0:
        raise ValueError("t must be >= 0")
    u = _evolution_matrix(effective_hamiltonian(system), float(t))
    psi = u @ initial.cp_components
    return complex(_SQRT_HALF * (psi[0] + psi[1])), complex(_SQRT_HALF * (psi[0] - psi[1]))


def transition_probabilities(system: MesonSystem, t: float) -> tuple[float, float]:
    """``P(K0 -> K0bar)`` and ``P(K0bar -> K0)`` at time ``t``."""
    _, to_bar = evolve_flavor(system, FlavorState.K0, t)
    to_k0, _ = evolve_flavor(system, FlavorState.K0BAR, t)
    return abs(to_bar) ** 2, abs(to_k0) ** 2


def oscillation_asymmetry(system: MesonSystem, t: float) -> float:
    """Normalized rate difference of K0 -> K0bar versus K0bar -> K0."""
    p, pbar = transition_probabilities(system, t)
    if p < 1e-300 and pbar < 1e-300:
        raise CausalLabError(f"both oscillation rates vanish at t={t!r}; asymmetry undefined")
    return (p - pbar) / (p + pbar)


def kabir_asymmetry_formula(system: MesonSystem) -> float:
    """Leading-order, time-independent oscillation asymmetry.

    ``-s * 2 ImM12 dGamma / (dm^2 + (dGamma/2)^2)`` with ``dm = m_S - m_L``,
    ``dGamma = Gamma_S - Gamma_L`` and ``s = +1`` when K1 is the short-lived
    state, ``-1`` otherwise (the orientation fixed by the +i ImM12 entry).
    """
    dm, dg = system.delta_m, system.delta_gamma
    denom = dm * dm + 0.25 * dg * dg
    if denom == 0:
        raise CausalLabError("degenerate meson system: dm = dGamma = 0")
    s = 1.0 if system.short_is_k1 else -1.0
    return -s * 2.0 * system.imM12 * dg / denom


def decay_amplitude(channels: ChannelPair, conjugate_weak: bool = False) -> complex:
    """``A0 e^{i d0} e^{+-i p0} + A2 e^{i d2} e^{+-i p2}``; only weak phases flip."""
    s = -1.0 if conjugate_weak else 1.0
    return channels.A0 * cmath.exp(1j * (channels.delta0 + s * channels.phi0)) + channels.A2 * cmath.exp(
        1j * (channels.delta2 + s * channels.phi2)
    )


def decay_rate(channels: ChannelPair, conjugate_weak: bool = False) -> float:
    """``|decay_amplitude|^2`` written as ``A0^2 + A2^2 + 2 A0 A2 cos(relative phase)``.

    The relative phase is assembled as strong difference +- weak difference,
    so equal strong or equal weak phases give bitwise identical rates.
    """
    s = -1.0 if conjugate_weak else 1.0
    rel = (channels.delta0 - channels.delta2) + s * (channels.phi0 - channels.phi2)
    a0, a2 = channels.A0, channels.A2
    return a0 * a0 + a2 * a2 + 2.0 * a0 * a2 * math.cos(rel)


def cp_rate_difference(channels: ChannelPair) -> float:
    """``R(K0 -> pi pi) - R(K0bar -> pi pi)`` without mixing.

    Equals ``-4 A0 A2 sin(d0 - d2) sin(p0 - p2)``; the overall minus sign
    comes from expanding the two rates and is checked here to 1e-12.
    """
    diff = decay_rate(channels, False) - decay_rate(channels, True)
    closed = (
        -4.0
        * channels.A0
        * channels.A2
        * math.sin(channels.delta0 - channels.delta2)
        * math.sin(channels.phi0 - channels.phi2)
    )
    scale = max(1.0, (channels.A0 + channels.A2) ** 2)
    if abs(diff - closed) > 1e-12 * scale:
        raise CausalLabError(f"rate difference {diff!r} disagrees with closed form {closed!r}")
    return diff
