"""Decay of a discrete level into a quasi-continuum (hbar = 1).

The full interaction-picture system is integrated:

    i dc_i/dt = <i|V|i> c_i + sum_f g_f exp(-i w_f t) c_f
    i dc_f/dt = g_f exp(+i w_f t) c_i,            w_f = E_f - E_i

with no continuum-continuum coupling. Under the Minus convention the
evolution uses ``-i d/dt`` and the time-dependent phases flip sign, so the
amplitudes come out complex conjugated. The exponential law, golden-rule
width and principal-value shift are predictions checked against this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import FitError
from .kernels import OdeProblem, integrate_ode
from .propagators import CausalPrescription

Coupling = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class ContinuumSpec:
    """Discrete level at ``E_i`` coupled to ``n_states`` equally spaced levels.

    The band runs from ``band_low`` to ``band_low + band_width``; by default
    it is centred on ``E_i``. ``coupling`` is a constant or a vectorized map
    from ``E_f`` to the real matrix element ``<f|V|i>``.
    """

    E_i: float = 0.0
    band_width: float = 4.0
    n_states: int = 401
    coupling: Coupling = 0.01
    diag_V: float = 0.0
    band_low: float | None = None

    def __post_init__(self):
        if not self.band_width > 0:
            raise ValueError("band_width must be positive")
        if int(self.n_states) != self.n_states or self.n_states < 3:
            raise ValueError("n_states must be an integer >= 3")
        if self.band_low is None:
            object.__setattr__(self, "band_low", self.E_i - 0.5 * self.band_width)

    @property
    def spacing(self) -> float:
        return self.band_width / (self.n_states - 1)

    @property
    def density(self) -> float:
        return 1.0 / self.spacing

    @property
    def energies(self) -> np.ndarray:
        return self.band_low + self.spacing * np.arange(self.n_states)

    def couplings(self, energies: np.ndarray | None = None) -> np.ndarray:
        e = self.energies if energies is None else np.asarray(energies, dtype=float)
        if callable(self.coupling):
            return np.broadcast_to(np.asarray(self.coupling(e), dtype=float), e.shape).copy()
        return np.full(e.shape, float(self.coupling))


@dataclass(frozen=True)
class AmplitudeTrajectory:
    times: np.ndarray
    c_i: np.ndarray
    c_f: np.ndarray  # shape (n_states, len(times))
    convention: CausalPrescription
    level_spacing: float = 0.0

    @property
    def norm(self) -> np.ndarray:
        return np.abs(self.c_i) ** 2 + np.sum(np.abs(self.c_f) ** 2, axis=0)


@dataclass(frozen=True)
class DecayFit:
    Gamma_fit: float
    DeltaE_fit: float
    fit_window: tuple[float, float]
    residual: float
    extras: dict = field(default_factory=dict, compare=False)


def _rhs(spec: ContinuumSpec, convention: CausalPrescription):
    s = convention.value
    w = spec.energies - spec.E_i
    g = spec.couplings()
    v = spec.diag_V

    def rhs(t, y):
        ci = y[0]
        cf = y[1:]
        phase = np.exp(-1j * s * w * t)
        out = np.empty_like(y)
        out[0] = -1j * s * (v * ci + np.dot(g * phase, cf))
        out[1:] = -1j * s * g * np.conj(phase) * ci
        return out

    return rhs


def evolve_amplitudes(
    spec: ContinuumSpec,
    convention: CausalPrescription,
    t_max: float,
    samples: int = 601,
    tolerance: float = 1e-9,
) -> AmplitudeTrajectory:
    """Integrate the coupled level + continuum system from ``c_i(0) = 1``."""
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    y0 = np.zeros(spec.n_states + 1, dtype=complex)
    y0[0] = 1.0
    problem = OdeProblem(_rhs(spec, convention), y0, (0.0, float(t_max)), tolerance)
    times, states = integrate_ode(problem, samples)
    return AmplitudeTrajectory(times, states[:, 0], states[:, 1:].T, convention, spec.spacing)


def golden_rule_width(spec: ContinuumSpec) -> float:
    """``2 pi |<f|V|i>|^2 rho`` with the coupling taken on shell."""
    lo, hi = spec.band_low, spec.band_low + spec.band_width
    if not lo <= spec.E_i <= hi:
        raise ValueError(f"E_i = {spec.E_i} lies outside the band [{lo}, {hi}]")
    g = float(spec.couplings(np.array([spec.E_i]))[0])
    return 2 * math.pi * g * g * spec.density


def energy_shift(spec: ContinuumSpec) -> float:
    """``<i|V|i> + P sum_f |<f|V|i>|^2 / (E_i - E_f)`` on the discrete grid.

    The grid point sitting exactly on shell is dropped; levels mirrored
    about ``E_i`` are summed in pairs first so that a symmetric band cancels
    exactly.
    """
    e = spec.energies
    g2 = spec.couplings() ** 2
    k = np.rint((e - spec.E_i) / spec.spacing).astype(int)
    on_grid = np.abs(e - spec.E_i - k * spec.spacing) <= 1e-9 * spec.spacing
    terms: dict[int, float] = {}
    rest = []
    for kk, grid, ef, w2 in zip(k, on_grid, e, g2):
        if grid and kk == 0:
            continue
        if grid:
            # exact offset k*dE so mirrored levels cancel bit for bit
            terms[int(kk)] = w2 / (-kk * spec.spacing)
        else:
            rest.append(w2 / (spec.E_i - ef))
    paired = 0.0
    unpaired = []
    for kk in sorted(terms, key=lambda x: (abs(x), x)):
        if kk > 0 and -kk in terms:
            paired += terms[-kk] + terms[kk]
        elif kk < 0 and -kk in terms:
            continue
        else:
            unpaired.append(terms[kk])
    return spec.diag_V + paired + math.fsum(unpaired) + math.fsum(rest)


def recurrence_time(spec: ContinuumSpec) -> float:
    """Revival time ``2 pi / dE`` of the discretized continuum."""
    return 2 * math.pi / spec.spacing


def default_fit_window(spec: ContinuumSpec) -> tuple[float, float]:
    """Skip the initial transient, stop well before the recurrence.

    Starts at ``min(0.5/Gamma, 0.05 T_rec)`` and ends at
    ``min(3/Gamma, 0.2 T_rec)``.
    """
    gamma = golden_rule_width(spec)
    if gamma <= 0:
        raise FitError("no decay expected: golden-rule width is zero")
    t_rec = recurrence_time(spec)
    return (min(0.5 / gamma, 0.05 * t_rec), min(0.2 * t_rec, 3.0 / gamma))


def fit_decay(traj: AmplitudeTrajectory, window: tuple[float, float]) -> DecayFit:
    """Straight-line fits of ``log|c_i|`` and the unwrapped phase of ``c_i``.

    ``Gamma_fit = -2 * slope(log|c_i|)``, ``DeltaE_fit = -slope(phase)``.
    A window reaching half the recurrence time is refused.
    """
    t0, t1 = float(window[0]), float(window[1])
    times = np.asarray(traj.times)
    if not (times[0] <= t0 < t1 <= times[-1]):
        raise ValueError(f"window {window} not inside simulated span [{times[0]}, {times[-1]}]")
    if traj.level_spacing > 0:
        t_rec = 2 * math.pi / traj.level_spacing
        if t1 >= 0.5 * t_rec:
            raise FitError(
                f"fit window ends at {t1:g}, within reach of the recurrence at {t_rec:g}; "
                "use a shorter window"
            )
    sel = (times >= t0) & (times <= t1)
    if sel.sum() < 3:
        raise ValueError("fit window must contain at least three samples")
    t = times[sel]
    c = np.asarray(traj.c_i)[sel]
    mod = np.abs(c)
    if np.any(mod == 0):
        raise FitError("|c_i| vanishes inside the fit window")
    logmod = np.log(mod)
    phase = np.unwrap(np.angle(c))
    a1, a0 = np.polyfit(t, logmod, 1)
    b1, _ = np.polyfit(t, phase, 1)
    resid = float(np.sqrt(np.mean((logmod - (a1 * t + a0)) ** 2)))
    return DecayFit(-2.0 * float(a1), -float(b1), (t0, t1), resid)


def mode_sum_propagator(
    energies,
    amplitudes_at_x,
    amplitudes_at_xprime,
    dt: float,
) -> complex:
    """``sum_n conj(psi_n(x')) psi_n(x) exp(-i E_n dt)``."""
    e = np.asarray(energies, dtype=float)
    psi_x = np.asarray(amplitudes_at_x, dtype=complex)
    psi_xp = np.asarray(amplitudes_at_xprime, dtype=complex)
    if not (e.shape == psi_x.shape == psi_xp.shape) or e.ndim != 1 or e.size == 0:
        raise ValueError("energies and amplitude lists must be 1-d with equal nonzero length")
    return complex(np.sum(np.conj(psi_xp) * psi_x * np.exp(-1j * e * dt)))
