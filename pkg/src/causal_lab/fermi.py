"""Fermi two-atom problem: excitation transfer through a massless scalar field.

Two identical two-level atoms at rest, separation ``r``, gap ``omega0``,
monopole coupling ``lam``. To second order the amplitude for
|e1 g2> -> |g1 e2> after a window ``dtau`` is

    A = -(lam^2/4) int_{-dtau}^{dtau} dxi (dtau - |xi|) exp(-i omega0 xi) K(xi, r)

with ``K`` the massless Feynman function in the ``iD`` normalization,

    K(xi, r) = 1 / (4 pi^2 (r^2 - (|xi| - i eps)^2)),

which is exactly what the radial quadrature of the propagators module gives
at ``m = 0`` with Abel damping ``exp(-eps q)``. The regulator is
extrapolated to zero for each window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ExtrapolationError, FitError
from .kernels import DEFAULT_SCHEDULE, RegulatedValue, RegulatorSchedule, extrapolate
from .propagators import CausalPrescription

WAVE_ZONE = 10.0
# smallest max/min ratio of omega0*r accepted by the tail fit (three octaves)
MIN_SPAN = 8.0


@dataclass(frozen=True)
class AtomPairConfig:
    """Atom separation, gap and coupling.

    ``regulator`` is in time units; when omitted the default schedule is
    scaled by ``min(r, 1/omega0)`` so the damping stays small against both
    the light-crossing time and the atomic period.
    """

    r: float
    omega0: float
    lam: float = 1.0
    regulator: RegulatorSchedule | None = None

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("r must be positive")
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive")

    @property
    def schedule(self) -> RegulatorSchedule:
        if self.regulator is not None:
            return self.regulator
        return DEFAULT_SCHEDULE.scaled(min(self.r, 1.0 / self.omega0))

    @property
    def wave_number(self) -> float:
        """``omega0 * r``."""
        return self.omega0 * self.r


@dataclass(frozen=True)
class CausalityScan:
    delta_taus: np.ndarray
    amplitudes: np.ndarray
    errors: np.ndarray
    r: float
    omega0: float
    precausal_ratio: float = field(default=float("nan"))


def massless_feynman_kernel(
    xi,
    r: float,
    epsilon: float,
    prescription: CausalPrescription = CausalPrescription.PLUS,
):
    """``iD_{+-F}`` of a massless scalar at time separation ``xi``, distance ``r``.

    Forward branch ``1/(4 pi^2 (r^2 - (xi - i eps)^2))`` for ``xi >= 0``,
    backward branch its conjugate at ``-xi``; together an even function of
    ``xi``. Minus gives the complex conjugate. Accepts arrays.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    a = np.abs(np.asarray(xi, dtype=float))
    z = a - 1j * epsilon
    k = 1.0 / (4 * math.pi**2 * (r * r - z * z))
    if prescription is CausalPrescription.MINUS:
        k = np.conj(k)
    return k if np.ndim(k) else complex(k)


def _check_schedule(config: AtomPairConfig, delta_tau: float) -> None:
    gap = abs(delta_tau - config.r)
    eps_max = config.schedule.epsilons[0]
    if not eps_max < 0.05 * gap:
        raise ExtrapolationError(
            f"window dtau={delta_tau:g} lies within the regulator width of the light cone "
            f"r={config.r:g} (largest eps {eps_max:g} >= 0.05*|dtau - r| = {0.05 * gap:g}); "
            "refine the regulator schedule",
            [],
        )


def reduced_amplitude(
    config: AtomPairConfig,
    delta_tau: float,
    epsilon: float,
    prescription: CausalPrescription = CausalPrescription.PLUS,
) -> complex:
    """The one-dimensional window integral at a fixed regulator ``epsilon``."""
    if not delta_tau > 0:
        raise ValueError("delta_tau must be positive")
    if config.lam == 0:
        return 0j
    r, w0, dt = config.r, config.omega0, float(delta_tau)

    # even kernel: fold xi -> |xi|, exp(-i w0 xi) -> cos(w0 xi)
    def integrand(x):
        return 2.0 * (dt - x) * math.cos(w0 * x) * massless_feynman_kernel(x, r, epsilon, prescription)

    points = sorted(
        {p for p in (r - 50 * epsilon, r - 5 * epsilon, r, r + 5 * epsilon, r + 50 * epsilon) if 0 < p < dt}
    )
    n_osc = int(w0 * dt / math.pi) + 1
    value, _ = quad(
        integrand,
        0.0,
        dt,
        complex_func=True,
        points=points or None,
        limit=max(200, 50 * n_osc),
        epsabs=1e-15,
        epsrel=1e-12,
    )
    return -0.25 * config.lam**2 * complex(value)


def excitation_amplitude(
    config: AtomPairConfig,
    delta_tau: float,
    prescription: CausalPrescription = CausalPrescription.PLUS,
) -> RegulatedValue:
    """Transition amplitude after ``delta_tau``, extrapolated to zero regulator."""
    if not delta_tau > 0:
        raise ValueError("delta_tau must be positive")
    if config.lam == 0:
        return RegulatedValue(0j, 0.0, [])
    _check_schedule(config, delta_tau)
    sched = config.schedule
    values = [reduced_amplitude(config, delta_tau, eps, prescription) for eps in sched.epsilons]
    try:
        return extrapolate(sched.epsilons, values, sched.extrapolation_order)
    except ExtrapolationError as exc:
        raise ExtrapolationError(
            f"{exc} at dtau={delta_tau:g}; refine the regulator schedule", exc.table
        ) from None


def causality_scan(
    config: AtomPairConfig,
    delta_taus,
    prescription: CausalPrescription = CausalPrescription.PLUS,
) -> CausalityScan:
    """Amplitudes over increasing windows plus the precausal ratio.

    ``precausal_ratio`` is ``max |A|`` over windows shorter than ``r``
    divided by ``|A(1.5 r)|`` (NaN if no such window was scanned).
    """
    dts = np.asarray(delta_taus, dtype=float)
    if dts.ndim != 1 or dts.size == 0:
        raise ValueError("delta_taus must be a non-empty list")
    if np.any(dts <= 0) or np.any(np.diff(dts) <= 0):
        raise ValueError("delta_taus must be positive and strictly increasing")
    results = [excitation_amplitude(config, dt, prescription) for dt in dts]
    amps = np.array([res.value for res in results])
    errs = np.array([res.error for res in results])
    before = dts < config.r
    ratio = float("nan")
    if before.any():
        ref = excitation_amplitude(config, 1.5 * config.r, prescription).value
        ratio = float(np.max(np.abs(amps[before])) / abs(ref))
    return CausalityScan(dts, amps, errs, config.r, config.omega0, ratio)


def power_law_fit(x, y) -> tuple[float, float]:
    """Least-squares slope of ``log|y|`` against ``log x`` and the RMS residual."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.abs(np.asarray(y)))
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = float(np.sqrt(np.mean((ly - (slope * lx + icpt)) ** 2)))
    return float(slope), resid


def precausal_fraction(config: AtomPairConfig, delta_tau_ratio: float = 0.5) -> float:
    """``|A(ratio * r)| / |A(2 r)|``: precausal signal against the causal one."""
    if not 0 < delta_tau_ratio < 1:
        raise ValueError("delta_tau_ratio must lie in (0, 1)")
    pre = excitation_amplitude(config, delta_tau_ratio * config.r).value
    causal = excitation_amplitude(config, 2.0 * config.r).value
    return abs(pre) / abs(causal)


def tail_scaling_exponent(configs, delta_tau_ratio: float = 0.5, max_residual: float = 0.5) -> float:
    """Power of ``omega0 r`` governing the precausal amplitude.

    Needs at least four wave-zone configurations whose ``omega0 r`` spans a
    factor of ``MIN_SPAN`` or more.
    """
    configs = list(configs)
    if len(configs) < 4:
        raise ValueError("need at least four configurations")
    x = np.array([c.wave_number for c in configs])
    if x.min() < WAVE_ZONE:
        raise ValueError(f"all configurations must lie in the wave zone omega0*r >= {WAVE_ZONE:g}")
    if x.max() / x.min() < MIN_SPAN * (1 - 1e-12):
        raise ValueError(f"omega0*r values must span at least a factor {MIN_SPAN:g}")
    y = np.array([precausal_fraction(c, delta_tau_ratio) for c in configs])
    slope, resid = power_law_fit(x, y)
    if resid > max_residual:
        raise FitError(f"power-law residual {resid:.3f} exceeds {max_residual}: regime not asymptotic")
    return slope


def tail_envelope_exponent(configs, ratios=None) -> tuple[float, float]:
    """Power law of the precausal envelope, averaged over window ratios.

    At a single ``dtau/r`` the precausal amplitude is ``f(x)/x^2`` with
    ``f(x) ~ 1 - cos(x dtau/r)/(1 - (dtau/r)^2)``, which nearly vanishes at
    some ``x = omega0 r``; a handful of points then gives an erratic slope.
    The RMS over a band of ratios removes the oscillation. Returns
    ``(slope, residual)``.
    """
    configs = list(configs)
    ratios = np.linspace(0.2, 0.8, 13) if ratios is None else np.asarray(ratios, dtype=float)
    x = np.array([c.wave_number for c in configs])
    env = []
    for c in configs:
        causal = abs(excitation_amplitude(c, 2.0 * c.r).value)
        pre = [abs(excitation_amplitude(c, rho * c.r).value) / causal for rho in ratios]
        env.append(math.sqrt(float(np.mean(np.square(pre)))))
    return power_law_fit(x, env)
