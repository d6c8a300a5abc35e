"""Scalar propagators under the two causal prescriptions.

Metric (+,-,-,-), hbar = c = 1. Coordinate-space values are reported with the
``iD`` normalization: ``total`` is ``i D_F(x)``, which for the Plus
prescription equals the positive-energy kernel

    K(t, r) = 1/(4 pi^2 r) * int_0^inf dq q sin(q r)/E_q exp(-i E_q t - gamma t/(2 E_q))

evaluated at ``|t|``. The Minus prescription gives the complex conjugate.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import OnShellError
from .kernels import DEFAULT_SCHEDULE, RegulatedValue, RegulatorSchedule, regulated_oscillatory_integral


class CausalPrescription(enum.Enum):
    """Quantization convention: Plus is exp(+iS) / +i eps, Minus is exp(-iS) / -i eps."""

    PLUS = +1
    MINUS = -1

    def flip(self) -> "CausalPrescription":
        return CausalPrescription(-self.value)

    @classmethod
    def parse(cls, text: str) -> "CausalPrescription":
        key = str(text).strip().lower()
        if key in ("plus", "+"):
            return cls.PLUS
        if key in ("minus", "-"):
            return cls.MINUS
        raise ValueError(f"unknown prescription {text!r} (expected 'plus' or 'minus')")


@dataclass(frozen=True)
class ScalarTheory:
    """Scalar field of mass ``m`` and width parameter ``gamma`` (= M*Gamma)."""

    m: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.m) and self.m >= 0):
            raise ValueError(f"mass must be finite and >= 0, got {self.m}")
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be finite and >= 0, got {self.gamma}")


@dataclass(frozen=True)
class SpacetimePoint:
    t: float
    r: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.r)):
            raise ValueError("spacetime coordinates must be finite")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")

    @property
    def interval(self) -> float:
        """``s^2 = t^2 - r^2``; negative for spacelike separation."""
        return self.t * self.t - self.r * self.r


@dataclass(frozen=True)
class PropagatorDecomposition:
    """Branch values of ``iD`` at one point and their theta-assembled total.

    ``forward`` and ``backward`` are the two time-ordered branches evaluated
    at the same signed ``t``; ``backward`` is always the conjugate of
    ``forward``. ``error`` is the quadrature error estimate of the kernel.
    """

    forward: complex
    backward: complex
    total: complex
    error: float = 0.0


def momentum_propagator(
    theory: ScalarTheory,
    prescription: CausalPrescription,
    q_squared: float,
    epsilon: float = 1e-12,
) -> complex:
    """``+-i / (q^2 - m^2 +- i eta)`` with ``eta = gamma`` if gamma > 0 else ``epsilon``.

    The Plus value comes from a scaled complex division (no underflow for
    tiny widths); Minus is its exact complex conjugate.
    """
    eta = theory.gamma if theory.gamma > 0 else epsilon
    if eta < 0:
        raise ValueError("epsilon must be >= 0")
    d = q_squared - theory.m * theory.m
    if d == 0 and eta == 0:
        raise OnShellError(f"propagator evaluated on shell at q^2 = {q_squared!r} with no width")
    plus = 1j / complex(d, eta)
    return plus if prescription is CausalPrescription.PLUS else plus.conjugate()


def _radial_kernel(theory: ScalarTheory, t: float, r: float):
    m2 = theory.m * theory.m
    gamma = theory.gamma

    def f(q):
        e = np.sqrt(q * q + m2)
        with np.errstate(divide="ignore", invalid="ignore"):
            damp = np.exp(-gamma * t / (2 * e)) if gamma > 0 else 1.0
            phase = np.exp(-1j * e * t)
            weight = q * np.sin(q * r) / e if r > 0 else q * q / e
            out = weight * phase * damp
        # massless q = 0 node: weight vanishes, damping -> 0
        return np.where(q == 0, 0.0, out)

    return f


def positive_energy_kernel(
    theory: ScalarTheory,
    t: float,
    r: float,
    schedule: RegulatorSchedule = DEFAULT_SCHEDULE,
) -> RegulatedValue:
    """The kernel ``K(t, r)`` at signed ``t`` (``gamma`` must vanish if t < 0).

    The angular integral is done analytically; the radial one by the
    regulated oscillatory quadrature, with the ``r -> 0`` limit kernel
    ``q^2/E`` at ``r = 0``.
    """
    if t < 0 and theory.gamma > 0:
        raise ValueError("the decaying kernel is only defined for t >= 0")
    omega = r + abs(t)
    panel = 0.5 if omega == 0 else min(0.5, math.pi / omega)
    res = regulated_oscillatory_integral(
        _radial_kernel(theory, t, r), (0.0, math.inf), schedule, panel_width=panel
    )
    norm = 4 * math.pi**2 * (r if r > 0 else 1.0)
    return RegulatedValue(res.value / norm, res.error / norm, res.table)


def coordinate_forward_part(
    theory: ScalarTheory,
    point: SpacetimePoint,
    schedule: RegulatorSchedule = DEFAULT_SCHEDULE,
) -> RegulatedValue:
    """Forward-propagating part ``D^for(t, r)`` for ``t >= 0``.

    Positive energy ``exp(-i E t)`` with the decay envelope
    ``exp(-gamma t/(2E))`` for a resonance.
    """
    if point.t < 0:
        raise ValueError("coordinate_forward_part requires t >= 0")
    return positive_energy_kernel(theory, point.t, point.r, schedule)


def coordinate_propagator(
    theory: ScalarTheory,
    prescription: CausalPrescription,
    point: SpacetimePoint,
    schedule: RegulatorSchedule = DEFAULT_SCHEDULE,
) -> PropagatorDecomposition:
    """Time-ordered decomposition of ``iD_{+-F}`` at ``point``.

    With ``K = coordinate_forward_part`` at ``|t|``, the positive-energy
    branch value at signed ``t`` is ``K`` for ``t >= 0`` and ``conj(K)`` for
    ``t < 0`` (for gamma > 0 this continuation keeps the decaying envelope).
    Plus: forward is that branch, backward its conjugate. Minus: the roles
    swap, positive energy runs backwards. ``total`` picks the branch by the
    sign of ``t``; at ``t = 0`` both branches coincide.
    """
    kernel = coordinate_forward_part(theory, SpacetimePoint(abs(point.t), point.r), schedule)
    k = kernel.value
    positive = k if point.t >= 0 else k.conjugate()
    if point.t == 0:
        # both branches agree at t = 0; K(0, r) is real up to quadrature noise
        positive = complex(k.real, 0.0)
    if prescription is CausalPrescription.PLUS:
        forward, backward = positive, positive.conjugate()
    else:
        backward, forward = positive, positive.conjugate()
    total = forward if point.t >= 0 else backward
    return PropagatorDecomposition(forward, backward, total, kernel.error)


def commutator_function(
    theory: ScalarTheory,
    point: SpacetimePoint,
    schedule: RegulatorSchedule = DEFAULT_SCHEDULE,
) -> RegulatedValue:
    """Free-field commutator ``Delta(x) = Delta+(x) - Delta+(-x)``.

    Both Wightman functions are computed by independent quadratures of the
    positive-energy kernel (at ``t`` and ``-t``; the width is ignored). For
    spacelike points the exact result is zero.
    """
    free = ScalarTheory(theory.m, 0.0)
    plus = positive_energy_kernel(free, point.t, point.r, schedule)
    minus = positive_energy_kernel(free, -point.t, point.r, schedule)
    return RegulatedValue(plus.value - minus.value, plus.error + minus.error, plus.table)
