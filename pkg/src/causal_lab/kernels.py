"""Shared numerical machinery.

Regulated oscillatory quadrature with extrapolation of the damping regulator
to zero, adaptive integration of complex ODE systems, damped Newton iteration
in the complex plane and residues from trapezoidal contour integrals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ExtrapolationError, IntegrandError, IntegrationError, RootFindingError

# damping factor at which an infinite domain is cut off
TRUNCATION_LEVEL = 1e-12

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


@dataclass(frozen=True)
class RegulatorSchedule:
    """Decreasing list of damping strengths used to extrapolate to zero.

    Attributes
    ----------
    epsilons : tuple of float
        Strictly decreasing, positive regulator values.
    extrapolation_order : int
        Highest power of epsilon eliminated by the Richardson table.
    """

    epsilons: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3)
    extrapolation_order: int = 2

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if len(eps) < 2:
            raise ValueError("a regulator schedule needs at least two epsilons")
        if any(not math.isfinite(e) or e <= 0 for e in eps):
            raise ValueError(f"epsilons must be finite and positive, got {eps}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError(f"epsilons must be strictly decreasing, got {eps}")
        if int(self.extrapolation_order) < 1:
            raise ValueError("extrapolation_order must be a positive integer")

    def scaled(self, factor: float) -> "RegulatorSchedule":
        """Same schedule with every epsilon multiplied by ``factor``."""
        return RegulatorSchedule(tuple(e * factor for e in self.epsilons), self.extrapolation_order)


DEFAULT_SCHEDULE = RegulatorSchedule()


class RegulatedValue(NamedTuple):
    """Extrapolated integral with its error estimate and the Richardson table."""

    value: complex
    error: float
    table: list[list[complex]]


def _evaluate(f, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=complex)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    bad = ~np.isfinite(y)
    if bad.any():
        k = int(np.argmax(bad))
        raise IntegrandError(float(x.flat[k]), complex(y.flat[k]))
    return y


def damped_integral(
    f: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float],
    epsilon: float,
    panel_width: float = 0.5,
    nodes: int = 20,
    chunk: int = 1 << 20,
) -> complex:
    """Integrate ``exp(-epsilon*(x - a)) * f(x)`` over ``domain = (a, b)``.

    ``b`` may be ``math.inf``; the domain is then cut where the damping factor
    drops below ``TRUNCATION_LEVEL``. Composite Gauss-Legendre panels of width
    at most ``panel_width``; ``f`` must accept numpy arrays.
    """
    a, b = float(domain[0]), float(domain[1])
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if math.isinf(b):
        b = a - math.log(TRUNCATION_LEVEL) / epsilon
    if b <= a:
        raise ValueError(f"empty integration domain {domain}")
    n_panels = max(1, math.ceil((b - a) / panel_width))
    h = (b - a) / n_panels
    x0, w0 = _gauss_legendre(nodes)
    per_chunk = max(1, chunk // nodes)
    total = 0.0 + 0.0j
    for start in range(0, n_panels, per_chunk):
        stop = min(n_panels, start + per_chunk)
        left = a + h * np.arange(start, stop)
        x = (left[:, None] + 0.5 * h * (x0[None, :] + 1.0)).ravel()
        y = _evaluate(f, x) * np.exp(-epsilon * (x - a))
        total += 0.5 * h * np.sum(y.reshape(-1, nodes) @ w0)
    return complex(total)


def richardson_table(epsilons, values, order: int) -> list[list[complex]]:
    """Neville table extrapolating ``values(eps)`` polynomially to eps = 0."""
    table: list[list[complex]] = []
    for k, (ek, vk) in enumerate(zip(epsilons, values)):
        row = [complex(vk)]
        for j in range(1, min(k, order) + 1):
            ekj = epsilons[k - j]
            prev = table[k - 1][j - 1]
            row.append(row[j - 1] + (row[j - 1] - prev) * ek / (ekj - ek))
        table.append(row)
    return table


def extrapolate(epsilons, values, order: int) -> RegulatedValue:
    """Extrapolate a regulated sequence to eps -> 0+ with an error estimate.

    The estimate is the difference of the last two diagonal extrapolants.
    Raises ExtrapolationError when successive extrapolants move apart.
    """
    table = richardson_table(epsilons, values, order)
    diag = [row[-1] for row in table]
    diffs = [abs(b - a) for a, b in zip(diag, diag[1:])]
    value = diag[-1]
    scale = max(abs(v) for row in table for v in row)
    floor = 64 * np.finfo(float).eps * scale
    if len(diffs) >= 2 and diffs[-1] > diffs[-2] and diffs[-1] > floor:
        raise ExtrapolationError(
            f"regulator extrapolation diverges: successive differences {diffs}", table
        )
    return RegulatedValue(complex(value), float(diffs[-1]), table)


def regulated_oscillatory_integral(
    f: Callable[[np.ndarray], np.ndarray],
    domain: tuple[float, float],
    schedule: RegulatorSchedule = DEFAULT_SCHEDULE,
    panel_width: float = 0.5,
    nodes: int = 20,
) -> RegulatedValue:
    """Abel-regulated integral of an oscillatory ``f`` extrapolated to zero damping.

    Each epsilon of ``schedule`` gives a damped integral (see
    :func:`damped_integral`); the sequence is Richardson-extrapolated in powers
    of epsilon. ``panel_width`` should resolve the fastest oscillation of ``f``
    (a fraction of its period).

    Examples
    --------
    >>> r = regulated_oscillatory_integral(lambda t: np.exp(-2j * t), (0.0, math.inf))
    >>> abs(r.value - (-0.5j)) < 1e-6
    True
    """
    values = [
        damped_integral(f, domain, eps, panel_width=panel_width, nodes=nodes)
        for eps in schedule.epsilons
    ]
    return extrapolate(schedule.epsilons, values, schedule.extrapolation_order)


@dataclass(frozen=True)
class OdeProblem:
    """Complex first-order system ``dy/dt = right_hand_side(t, y)``."""

    right_hand_side: Callable[[float, np.ndarray], np.ndarray]
    initial_state: np.ndarray
    t_span: tuple[float, float]
    tolerance: float = 1e-9

    def __post_init__(self):
        y0 = np.atleast_1d(np.asarray(self.initial_state, dtype=complex))
        object.__setattr__(self, "initial_state", y0)
        if not self.t_span[0] < self.t_span[1]:
            raise ValueError(f"t_span must be increasing, got {self.t_span}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")

    @property
    def dimension(self) -> int:
        return self.initial_state.size


def integrate_ode(problem: OdeProblem, samples: int) -> tuple[np.ndarray, np.ndarray]:
    """Adaptive DOP853 solution sampled on a uniform grid.

    Returns ``(times, states)`` with ``states[k]`` the solution at
    ``times[k]``; both endpoints are included. The absolute tolerance is
    ``1e-2 * tolerance``.
    """
    if samples < 2:
        raise ValueError("samples must be >= 2")
    t0, t1 = problem.t_span
    times = np.linspace(t0, t1, samples)
    sol = solve_ivp(
        problem.right_hand_side,
        (t0, t1),
        problem.initial_state,
        method="DOP853",
        t_eval=times,
        rtol=problem.tolerance,
        atol=1e-2 * problem.tolerance,
    )
    if sol.status != 0:
        stalled = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(sol.message, stalled)
    return times, sol.y.T.copy()


def find_complex_root(
    g: Callable[[complex], complex],
    seed: complex,
    tol: float = 1e-12,
    max_iter: int = 100,
) -> complex:
    """Damped Newton iteration for ``g(z) = 0``.

    The derivative is a central difference with step ``1e-6*max(1, |z|)``;
    a step is halved until ``|g|`` decreases.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    z = complex(seed)
    gz = complex(g(z))
    for _ in range(max_iter):
        if abs(gz) < tol:
            return z
        h = 1e-6 * max(1.0, abs(z))
        dg = (complex(g(z + h)) - complex(g(z - h))) / (2 * h)
        if dg == 0:
            break
        step = -gz / dg
        for _ in range(40):
            z_new = z + step
            g_new = complex(g(z_new))
            if abs(g_new) < abs(gz):
                break
            step *= 0.5
        else:
            break
        z, gz = z_new, g_new
    if abs(gz) < tol:
        return z
    raise RootFindingError(z, abs(gz), seed)


def contour_residue(
    g: Callable[[complex], complex],
    center: complex,
    radius: float,
    panels: int = 256,
) -> complex:
    """``(1/2 pi i)`` times the contour integral of ``g`` around a circle.

    Trapezoid rule in the angle, which converges geometrically for functions
    analytic in an annulus around the circle.
    """
    if panels < 64:
        raise ValueError("panels must be >= 64")
    if not radius > 0:
        raise ValueError("radius must be positive")
    phase = np.exp(2j * np.pi * np.arange(panels) / panels)
    z = complex(center) + radius * phase
    vals = np.array([complex(g(zk)) for zk in z])
    return complex(radius * np.mean(vals * phase))
