"""Pole structure of the higher-derivative scalar propagator.

    iD(q^2) = i / (q^2 - q^4/M^2 + Sigma(q^2))

has a light pole near ``q^2 = 0`` and a heavy one near ``q^2 = M^2``. With
``Im Sigma > 0`` the light pole sits below the real axis with residue ``+i``
(the usual +i eps orientation) while the heavy pole sits above it with
residue ``-i``: a finite-width copy of the prescription-flipped propagator,
the Merlin mode. Residues are those of the map ``q^2 -> iD(q^2)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ClassificationError, OnShellError, RootFindingError
from .kernels import contour_residue, find_complex_root


class PoleKind(enum.Enum):
    NORMAL = "Normal"
    MERLIN = "Merlin"


@dataclass(frozen=True)
class HigherDerivativeTheory:
    """Heavy scale ``M`` and self energy.

    ``self_energy`` defaults to the constant ``i*gamma``. A user-supplied map
    is checked for ``Im Sigma >= 0`` on a grid of real ``0 < q^2 <= 4 M^2``.
    """

    M: float
    gamma: float = 0.0
    self_energy: Callable[[complex], complex] | None = None

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("M must be positive")
        if self.self_energy is None:
            if self.gamma < 0:
                raise ValueError("gamma < 0 violates unitarity (Im Sigma must be >= 0)")
            return
        grid = np.linspace(0.0, 4.0 * self.M**2, 401)[1:]
        im = np.array([complex(self.self_energy(complex(q2))).imag for q2 in grid])
        if np.any(im < 0):
            bad = grid[int(np.argmax(im < 0))]
            raise ValueError(f"Im Sigma < 0 at q^2 = {bad:g} violates unitarity")

    def sigma(self, q2: complex) -> complex:
        if self.self_energy is None:
            return 1j * self.gamma
        return complex(self.self_energy(q2))

    def denominator(self, q2: complex) -> complex:
        q2 = complex(q2)
        return q2 - q2 * q2 / self.M**2 + self.sigma(q2)

    @property
    def gamma_at_pole(self) -> float:
        """``gamma_M = Im Sigma(M^2)``."""
        return self.sigma(complex(self.M**2)).imag


@dataclass(frozen=True)
class PoleReport:
    location: complex
    residue: complex
    classification: PoleKind


def full_propagator(theory: HigherDerivativeTheory, q_squared: complex) -> complex:
    """``i / (q^2 - q^4/M^2 + Sigma(q^2))``."""
    d = theory.denominator(q_squared)
    if d == 0:
        raise OnShellError(f"propagator evaluated on a pole at q^2 = {q_squared!r}")
    return 1j / d


def classify_residue(report: PoleReport, tol: float = 1e-12) -> PoleKind:
    """Normal or Merlin from the residue sign, cross-checked against the half-plane.

    Merlin iff ``Im(residue) < 0``; the pole must then lie above the real
    axis (below it for Normal). A pole on the real axis (zero width) is
    classified by the residue alone.
    """
    res = report.residue
    if res.imag == 0:
        raise ClassificationError(f"residue {res!r} has no imaginary part to classify")
    kind = PoleKind.MERLIN if res.imag < 0 else PoleKind.NORMAL
    im = report.location.imag
    scale = max(1.0, abs(report.location))
    if abs(im) > tol * scale:
        by_plane = PoleKind.MERLIN if im > 0 else PoleKind.NORMAL
        if by_plane is not kind:
            raise ClassificationError(
                f"pole at {report.location!r} with residue {res!r}: half-plane says "
                f"{by_plane.value}, residue says {kind.value}; not a Lee-Wick configuration"
            )
    return kind


def find_poles(theory: HigherDerivativeTheory, tol: float = 1e-13) -> list[PoleReport]:
    """The light and heavy poles, from Newton seeds ``0`` and ``M^2``.

    Residues come from a 256-panel contour of radius a quarter of the pole
    separation.
    """
    m2 = theory.M**2
    locations = []
    for seed in (0.0, m2):
        try:
            locations.append(find_complex_root(theory.denominator, seed, tol=tol * max(1.0, m2)))
        except RootFindingError as exc:
            raise RootFindingError(exc.last, exc.residual, seed) from None
    radius = 0.25 * abs(locations[1] - locations[0])
    if radius == 0:
        raise RootFindingError(locations[0], 0.0, m2)
    reports = []
    for loc in locations:
        res = contour_residue(lambda z: full_propagator(theory, z), loc, radius, panels=256)
        provisional = PoleReport(loc, res, PoleKind.NORMAL)
        reports.append(PoleReport(loc, res, classify_residue(provisional)))
    return reports


def partial_fraction_check(M: float, q_squared: complex) -> tuple[complex, complex]:
    """Both sides of ``1/(q^2 - q^4/M^2) = 1/q^2 - 1/(q^2 - M^2)``."""
    q2 = complex(q_squared)
    m2 = M * M
    if q2 == 0 or q2 == m2:
        raise OnShellError(f"q^2 = {q2!r} sits on a pole")
    lhs = 1.0 / (q2 - q2 * q2 / m2)
    rhs = 1.0 / q2 - 1.0 / (q2 - m2)
    return lhs, rhs
