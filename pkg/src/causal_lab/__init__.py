"""Numerical experiments on the arrow of causality in quantum field theory.

Submodules: ``kernels`` (quadrature, ODE, root finding), ``propagators``,
``decay``, ``flavor``, ``fermi``, ``merlin`` and the ``cli`` runner.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CausalLabError,
    ClassificationError,
    ExtrapolationError,
    FitError,
    IntegrandError,
    IntegrationError,
    OnShellError,
    RootFindingError,
)
from .kernels import DEFAULT_SCHEDULE, RegulatedValue, RegulatorSchedule  # noqa: E402
from .propagators import CausalPrescription, ScalarTheory, SpacetimePoint  # noqa: E402

__all__ = [
    "__version__",
    "CausalLabError",
    "ClassificationError",
    "ExtrapolationError",
    "FitError",
    "IntegrandError",
    "IntegrationError",
    "OnShellError",
    "RootFindingError",
    "DEFAULT_SCHEDULE",
    "RegulatedValue",
    "RegulatorSchedule",
    "CausalPrescription",
    "ScalarTheory",
    "SpacetimePoint",
]
