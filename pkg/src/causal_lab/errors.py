"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CausalLabError(Exception):
    """Base class for numerical failures raised by causal_lab."""


class IntegrandError(CausalLabError):
    """A non-finite integrand value was encountered."""

    def __init__(self, abscissa: float, value: complex):
        self.abscissa = abscissa
        self.value = value
        super().__init__(f"non-finite integrand value {value!r} at abscissa {abscissa!r}")


class ExtrapolationError(CausalLabError):
    """Regulator extrapolation did not converge.

    ``table`` holds the partial Richardson table (list of rows) so callers can
    inspect what went wrong.
    """

    def __init__(self, message: str, table: list[list[complex]]):
        self.table = table
        super().__init__(message)


class IntegrationError(CausalLabError):
    """The adaptive ODE integrator stalled."""

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (stalled at t={time!r})")


class RootFindingError(CausalLabError):
    """Newton iteration hit its cap without meeting the tolerance."""

    def __init__(self, last: complex, residual: float, seed: complex | None = None):
        self.last = last
        self.residual = residual
        self.seed = seed
        where = f" from seed {seed!r}" if seed is not None else ""
        super().__init__(
            f"Newton iteration did not converge{where}: last iterate {last!r}, |g|={residual:.3e}"
        )


class OnShellError(CausalLabError):
    """A propagator was evaluated exactly on its pole."""


class FitError(CausalLabError):
    """A decay or scaling fit cannot be trusted."""


class ClassificationError(CausalLabError):
    """Pole half-plane and residue sign disagree."""
