"""Exception hierarchy for the q-TAZRP toolkit."""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from qtazrp.quadrature import QuadratureResult


class QTazrpError(Exception):
    """Base class for all errors raised by this package."""


class PoleError(QTazrpError, ZeroDivisionError):
    """A rational factor was evaluated at (or numerically on) one of its poles."""


class NonConvergence(QTazrpError):
    """Node doubling reached ``max_nodes`` without meeting the tolerance."""

    def __init__(self, message: str, result: QuadratureResult | None = None) -> None:
        super().__init__(message)
        self.result = result


class HorizonTooLong(QTazrpError, ValueError):
    """``R * t`` exceeds the cap beyond which e^{Rt} cancellation ruins doubles."""


class StateSpaceTooLarge(QTazrpError):
    """The oracle window would enumerate more states than the cap allows."""
