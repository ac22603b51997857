"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class KondratievError(Exception):
    """Base class for every error raised by this package."""


class InvalidParams(KondratievError, ValueError):
    """Parameters violate a documented invariant or precondition."""

    def __init__(self, message: str, field: str | None = None) -> None:
        super().__init__(message)
        self.field = field


class MixedIntegrability(InvalidParams):
    """Factors with different integrability and no rule that mixes them."""


class PointOutsideDomain(InvalidParams):
    """A point was passed that does not lie in the open domain."""


class ZeroWeight(InvalidParams):
    """A point on the singular set, where the weight vanishes."""


class OrderExceeded(InvalidParams):
    """A derivative order above what the function family supports."""


class SingularPoint(InvalidParams):
    """Evaluation at a point where the function is not defined."""


class DegeneratePolygon(InvalidParams):
    """The base polygon of a polyhedral cone is not a valid convex polygon."""


class NumericalFailure(KondratievError, ArithmeticError):
    """A numerical procedure did not reach its accuracy target."""


class QuadratureFailure(NumericalFailure):
    """Two quadrature resolutions disagree beyond the tolerance."""


class SuiteUnknown(KondratievError, KeyError):
    """No verification suite is registered under the given id."""
