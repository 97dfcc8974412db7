"""Exception hierarchy shared by all fractconv modules."""

from __future__ import annotations


class FractConvError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgument(FractConvError, ValueError):
    pass


class OutOfDomain(FractConvError, ValueError):
    pass


class ShapeMismatch(FractConvError, ValueError):
    pass


class ContractivityError(FractConvError, ValueError):
    """Raised when a scale vector has sup |alpha_n| >= 1."""


class AddressCapExceeded(FractConvError, ValueError):
    pass


class SingularNodeSystem(FractConvError, ArithmeticError):
    pass
