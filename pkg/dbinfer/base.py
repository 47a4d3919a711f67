"""Errors and exact number helpers shared across dbinfer.

Notes
-----
Every error raised by the library is a ``jsonschema.ValidationError`` so callers
can catch invalid documents and invalid inputs the same way.
"""
import fractions
import numbers
import typing

import jsonschema
import numpy

ValidationError = jsonschema.ValidationError
Fraction = fractions.Fraction


class DesignError(ValidationError):
    """A design violates one of its invariants."""


class EnumerationCapError(ValidationError):
    """An exact operation was asked of a design too large to enumerate."""


class ExposureError(ValidationError):
    """A mapping is undefined for an assignment."""


class OutcomeError(ValidationError):
    """An outcome was requested outside a schedule's domain."""


class PositivityError(ValidationError):
    """Some units never receive the requested exposure.

Attributes
----------
units : tuple
    Zero based indices of the offending units.
    """

    def __init__(self, message, units=()):
        super().__init__(message)
        self.units = tuple(int(i) for i in units)


class AssumptionError(ValidationError):
    """An operation was refused because NURVA does not hold."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class RefusalError(ValidationError):
    """The unbiased variance estimator is unavailable; zero joint probabilities exist."""

    def __init__(self, message, pairs=()):
        super().__init__(message)
        self.pairs = tuple(pairs)


def as_fraction(value) -> Fraction:
    """Coerce a number, numeric string or ``{"num", "den"}`` mapping to a Fraction.

Floats are read through their shortest decimal representation so 0.1 becomes 1/10.

Examples
--------

    >>> as_fraction(0.5)
    Fraction(1, 2)
    >>> as_fraction({'num': 3, 'den': 10})
    Fraction(3, 10)
    >>> as_fraction('-99')
    Fraction(-99, 1)
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, typing.Mapping):
        return Fraction(int(value["num"]), int(value["den"]))
    if isinstance(value, (bool, numpy.bool_)):
        return Fraction(int(value))
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, numbers.Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, (float, numpy.floating)):
        if not numpy.isfinite(value):
            raise ValidationError(f"{value} is not a finite number.")
        return Fraction(repr(float(value)))
    return Fraction(str(value))


def exact_array(values) -> numpy.ndarray:
    """An object array of Fractions with the shape of ``values``."""
    array = numpy.asarray(values, dtype=object)
    out = numpy.empty(array.shape, dtype=object)
    for index, value in numpy.ndenumerate(array):
        out[index] = as_fraction(value)
    return out


def is_exact(array) -> bool:
    return numpy.asarray(array).dtype == object


def indicator(mask, exact=True) -> numpy.ndarray:
    """A 0/1 array from a boolean mask, python ints when exact."""
    mask = numpy.asarray(mask, dtype=bool)
    return mask.astype(object) * 1 if exact else mask.astype(float)


def to_float(value):
    if isinstance(value, numpy.ndarray):
        return value.astype(float)
    return None if value is None else float(value)


def decimal(value, digits=12) -> str:
    """Render a number with a fixed number of significant digits.

    >>> decimal(Fraction(1, 3))
    '0.333333333333'
    """
    return format(float(value), f".{digits}g")


def as_assignment(z) -> typing.Tuple[int, ...]:
    """A hashable assignment vector of python ints."""
    return tuple(int(x) for x in numpy.asarray(z).ravel())
