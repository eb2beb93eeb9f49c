"""Typed errors shared across the package.

The CLI maps these onto process exit codes: input validation failures
(InvalidPolynomialError subclasses) exit 3, parse failures exit 2, and
InternalInvariantError exits 4.  Everything carries a plain-language
message naming the offending object.
"""


class PellcfError(Exception):
    """Base class for package errors."""


class InvalidPolynomialError(PellcfError, ValueError):
    """The input polynomial is outside the expandable class."""


class OddDegreeError(InvalidPolynomialError):
    """Square roots of odd-degree polynomials leave Q((1/t))."""


class NotASquareLeadError(InvalidPolynomialError):
    """The leading coefficient must be a square in Q for the +branch root."""


class PerfectSquareError(InvalidPolynomialError):
    """Perfect squares have terminating expansions and are rejected."""


class DegreeTooSmallError(InvalidPolynomialError):
    """Constants cannot be expanded."""


class ThinRecordError(PellcfError):
    """An analysis needed full polynomials but met a thinned record."""


class TranscriptFormatError(PellcfError):
    """A transcript file is malformed or from an unsupported version."""


class ChooseAnotherPrimeError(PellcfError):
    """The chosen prime degenerates the reduction; retry with a new one."""


class InternalInvariantError(PellcfError):
    """An internal exactness invariant failed; this is a bug, not bad input."""
