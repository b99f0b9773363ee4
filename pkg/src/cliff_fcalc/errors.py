"""Exception types shared across the package.

Every precondition failure raises one of these rather than returning a
large residual, so callers can tell "the identity is violated" apart from
"the inputs were outside the contract".
"""


class CliffFcalcError(Exception):
    """Base class for all package-specific errors."""


class NotInSlice(CliffFcalcError):
    """A Clifford number was expected to lie in a slice plane but does not."""


class OutOfRange(CliffFcalcError):
    """Integer arguments outside the documented domain of a combinatorial map."""


class EvenDimension(CliffFcalcError):
    """An odd number of imaginary units was required."""


class OddDimension(CliffFcalcError):
    """Raised by the general pseudo-equation when n is even or n = 3."""


class HParityMismatch(CliffFcalcError):
    """The parity of the Sce exponent h does not match the requested branch."""


class BadSpec(CliffFcalcError):
    """A spectrum specification does not match the requested tuple size."""


class SpectralPoint(CliffFcalcError):
    """An inversion was attempted at (or numerically on top of) the spectrum."""


class SameSphere(CliffFcalcError):
    """Two points lie on the same sphere, where the two-point kernels degenerate."""


class DivergentRegion(CliffFcalcError):
    """Series evaluation requested outside its disk of convergence."""


class SpectrumNotEnclosed(CliffFcalcError):
    """A functional-calculus contour fails to enclose the full spectrum."""


class SpectrumOnContour(CliffFcalcError):
    """A contour passes too close to a spectral sphere."""


class NotVectorOperator(CliffFcalcError):
    """The projector theorems require a tuple with vanishing scalar part."""


class PointOutsideContour(CliffFcalcError):
    """A point that must lie strictly inside the contour does not."""
