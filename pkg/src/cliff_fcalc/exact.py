"""Exact combinatorics behind the functional calculus.

Everything in this module is big-integer or big-rational arithmetic; no
floats. The coefficients defined here reappear on the numeric side (series
expansions, monomial images of the calculus), where they are converted to
float only at the point of use.

Conventions: n is the (odd) number of imaginary units, h = (n - 1) / 2 the
Sce exponent, and gamma_n the normalization constant of the kernel family,

    gamma_n = (-1)^h * 2^(n-1) * (h!)^2 .
"""

from fractions import Fraction
from math import factorial

from .errors import EvenDimension, OutOfRange


def sce_exponent(n: int) -> int:
    """Return h = (n - 1) / 2 for odd n >= 3."""
    if n < 3 or n % 2 == 0:
        raise EvenDimension(f"n must be odd and >= 3, got {n}")
    return (n - 1) // 2


def gamma_constant(n: int) -> int:
    """Exact value of gamma_n = (-1)^h 2^(n-1) (h!)^2, h = (n-1)/2.

    >>> [gamma_constant(n) for n in (3, 5, 7)]
    [-4, 64, -2304]
    """
    h = sce_exponent(n)
    return (-1) ** h * 2 ** (n - 1) * factorial(h) ** 2


def k_coeff_exact(m: int, h: int, ell: int) -> int:
    """Coefficient K_ell(m, h) of the iterated-Laplacian monomial expansion.

        K_ell(m, h) = 4^h (-1)^h h * (m-ell-h+1)! (ell+h-2)!
                      / ((ell-1)! (m-ell-2h+1)!)

    The division is exact: the quotient (m-ell-h+1)!/(m-ell-2h+1)! is a
    product of h consecutive integers and (ell+h-2)!/(ell-1)! a product of
    h-1 consecutive integers.
    """
    if h < 1:
        raise OutOfRange(f"h must be >= 1, got {h}")
    if m < 2 * h:
        raise OutOfRange(f"m must be >= 2h = {2 * h}, got {m}")
    if not 1 <= ell <= m - 2 * h + 1:
        raise OutOfRange(f"ell must be in [1, {m - 2 * h + 1}], got {ell}")
    num = factorial(m - ell - h + 1) * factorial(ell + h - 2)
    den = factorial(ell - 1) * factorial(m - ell - 2 * h + 1)
    q, r = divmod(num, den)
    if r:  # cannot happen; guards the exactness claim
        raise ArithmeticError(f"non-exact division for K_{ell}({m},{h})")
    return 4**h * (-1) ** h * h * q


def laplacian_diagonal_constant(h: int) -> int:
    """The value of the h-fold Laplacian on x^(2h): h 4^h (-1)^h h! (h-1)!.

    Coincides with K_1(2h, h) and, by h * h! (h-1)! = (h!)^2, with
    gamma_constant(2h + 1).
    """
    if h < 1:
        raise OutOfRange(f"h must be >= 1, got {h}")
    return h * 4**h * (-1) ** h * factorial(h) * factorial(h - 1)


def appendix_identity_check(m: int, h: int) -> bool:
    """Exact check of the factorial summation identity

        sum_{ell=1}^{m-2h+1} (m-ell-h+1)! (ell+h-2)! / ((ell-1)! (m-ell-2h+1)!)
            = (h-1)! h! m! / ((2h)! (m-2h)!)

    for m >= 2h. Both sides are evaluated in exact rational arithmetic and
    compared for equality; no tolerance is involved.
    """
    if h < 1:
        raise OutOfRange(f"h must be >= 1, got {h}")
    if m < 2 * h:
        raise OutOfRange(f"m must be >= 2h = {2 * h}, got {m}")
    lhs = Fraction(0)
    for ell in range(1, m - 2 * h + 2):
        lhs += Fraction(
            factorial(m - ell - h + 1) * factorial(ell + h - 2),
            factorial(ell - 1) * factorial(m - ell - 2 * h + 1),
        )
    rhs = Fraction(
        factorial(h - 1) * factorial(h) * factorial(m),
        factorial(2 * h) * factorial(m - 2 * h),
    )
    return lhs == rhs


def pochhammer(a, k: int) -> Fraction:
    """Rising factorial (a)_k = a (a+1) ... (a+k-1) in exact rationals.

    >>> pochhammer(1, 5) == factorial(5)
    True
    >>> pochhammer(Fraction(1, 2), 2)
    Fraction(3, 4)
    """
    if k < 0:
        raise OutOfRange(f"k must be >= 0, got {k}")
    out = Fraction(1)
    a = Fraction(a)
    for j in range(k):
        out *= a + j
    return out


def gamma_series_coherence(n: int) -> bool:
    """Check gamma_n == h 4^h (-1)^h h! (h-1)! exactly.

    This is the equality that makes the lowest surviving series term of the
    kernel expansion carry exactly the kernel's own normalization, and hence
    makes the full-spectrum spectral projector equal the identity.
    """
    h = sce_exponent(n)
    return gamma_constant(n) == laplacian_diagonal_constant(h)
