"""Resolvent operators and kernels of the functional calculus.

The cast, for a commuting paravector tuple T and a slice point s:

* pseudo-resolvent   Q_s(T) = (s^2 I - s(T + bar T) + T bar T)^(-1)
* S-resolvents       S_L = (s I - bar T) Q_s,   S_R = Q_s (s I - bar T)
* F-resolvents       F_n^L = gamma_n (s I - bar T) Q_s^((n+1)/2), mirrored right
* scalar kernels     the same formulas with a paravector x in place of T
* series forms       sums of iterated-Laplacian monomial images against s powers

Because T + bar T = 2 T0 and T bar T = T0^2 + sum T_l^2 for commuting
components, the quadratic polynomial under Q_s is slice-complex, and all
inversions reduce to one complex d x d solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    CliffordNumber,
    Paravector,
    SlicePoint,
    cn_mul,
    pv_conjugate,
    pv_modulus,
    slice_embed,
)
from .errors import DivergentRegion, EvenDimension, SameSphere, SpectralPoint
from .exact import gamma_constant, k_coeff_exact, laplacian_diagonal_constant, sce_exponent
from .operators import (
    CliffordOperator,
    CommutingTuple,
    SliceComplexOperator,
    cm_mul,
    cm_norm,
    slice_complex_invert,
)

SAME_SPHERE_TOL = 1e-12


@dataclass(frozen=True)
class GammaConstant:
    """gamma_n = (-1)^((n-1)/2) 2^(n-1) (((n-1)/2)!)^2, exact."""

    n: int
    value: int


def gamma(n: int) -> GammaConstant:
    """The kernel normalization constant, exact big-integer arithmetic.

    >>> gamma(3).value, gamma(5).value, gamma(7).value
    (-4, 64, -2304)
    """
    return GammaConstant(n, gamma_constant(n))


def point_operator(s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """s as the multiplication operator s I on the space of t."""
    return CliffordOperator.from_slice_point(s, t.d)


def quadratic_polynomial(s: SlicePoint, t: CommutingTuple) -> SliceComplexOperator:
    """s^2 I - s (T + bar T) + T bar T in slice-complex form.

    Uses T + bar T = 2 T0 and T bar T = T0^2 + sum T_l^2, which hold exactly
    for commuting components; the float commutator noise this sidesteps is
    recorded separately by CommutingTuple.commutator_noise.
    """
    z = s.as_complex()
    mat = (z * z) * np.eye(t.d) - (2.0 * z) * t.components[0] + t.scalar_square()
    return SliceComplexOperator.from_complex(mat, s.unit)


def pseudo_resolvent_slice(s: SlicePoint, t: CommutingTuple, power: int = 1) -> SliceComplexOperator:
    """Q_s(T)^power in slice-complex form; SpectralPoint near the spectrum."""
    inv = slice_complex_invert(quadratic_polynomial(s, t))
    if power == 1:
        return inv
    return inv.power(power)


def pseudo_resolvent(s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """Q_s(T), blade support within span{1, J}."""
    return pseudo_resolvent_slice(s, t).to_clifford_operator(t.n)


def s_resolvent_left(s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """(s I - bar T) Q_s(T)."""
    factor = point_operator(s, t) - t.conjugate_operator()
    return cm_mul(factor, pseudo_resolvent(s, t))


def s_resolvent_right(s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """Q_s(T) (s I - bar T)."""
    factor = point_operator(s, t) - t.conjugate_operator()
    return cm_mul(pseudo_resolvent(s, t), factor)


def f_resolvent_left(n: int, s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """gamma_n (s I - bar T) Q_s(T)^((n+1)/2)."""
    _check_dimension(n, t)
    g = float(gamma_constant(n))
    q = pseudo_resolvent_slice(s, t, (n + 1) // 2).to_clifford_operator(t.n)
    factor = point_operator(s, t) - t.conjugate_operator()
    return g * cm_mul(factor, q)


def f_resolvent_right(n: int, s: SlicePoint, t: CommutingTuple) -> CliffordOperator:
    """gamma_n Q_s(T)^((n+1)/2) (s I - bar T)."""
    _check_dimension(n, t)
    g = float(gamma_constant(n))
    q = pseudo_resolvent_slice(s, t, (n + 1) // 2).to_clifford_operator(t.n)
    factor = point_operator(s, t) - t.conjugate_operator()
    return g * cm_mul(q, factor)


def _check_dimension(n: int, t: CommutingTuple):
    if n % 2 == 0 or n < 3:
        raise EvenDimension(f"n must be odd and >= 3, got {n}")
    if n != t.n:
        raise ValueError(f"kernel dimension n={n} does not match tuple n={t.n}")


def _kernel_power(s: SlicePoint, x: Paravector, exponent: int) -> CliffordNumber:
    """(s^2 - 2 Re(x) s + |x|^2)^(-exponent), computed in the plane of s."""
    z = s.as_complex()
    w = z * z - 2.0 * x.real * z + pv_modulus(x) ** 2
    if w == 0:
        raise SameSphere("kernel denominator vanished: x on the sphere of s")
    return slice_embed(SlicePoint.from_complex(w ** (-exponent), s.unit))


def _guard_same_sphere(s: SlicePoint, x: Paravector):
    if (
        abs(s.u - x.real) < SAME_SPHERE_TOL
        and abs(abs(s.v) - x.vector_modulus) < SAME_SPHERE_TOL
    ):
        raise SameSphere(
            f"s = ({s.u}, {s.v}) lies on the sphere [x] with "
            f"center {x.real}, radius {x.vector_modulus}"
        )


def s_kernel_left(s: SlicePoint, x: Paravector) -> CliffordNumber:
    """Slice Cauchy kernel, form II: (s - bar x)(s^2 - 2 Re(x) s + |x|^2)^(-1)."""
    _guard_same_sphere(s, x)
    factor = slice_embed(s) - pv_conjugate(x).to_clifford()
    return cn_mul(factor, _kernel_power(s, x, 1))


def s_kernel_right(s: SlicePoint, x: Paravector) -> CliffordNumber:
    """(s^2 - 2 Re(x) s + |x|^2)^(-1) (s - bar x)."""
    _guard_same_sphere(s, x)
    factor = slice_embed(s) - pv_conjugate(x).to_clifford()
    return cn_mul(_kernel_power(s, x, 1), factor)


def f_kernel_left(n: int, s: SlicePoint, x: Paravector) -> CliffordNumber:
    """gamma_n (s - bar x)(s^2 - 2 Re(x) s + |x|^2)^(-(n+1)/2)."""
    h = sce_exponent(n)
    _guard_same_sphere(s, x)
    factor = slice_embed(s) - pv_conjugate(x).to_clifford()
    return float(gamma_constant(n)) * cn_mul(factor, _kernel_power(s, x, h + 1))


def f_kernel_right(n: int, s: SlicePoint, x: Paravector) -> CliffordNumber:
    """gamma_n (s^2 - 2 Re(x) s + |x|^2)^(-(n+1)/2) (s - bar x)."""
    h = sce_exponent(n)
    _guard_same_sphere(s, x)
    factor = slice_embed(s) - pv_conjugate(x).to_clifford()
    return float(gamma_constant(n)) * cn_mul(_kernel_power(s, x, h + 1), factor)


class _PowerCache:
    """Powers of a Clifford element (number or operator) by repeated product."""

    def __init__(self, one, base, mul):
        self._items = [one, base]
        self._mul = mul

    def __getitem__(self, k: int):
        while len(self._items) <= k:
            self._items.append(self._mul(self._items[-1], self._items[1]))
        return self._items[k]


def laplacian_power_monomial(n: int, m: int, x: Paravector) -> CliffordNumber:
    """Image of x^m under the h-fold Laplacian, h = (n-1)/2.

    Zero for m < 2h; the constant h 4^h (-1)^h h! (h-1)! for m = 2h; and the
    K-coefficient bilinear form in x, bar x for m > 2h.
    """
    h = sce_exponent(n)
    if m < 0:
        raise ValueError(f"monomial degree must be >= 0, got {m}")
    if m < 2 * h:
        return CliffordNumber(x.n)
    if m == 2 * h:
        return CliffordNumber.scalar(x.n, float(laplacian_diagonal_constant(h)))
    xp = _PowerCache(CliffordNumber.scalar(x.n, 1.0), x.to_clifford(), cn_mul)
    xbp = _PowerCache(
        CliffordNumber.scalar(x.n, 1.0), pv_conjugate(x).to_clifford(), cn_mul
    )
    acc = CliffordNumber(x.n)
    for ell in range(1, m - 2 * h + 2):
        coeff = float(k_coeff_exact(m, h, ell))
        acc = acc + coeff * cn_mul(xp[m - 2 * h - ell + 1], xbp[ell - 1])
    return acc


def f_kernel_series_terms(n: int, s: SlicePoint, x: Paravector):
    """Iterator of (m, term) for the expansion sum_m (Delta^h x^m) s^(-1-m).

    Terms start at m = 2h and continue indefinitely; the caller decides where
    to truncate. Raises DivergentRegion up front when |x| >= |s|, since the
    partial sums then approximate nothing.
    """
    h = sce_exponent(n)
    if pv_modulus(x) >= s.modulus():
        raise DivergentRegion(
            f"|x| = {pv_modulus(x):.6g} >= |s| = {s.modulus():.6g}"
        )
    return _f_kernel_series_gen(h, s, x)


def _f_kernel_series_gen(h: int, s: SlicePoint, x: Paravector):
    xp = _PowerCache(CliffordNumber.scalar(x.n, 1.0), x.to_clifford(), cn_mul)
    xbp = _PowerCache(
        CliffordNumber.scalar(x.n, 1.0), pv_conjugate(x).to_clifford(), cn_mul
    )
    z = s.as_complex()
    m = 2 * h
    while True:
        spow = slice_embed(SlicePoint.from_complex(z ** (-1 - m), s.unit))
        if m == 2 * h:
            term = float(laplacian_diagonal_constant(h)) * spow
        else:
            poly = CliffordNumber(x.n)
            for ell in range(1, m - 2 * h + 2):
                coeff = float(k_coeff_exact(m, h, ell))
                poly = poly + coeff * cn_mul(xp[m - 2 * h - ell + 1], xbp[ell - 1])
            term = cn_mul(poly, spow)
        yield m, term
        m += 1


def f_kernel_series_left(n: int, s: SlicePoint, x: Paravector, M: int) -> CliffordNumber:
    """Partial sum sum_{m=2h}^{M} (Delta^h x^m) s^(-1-m).

    Converges to f_kernel_left geometrically with ratio |x|/|s|; raises
    DivergentRegion when that ratio is >= 1.
    """
    acc = CliffordNumber(x.n)
    for m, term in f_kernel_series_terms(n, s, x):
        if m > M:
            break
        acc = acc + term
    return acc


def f_resolvent_series_left(n: int, s: SlicePoint, t: CommutingTuple, M: int) -> CliffordOperator:
    """Operator form of the series: sum K_l(m,h) T^(m-2h-l+1) barT^(l-1) s^(-1-m)."""
    h = sce_exponent(n)
    _check_dimension(n, t)
    tnorm = cm_norm(t.operator())
    if tnorm >= s.modulus():
        raise DivergentRegion(f"||T|| = {tnorm:.6g} >= |s| = {s.modulus():.6g}")
    eye = CliffordOperator.identity(t.n, t.d)
    tp = _PowerCache(eye, t.operator(), cm_mul)
    tbp = _PowerCache(eye, t.conjugate_operator(), cm_mul)
    z = s.as_complex()
    acc = CliffordOperator.zero(t.n, t.d)
    for m in range(2 * h, M + 1):
        spow = CliffordOperator.from_slice_point(
            SlicePoint.from_complex(z ** (-1 - m), s.unit), t.d
        )
        if m == 2 * h:
            poly = float(laplacian_diagonal_constant(h)) * eye
        else:
            poly = CliffordOperator.zero(t.n, t.d)
            for ell in range(1, m - 2 * h + 2):
                coeff = float(k_coeff_exact(m, h, ell))
                poly = poly + coeff * cm_mul(tp[m - 2 * h - ell + 1], tbp[ell - 1])
        acc = acc + cm_mul(poly, spow)
    return acc


def lr_f_resolvent_residual(n: int, s: SlicePoint, t: CommutingTuple) -> tuple[float, float]:
    """Relative residuals of the one-point F-resolvent equations.

    Left:   F_n^L(s,T) s - T F_n^L(s,T) = gamma_n Q_s(T)^((n-1)/2)
    Right:  s F_n^R(s,T) - F_n^R(s,T) T = gamma_n Q_s(T)^((n-1)/2)

    Both scaled by max(1, largest term norm).
    """
    _check_dimension(n, t)
    g = float(gamma_constant(n))
    s_op = point_operator(s, t)
    t_op = t.operator()
    rhs = g * pseudo_resolvent_slice(s, t, (n - 1) // 2).to_clifford_operator(t.n)
    fl = f_resolvent_left(n, s, t)
    fr = f_resolvent_right(n, s, t)
    left_terms = [cm_mul(fl, s_op), cm_mul(t_op, fl), rhs]
    right_terms = [cm_mul(s_op, fr), cm_mul(fr, t_op), rhs]
    left_res = cm_norm(left_terms[0] - left_terms[1] - rhs)
    right_res = cm_norm(right_terms[0] - right_terms[1] - rhs)
    left_scale = max(1.0, *(cm_norm(term) for term in left_terms))
    right_scale = max(1.0, *(cm_norm(term) for term in right_terms))
    return left_res / left_scale, right_res / right_scale
