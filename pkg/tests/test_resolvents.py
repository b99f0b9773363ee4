"""Resolvent operators, scalar kernels, and their series expansions.

The finite-difference checks at the bottom tie the operator formulas to
actual analysis rather than to themselves: the n=3 kernel must be the 4-D
Laplacian of the slice Cauchy kernel, and both kernels must satisfy the
slice Cauchy-Riemann system in s.
"""

import numpy as np
import pytest

from cliff_fcalc.algebra import (
    CliffordNumber,
    Paravector,
    SlicePoint,
    SliceUnit,
    cn_mul,
    pv_modulus,
    slice_embed,
)
from cliff_fcalc.errors import DivergentRegion, EvenDimension, SameSphere
from cliff_fcalc.exact import sce_exponent
from cliff_fcalc.operators import (
    CliffordOperator,
    cm_mul,
    cm_norm,
    make_commuting_tuple,
)
from cliff_fcalc.resolvents import (
    f_kernel_left,
    f_kernel_right,
    f_kernel_series_left,
    f_kernel_series_terms,
    f_resolvent_left,
    f_resolvent_right,
    f_resolvent_series_left,
    gamma,
    laplacian_power_monomial,
    lr_f_resolvent_residual,
    point_operator,
    pseudo_resolvent,
    pseudo_resolvent_slice,
    quadratic_polynomial,
    s_kernel_left,
    s_kernel_right,
    s_resolvent_left,
    s_resolvent_right,
)

RNG = np.random.default_rng(2024)


def _slice_point(n, seed, u=1.3, v=1.8):
    rng = np.random.default_rng(seed)
    return SlicePoint(u, v, SliceUnit(n, rng.standard_normal(n)))


def test_gamma_wrapper():
    assert (gamma(3).value, gamma(5).value, gamma(7).value) == (-4, 64, -2304)


@pytest.mark.parametrize("n,d", [(3, 3), (5, 4), (7, 2)])
def test_pseudo_resolvent_inverts_quadratic(n, d):
    t = make_commuting_tuple(n, d, seed=n + d)
    s = _slice_point(n, seed=1)
    q = pseudo_resolvent(s, t)
    quad = quadratic_polynomial(s, t).to_clifford_operator(n)
    eye = CliffordOperator.identity(n, d)
    assert cm_norm(cm_mul(q, quad) - eye) < 1e-11
    assert cm_norm(cm_mul(quad, q) - eye) < 1e-11


@pytest.mark.parametrize("n,d", [(3, 3), (5, 3)])
def test_s_resolvent_equations(n, d):
    """S_L^-1(s,T) s - T S_L^-1(s,T) = I and the mirrored right version."""
    t = make_commuting_tuple(n, d, seed=17)
    s = _slice_point(n, seed=2)
    s_op = point_operator(s, t)
    t_op = t.operator()
    eye = CliffordOperator.identity(n, d)
    left = s_resolvent_left(s, t)
    right = s_resolvent_right(s, t)
    assert cm_norm(cm_mul(left, s_op) - cm_mul(t_op, left) - eye) < 1e-11
    assert cm_norm(cm_mul(s_op, right) - cm_mul(right, t_op) - eye) < 1e-11


@pytest.mark.parametrize("n", [3, 5, 7])
def test_f_resolvent_defining_product(n):
    """F_n^L = gamma_n (s I - bar T) Q_s^((n+1)/2), expanded by hand here."""
    d = 2
    t = make_commuting_tuple(n, d, seed=23)
    s = _slice_point(n, seed=3)
    g = float(gamma(n).value)
    q = pseudo_resolvent(s, t)
    qpow = CliffordOperator.identity(n, d)
    for _ in range((n + 1) // 2):
        qpow = cm_mul(qpow, q)
    factor = point_operator(s, t) - t.conjugate_operator()
    expected_left = g * cm_mul(factor, qpow)
    expected_right = g * cm_mul(qpow, factor)
    scale = cm_norm(expected_left)
    assert cm_norm(f_resolvent_left(n, s, t) - expected_left) / scale < 1e-12
    assert cm_norm(f_resolvent_right(n, s, t) - expected_right) / scale < 1e-12


@pytest.mark.parametrize("n", [5, 7])
def test_lr_f_resolvent_residuals(n):
    t = make_commuting_tuple(n, 4, seed=31)
    s = _slice_point(n, seed=4)
    left, right = lr_f_resolvent_residual(n, s, t)
    assert left < 1e-12
    assert right < 1e-12


def test_kernel_rejects_sphere_point():
    unit = SliceUnit(3, [1.0, 0.0, 0.0])
    x = Paravector(3, [0.5, 0.3, 0.4, 0.0])
    s = SlicePoint(0.5, 0.5, unit)  # |vec(x)| = 0.5 and same real part
    with pytest.raises(SameSphere):
        s_kernel_left(s, x)


def test_kernel_dimension_gate():
    t = make_commuting_tuple(3, 2, seed=0)
    s = _slice_point(3, seed=0)
    with pytest.raises(EvenDimension):
        f_resolvent_left(4, s, t)
    with pytest.raises(ValueError):
        f_resolvent_left(5, s, t)


@pytest.mark.parametrize("n", [3, 5, 7])
def test_kernel_series_converges(n):
    """Ratio 0.5 must give ~0.5^M decay and agree with the closed form."""
    s = _slice_point(n, seed=5)
    rng = np.random.default_rng(n)
    direction = rng.standard_normal(n + 1)
    direction /= np.linalg.norm(direction)
    x = Paravector(n, 0.5 * s.modulus() * direction)
    closed = f_kernel_left(n, s, x)
    err = abs(f_kernel_series_left(n, s, x, 80) - closed) / abs(closed)
    assert err < 1e-10
    # truncating 20 terms earlier costs roughly 2^20
    err40 = abs(f_kernel_series_left(n, s, x, 40) - closed) / abs(closed)
    assert 1e-14 < err40 < 1e-6


@pytest.mark.parametrize("n", [3, 5])
def test_kernel_series_exact_at_origin(n):
    h = sce_exponent(n)
    s = _slice_point(n, seed=6)
    zero = Paravector(n, np.zeros(n + 1))
    gap = abs(f_kernel_series_left(n, s, zero, 2 * h) - f_kernel_left(n, s, zero))
    assert gap < 1e-14


def test_kernel_series_divergence_flagged():
    s = _slice_point(3, seed=7)
    x = Paravector(3, [s.modulus(), 0.5, 0.0, 0.0])
    with pytest.raises(DivergentRegion):
        f_kernel_series_terms(3, s, x)
    with pytest.raises(DivergentRegion):
        f_kernel_series_left(3, s, x, 20)


def test_series_terms_match_partial_sums():
    n = 5
    s = _slice_point(n, seed=8)
    x = Paravector(n, [0.2, 0.3, -0.1, 0.25, 0.0, 0.1])
    acc = CliffordNumber(n)
    for m, term in f_kernel_series_terms(n, s, x):
        if m > 14:
            break
        acc = acc + term
    assert abs(acc - f_kernel_series_left(n, s, x, 14)) == 0


@pytest.mark.parametrize("n", [3, 5])
def test_operator_series_matches_resolvent(n):
    d = 2
    t = make_commuting_tuple(n, d, seed=41, spectrum_spec="random-uniform[-0.4,0.4]")
    s = _slice_point(n, seed=9, u=1.6, v=2.1)
    series = f_resolvent_series_left(n, s, t, M=70)
    direct = f_resolvent_left(n, s, t)
    assert cm_norm(series - direct) / cm_norm(direct) < 1e-9
    with pytest.raises(DivergentRegion):
        big = make_commuting_tuple(n, d, seed=42, spectrum_spec="random-uniform[-9,9]")
        f_resolvent_series_left(n, SlicePoint(0.5, 0.5, s.unit), big, M=10)


def test_laplacian_monomial_below_threshold_is_zero():
    x = Paravector(5, [0.3, 0.1, -0.2, 0.4, 0.0, 0.2])
    for m in range(0, 4):
        assert abs(laplacian_power_monomial(5, m, x)) == 0.0


@pytest.mark.parametrize("n,m", [(3, 2), (3, 3), (3, 4), (3, 6), (5, 4), (5, 6)])
def test_laplacian_monomial_against_finite_differences(n, m):
    """Delta^h x^m via nested central differences over R^(n+1), h = 1, 2.

    Step 1e-2 with the second-difference stencil applied h times; the
    comparison tolerance scales with the magnitude of the result.
    """
    h = sce_exponent(n)
    rng = np.random.default_rng(m * 7 + n)
    x0 = rng.uniform(-0.8, 0.8, size=n + 1)
    step = 1e-2

    def power(components):
        acc = CliffordNumber.scalar(n, 1.0)
        base = Paravector(n, components).to_clifford()
        for _ in range(m):
            acc = cn_mul(acc, base)
        return acc

    def laplace(f):
        def out(components):
            total = CliffordNumber(n)
            base = f(components)
            for j in range(n + 1):
                e = np.zeros(n + 1)
                e[j] = step
                total = total + (
                    f(components + e) + f(components - e) - 2.0 * base
                ) * (1.0 / (step * step))
            return total

        return out

    func = power
    for _ in range(h):
        func = laplace(func)
    numeric = func(x0)
    closed = laplacian_power_monomial(n, m, x0 if False else Paravector(n, x0))
    scale = max(1.0, abs(closed))
    assert abs(numeric - closed) / scale < 5e-3


def test_dsf_laplacian_of_cauchy_kernel():
    """n=3: the 4-D Laplacian of S_L^-1(s, .) is the F-kernel, pointwise.

    Central differences with step 1e-3 at 10 random points; tolerance 1e-4.
    """
    n = 3
    step = 1e-3
    rng = np.random.default_rng(99)
    unit = SliceUnit(n, rng.standard_normal(n))
    s = SlicePoint(1.4, 1.1, unit)
    for _ in range(10):
        x = Paravector(n, rng.uniform(-0.5, 0.5, size=n + 1))
        base = s_kernel_left(s, x)
        lap = CliffordNumber(n)
        for j in range(n + 1):
            e = np.zeros(n + 1)
            e[j] = step
            plus = s_kernel_left(s, Paravector(n, x.components + e))
            minus = s_kernel_left(s, Paravector(n, x.components - e))
            lap = lap + (plus + minus - 2.0 * base) * (1.0 / (step * step))
        assert abs(lap - f_kernel_left(n, s, x)) < 1e-4


@pytest.mark.parametrize("maker,side", [
    (s_kernel_left, "right"),
    (s_kernel_right, "left"),
    (lambda s, x: f_kernel_left(5, s, x), "right"),
    (lambda s, x: f_kernel_right(5, s, x), "left"),
])
def test_kernels_satisfy_slice_cauchy_riemann(maker, side):
    """In s, on its slice: du K + dv K * I = 0 (left kernels, right system)
    and du K + I * dv K = 0 (right kernels, left system). Central
    differences, step 1e-4, relative residual below 1e-6."""
    n = 5
    rng = np.random.default_rng(55)
    unit = SliceUnit(n, rng.standard_normal(n))
    x = Paravector(n, rng.uniform(-0.4, 0.4, size=n + 1))
    imag = slice_embed(SlicePoint(0.0, 1.0, unit))
    step = 1e-4
    u0, v0 = 1.2, 0.8

    def K(u, v):
        return maker(SlicePoint(u, v, unit), x)

    du = (K(u0 + step, v0) - K(u0 - step, v0)) * (0.5 / step)
    dv = (K(u0, v0 + step) - K(u0, v0 - step)) * (0.5 / step)
    if side == "right":
        residual = du + cn_mul(dv, imag)
    else:
        residual = du + cn_mul(imag, dv)
    assert abs(residual) / max(abs(du), abs(dv)) < 1e-6


def test_pseudo_resolvent_complex_part_ignores_slice_unit():
    """The slice-complex matrix of Q_s is the same on every slice plane.

    Only the embedding direction J changes between planes; the complex
    entries come from s viewed as u + iv and cannot see J.
    """
    n, d = 5, 3
    t = make_commuting_tuple(n, d, seed=77)
    reference = None
    for seed in range(4):
        rng = np.random.default_rng(seed)
        unit = SliceUnit(n, rng.standard_normal(n))
        q = pseudo_resolvent_slice(SlicePoint(1.3, 1.8, unit), t).to_complex()
        if reference is None:
            reference = q
        else:
            assert np.linalg.norm(q - reference) < 1e-13 * np.linalg.norm(reference)
