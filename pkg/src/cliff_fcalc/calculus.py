"""Contour quadrature on slice planes and the calculi built on top of it.

Every integral here lives on the boundary of an axially symmetric domain
intersected with one slice plane C_J. The boundary pieces are circles
walked counterclockwise with the periodic trapezoid rule, which converges
geometrically for the analytic integrands these calculi produce. The
measure convention is ds_J = ds(-J): with s(theta) = c + r e^{J theta} the
factor J from ds cancels and each node carries the slice-complex weight
(2 pi / N) r e^{J theta_k}.

The slice weight commutes with every slice-intrinsic scalar but not with
general operators, so the quadrature keeps scalar factors exactly where
the defining display puts them (left of a right-kernel, right of a
left-kernel).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .algebra import SlicePoint, SliceUnit
from .errors import (
    BadSpec,
    NotVectorOperator,
    PointOutsideContour,
    SpectrumNotEnclosed,
    SpectrumOnContour,
)
from .exact import gamma_constant, k_coeff_exact, laplacian_diagonal_constant, sce_exponent
from .operators import (
    CliffordOperator,
    CommutingTuple,
    cm_mul,
    cm_norm,
    joint_spectrum,
)
from .resolvents import (
    f_resolvent_left,
    f_resolvent_right,
    s_resolvent_left,
    s_resolvent_right,
)

ON_CONTOUR_TOL = 1e-6   # spectrum this close to the curve is "on" it
INTERIOR_MARGIN = 0.05  # fraction of the radius a marked-interior point must keep


@dataclass(frozen=True)
class Contour:
    """Counterclockwise circle s_k = c + r e^{J theta_k} in the plane C_J.

    center holds (c0, c1) with c = c0 + J c1. The node count must be a
    power of two so doubling studies halve and double cleanly.
    """

    center: tuple[float, float]
    radius: float
    unit: SliceUnit
    nodes: int = 256

    def __post_init__(self):
        object.__setattr__(
            self, "center", (float(self.center[0]), float(self.center[1]))
        )
        if not self.radius > 0:
            raise BadSpec(f"contour radius must be positive, got {self.radius}")
        N = self.nodes
        if N < 4 or N & (N - 1):
            raise BadSpec(f"node count must be a power of two >= 4, got {N}")

    def center_complex(self) -> complex:
        return complex(self.center[0], self.center[1])

    def points_complex(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        return self.center_complex() + self.radius * np.exp(1j * theta)

    def points(self) -> list[SlicePoint]:
        return [SlicePoint.from_complex(z, self.unit) for z in self.points_complex()]

    def weights(self) -> np.ndarray:
        """Slice-complex node weights (2 pi / N) r e^{J theta_k} for ds_J."""
        theta = 2.0 * np.pi * np.arange(self.nodes) / self.nodes
        return (2.0 * np.pi / self.nodes) * self.radius * np.exp(1j * theta)

    def signed_distance(self, z: complex) -> float:
        """|z - c| - r: negative strictly inside, positive outside."""
        return abs(z - self.center_complex()) - self.radius


@dataclass(frozen=True)
class Annulus:
    """Ring between two concentric circles; the inner boundary counts negatively.

    Integrals over the boundary subtract the inner circle's contribution,
    which is the counterclockwise-outer / clockwise-inner orientation of a
    ring-shaped slice Cauchy domain.
    """

    outer: Contour
    inner: Contour

    def __post_init__(self):
        if self.outer.unit != self.inner.unit:
            raise BadSpec("annulus circles must share one slice plane")
        if self.outer.center != self.inner.center:
            raise BadSpec("annulus circles must be concentric")
        if not self.inner.radius < self.outer.radius:
            raise BadSpec(
                f"inner radius {self.inner.radius} must be below outer "
                f"radius {self.outer.radius}"
            )


Region = "Contour | Annulus"


def _pieces(region) -> list[tuple[Contour, float]]:
    if isinstance(region, Contour):
        return [(region, 1.0)]
    if isinstance(region, Annulus):
        return [(region.outer, 1.0), (region.inner, -1.0)]
    raise TypeError(f"expected Contour or Annulus, got {type(region).__name__}")


def _region_unit(region) -> SliceUnit:
    return _pieces(region)[0][0].unit


def region_position(region, z: complex) -> int:
    """-1 strictly inside, +1 strictly outside, 0 within ON_CONTOUR_TOL of a curve."""
    for piece, _sign in _pieces(region):
        if abs(piece.signed_distance(z)) <= ON_CONTOUR_TOL:
            return 0
    if isinstance(region, Contour):
        return -1 if region.signed_distance(z) < 0 else 1
    inside = (
        region.inner.signed_distance(z) > 0 and region.outer.signed_distance(z) < 0
    )
    return -1 if inside else 1


class IntrinsicSliceFunction:
    """Monomial, real polynomial, or real rational function of a slice variable.

    Real coefficients keep each slice plane invariant, so evaluation at
    u + Jv is complex evaluation at u + iv carried back to the same plane.
    That is the class of functions the reproduction lemmas ask for.
    """

    __slots__ = ("kind", "data")

    def __init__(self, kind: str, data):
        if kind == "monomial":
            m = int(data)
            if m < 0:
                raise BadSpec(f"monomial degree must be >= 0, got {m}")
            self.data = m
        elif kind == "polynomial":
            coeffs = tuple(float(c) for c in data)
            if not coeffs:
                raise BadSpec("polynomial needs at least one coefficient")
            self.data = coeffs
        elif kind == "rational":
            num, den = data
            num = tuple(float(c) for c in num)
            den = tuple(float(c) for c in den)
            if not num or not den or not any(den):
                raise BadSpec("rational needs coefficients and a nonzero denominator")
            self.data = (num, den)
        else:
            raise BadSpec(f"unknown function kind {kind!r}")
        self.kind = kind

    @classmethod
    def monomial(cls, m: int) -> "IntrinsicSliceFunction":
        return cls("monomial", m)

    @classmethod
    def polynomial(cls, coeffs) -> "IntrinsicSliceFunction":
        """Ascending real coefficients: polynomial([a0, a1, a2]) is a0 + a1 x + a2 x^2."""
        return cls("polynomial", coeffs)

    @classmethod
    def rational(cls, num, den) -> "IntrinsicSliceFunction":
        return cls("rational", (num, den))

    @classmethod
    def one(cls) -> "IntrinsicSliceFunction":
        return cls("monomial", 0)

    def eval_complex(self, z: complex) -> complex:
        if self.kind == "monomial":
            return z ** self.data
        if self.kind == "polynomial":
            return complex(npoly.polyval(z, self.data))
        num, den = self.data
        bottom = complex(npoly.polyval(z, den))
        if bottom == 0:
            raise ZeroDivisionError(f"rational function pole at {z}")
        return complex(npoly.polyval(z, num)) / bottom

    def __call__(self, s: SlicePoint) -> SlicePoint:
        return SlicePoint.from_complex(self.eval_complex(s.as_complex()), s.unit)

    def to_json(self) -> str:
        if self.kind == "monomial":
            doc = {"kind": "monomial", "m": self.data}
        elif self.kind == "polynomial":
            doc = {"kind": "polynomial", "coeffs": list(self.data)}
        else:
            doc = {"kind": "rational", "num": list(self.data[0]), "den": list(self.data[1])}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "IntrinsicSliceFunction":
        doc = json.loads(text)
        kind = doc.get("kind")
        if kind == "monomial":
            return cls("monomial", doc["m"])
        if kind == "polynomial":
            return cls("polynomial", doc["coeffs"])
        if kind == "rational":
            return cls("rational", (doc["num"], doc["den"]))
        raise BadSpec(f"unknown function kind {kind!r}")

    def __repr__(self):
        return f"IntrinsicSliceFunction({self.kind}, {self.data!r})"


def _pairwise_sum(ops: list[CliffordOperator], n: int, d: int) -> CliffordOperator:
    """Binary-tree reduction; fixed order keeps parallel runs bit-identical."""
    if not ops:
        return CliffordOperator.zero(n, d)
    work = list(ops)
    while len(work) > 1:
        merged = [work[i] + work[i + 1] for i in range(0, len(work) - 1, 2)]
        if len(work) % 2:
            merged.append(work[-1])
        work = merged
    return work[0]


def _embed(z: complex, unit: SliceUnit, d: int) -> CliffordOperator:
    return CliffordOperator.from_slice_point(SlicePoint.from_complex(z, unit), d)


def contour_integrate_left(
    values: list[CliffordOperator],
    contour: Contour,
    f: IntrinsicSliceFunction,
) -> CliffordOperator:
    """(1/2 pi) sum_k F_k (w_k f(s_k)): quadrature for integral F(s) ds_J f(s)."""
    if len(values) != contour.nodes:
        raise ValueError(
            f"need one operator per node: got {len(values)} for N={contour.nodes}"
        )
    zs = contour.points_complex()
    ws = contour.weights()
    n, d = values[0].n, values[0].d
    terms = []
    for k, op in enumerate(values):
        c = ws[k] * f.eval_complex(zs[k]) / (2.0 * np.pi)
        terms.append(cm_mul(op, _embed(c, contour.unit, d)))
    return _pairwise_sum(terms, n, d)


def contour_integrate_right(
    f: IntrinsicSliceFunction,
    values: list[CliffordOperator],
    contour: Contour,
) -> CliffordOperator:
    """(1/2 pi) sum_k (f(s_k) w_k) F_k: quadrature for integral f(s) ds_J F(s)."""
    if len(values) != contour.nodes:
        raise ValueError(
            f"need one operator per node: got {len(values)} for N={contour.nodes}"
        )
    zs = contour.points_complex()
    ws = contour.weights()
    n, d = values[0].n, values[0].d
    terms = []
    for k, op in enumerate(values):
        c = f.eval_complex(zs[k]) * ws[k] / (2.0 * np.pi)
        terms.append(cm_mul(_embed(c, contour.unit, d), op))
    return _pairwise_sum(terms, n, d)


def _sphere_points(t: CommutingTuple) -> list[complex]:
    """Slice-plane traces of the spectral spheres: center +/- i radius each."""
    out = []
    for sphere in joint_spectrum(t):
        out.append(complex(sphere.center, sphere.radius))
        if sphere.radius != 0.0:
            out.append(complex(sphere.center, -sphere.radius))
    return out


def _require_spectrum_inside(region, t: CommutingTuple):
    for z in _sphere_points(t):
        where = region_position(region, z)
        if where != -1:
            state = "on the contour" if where == 0 else "outside"
            raise SpectrumNotEnclosed(
                f"spectral sphere point {z} is {state}; the calculus needs the "
                f"whole spectrum strictly inside"
            )


def _require_spectrum_off_curve(region, t: CommutingTuple):
    for z in _sphere_points(t):
        if region_position(region, z) == 0:
            raise SpectrumOnContour(
                f"spectral sphere point {z} lies within {ON_CONTOUR_TOL:.0e} "
                f"of an integration circle"
            )


def spectral_clearance(region, t: CommutingTuple) -> float:
    """Smallest distance from any sphere trace to any integration circle."""
    best = math.inf
    for piece, _sign in _pieces(region):
        for z in _sphere_points(t):
            best = min(best, abs(piece.signed_distance(z)))
    return best


def _check_tuple_plane(region, t: CommutingTuple):
    unit = _region_unit(region)
    if unit.n != t.n:
        raise ValueError(f"contour lives in R_{unit.n}, operator tuple in R_{t.n}")


def s_functional_calculus(
    f: IntrinsicSliceFunction,
    t: CommutingTuple,
    region,
) -> CliffordOperator:
    """f(T) = (1/2 pi) integral of S_L^{-1}(s,T) ds_J f(s) over the boundary.

    The whole joint spectrum must sit strictly inside; the result is then
    independent of the particular region and of the slice unit, and for a
    real polynomial f it equals the direct polynomial evaluation at T.
    """
    _check_tuple_plane(region, t)
    _require_spectrum_inside(region, t)
    total = None
    for piece, sign in _pieces(region):
        values = [s_resolvent_left(pt, t) for pt in piece.points()]
        part = sign * contour_integrate_left(values, piece, f)
        total = part if total is None else total + part
    return total


def f_functional_calculus(
    n: int,
    f: IntrinsicSliceFunction,
    t: CommutingTuple,
    region,
    side: str = "left",
) -> CliffordOperator:
    """Image of f under the hypercomplex-extension calculus.

    Left form (1/2 pi) integral F_n^L(s,T) ds_J f(s); right form mirrors it
    with f on the left. On monomials x^m the result matches the closed-form
    operator sums of laplacian_power_operator, which is the ground truth the
    tests pin.
    """
    if side not in ("left", "right"):
        raise BadSpec(f"side must be 'left' or 'right', got {side!r}")
    _check_tuple_plane(region, t)
    _require_spectrum_inside(region, t)
    total = None
    for piece, sign in _pieces(region):
        pts = piece.points()
        if side == "left":
            values = [f_resolvent_left(n, pt, t) for pt in pts]
            part = sign * contour_integrate_left(values, piece, f)
        else:
            values = [f_resolvent_right(n, pt, t) for pt in pts]
            part = sign * contour_integrate_right(f, values, piece)
        total = part if total is None else total + part
    return total


def laplacian_power_operator(n: int, m: int, t: CommutingTuple) -> CliffordOperator:
    """Closed form of the iterated-Laplacian monomial image at an operator tuple.

    Zero below degree 2h, the scalar diagonal constant at 2h, and above that
    the bilinear sum over powers of T and conj(T) with the exact integer
    coefficients of k_coeff_exact.
    """
    h = sce_exponent(n)
    if m < 2 * h:
        return CliffordOperator.zero(t.n, t.d)
    if m == 2 * h:
        return float(laplacian_diagonal_constant(h)) * CliffordOperator.identity(t.n, t.d)
    T = t.operator()
    Tb = t.conjugate_operator()
    t_powers = {0: CliffordOperator.identity(t.n, t.d)}
    tb_powers = {0: CliffordOperator.identity(t.n, t.d)}

    def power(cache, base, k):
        if k not in cache:
            cache[k] = cm_mul(power(cache, base, k - 1), base)
        return cache[k]

    acc = CliffordOperator.zero(t.n, t.d)
    for ell in range(1, m - 2 * h + 2):
        coeff = float(k_coeff_exact(m, h, ell))
        piece = cm_mul(power(t_powers, T, m - 2 * h - ell + 1), power(tb_powers, Tb, ell - 1))
        acc = acc + coeff * piece
    return acc


@dataclass(frozen=True)
class ProjectorResult:
    """A spectral projector with its quality diagnostics.

    idempotency_gap is ||P^2 - P||; left_right_gap compares the two
    boundary-integral forms, which agree exactly in theory.
    """

    operator: CliffordOperator
    side: str
    idempotency_gap: float
    left_right_gap: float


def riesz_projector(
    n: int,
    t: CommutingTuple,
    region,
    side: str = "left",
) -> ProjectorResult:
    """Spectral projector onto the part of the spectrum inside the region.

    P = (1/(2 pi gamma_n)) integral F_n^L(p,T) dp_J p^{n-1}, or the mirrored
    right form with s^{n-1} ds_J in front. Requires a vector operator (zero
    scalar component): the projector theorem is stated for those, and the
    scalar part would shift sphere centers off the real axis trace.
    """
    if side not in ("left", "right"):
        raise BadSpec(f"side must be 'left' or 'right', got {side!r}")
    _check_tuple_plane(region, t)
    if np.count_nonzero(t.diagonals[0]):
        raise NotVectorOperator(
            "projector needs a vector operator: the scalar component must be zero"
        )
    _require_spectrum_off_curve(region, t)
    g = float(gamma_constant(n))
    mono = IntrinsicSliceFunction.monomial(n - 1)
    left = None
    right = None
    for piece, sign in _pieces(region):
        pts = piece.points()
        fl = [f_resolvent_left(n, pt, t) for pt in pts]
        fr = [f_resolvent_right(n, pt, t) for pt in pts]
        part_l = (sign / g) * contour_integrate_left(fl, piece, mono)
        part_r = (sign / g) * contour_integrate_right(mono, fr, piece)
        left = part_l if left is None else left + part_l
        right = part_r if right is None else right + part_r
    chosen = left if side == "left" else right
    gap = cm_norm(cm_mul(chosen, chosen) - chosen)
    return ProjectorResult(
        operator=chosen,
        side=side,
        idempotency_gap=gap,
        left_right_gap=cm_norm(left - right),
    )


def moment_vanishing_check(n: int, t: CommutingTuple, region, m: int) -> float:
    """Norm of the m-th boundary moment of the degree-n resolvent kernels.

    Both orientations are integrated (s^m ds_J F^R and F^L dp_J p^m) and the
    larger norm returned, without the 1/2 pi factor. Vanishes for m up to
    2h - 1 whenever the curve avoids the spectrum; at m = 2h it jumps to the
    order of |gamma_n| when spectrum is enclosed.
    """
    if m < 0:
        raise BadSpec(f"moment degree must be >= 0, got {m}")
    _check_tuple_plane(region, t)
    _require_spectrum_off_curve(region, t)
    mono = IntrinsicSliceFunction.monomial(m)
    left = None
    right = None
    for piece, sign in _pieces(region):
        pts = piece.points()
        fl = [f_resolvent_left(n, pt, t) for pt in pts]
        fr = [f_resolvent_right(n, pt, t) for pt in pts]
        part_l = sign * contour_integrate_left(fl, piece, mono)
        part_r = sign * contour_integrate_right(mono, fr, piece)
        left = part_l if left is None else left + part_l
        right = part_r if right is None else right + part_r
    two_pi = 2.0 * np.pi
    return max(two_pi * cm_norm(left), two_pi * cm_norm(right))


def res2_identity_check(
    f: IntrinsicSliceFunction,
    B: CliffordOperator,
    contour: Contour,
    p: SlicePoint,
) -> float:
    """Residual of the reproduction identity for an arbitrary operator B.

    Checks (1/2 pi) integral f(s) ds_J (conj(s) B - B p)(p^2 - 2 s_0 p
    + |s|^2)^{-1} = B f(p) for p strictly inside the circle. The slice
    scalars stay on the exact sides shown: conj(s) left of B, the inverted
    quadratic and p to its right.
    """
    if contour.unit != p.unit:
        raise ValueError("point and contour must share one slice plane")
    pz = p.as_complex()
    inside_by = -contour.signed_distance(pz)
    if inside_by < INTERIOR_MARGIN * contour.radius:
        raise PointOutsideContour(
            f"need the point at least {INTERIOR_MARGIN:.0%} of the radius inside; "
            f"signed clearance {inside_by:.3g}"
        )
    zs = contour.points_complex()
    ws = contour.weights()
    d = B.d
    terms = []
    for k in range(contour.nodes):
        s = zs[k]
        q = pz * pz - 2.0 * s.real * pz + abs(s) ** 2
        c = f.eval_complex(s) * ws[k] / (2.0 * np.pi)
        lead = cm_mul(_embed(c * s.conjugate(), contour.unit, d), B)
        tail = cm_mul(cm_mul(_embed(c, contour.unit, d), B), _embed(pz / q, contour.unit, d))
        terms.append(cm_mul(lead, _embed(1.0 / q, contour.unit, d)) - tail)
    integral = _pairwise_sum(terms, B.n, d)
    target = cm_mul(B, _embed(f.eval_complex(pz), contour.unit, d))
    return cm_norm(integral - target)


def cauchy_vanishing_check(
    g_right: IntrinsicSliceFunction,
    f_left: IntrinsicSliceFunction,
    region,
) -> float:
    """|integral g(s) ds_J f(s)| for intrinsic g, f: zero when both are pole-free inside.

    Scalar integrands make this a pure slice-complex trapezoid sum, so the
    returned value is the modulus of one slice-complex number.
    """
    total = 0.0 + 0.0j
    for piece, sign in _pieces(region):
        zs = piece.points_complex()
        ws = piece.weights()
        vals = np.array(
            [g_right.eval_complex(z) * w * f_left.eval_complex(z) for z, w in zip(zs, ws)]
        )
        total += sign * complex(np.sum(vals))
    return abs(total)
