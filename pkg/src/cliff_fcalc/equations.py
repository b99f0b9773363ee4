"""Residual evaluators for the two-point resolvent equations.

Every equation here has the shape

    sum of left-hand terms  =  [dR p - conj(s) dR] (p^2 - 2 s0 p + |s|^2)^(-1)

where dR is a difference of resolvent operators evaluated at s and p on one
slice plane. The left-hand side is assembled as an explicit list of terms so
that single-term ablation and single-coefficient perturbation are ordinary
operations rather than test-only hacks: a residual check that cannot fail
proves nothing about formulas this long.

Multiplication order follows the displayed formulas exactly. Slice scalars
commute with the pseudo-resolvents but not with T or bar T, so reordering
is not harmless.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb

import numpy as np

from .algebra import SlicePoint, SliceUnit
from .errors import HParityMismatch, OddDimension, OutOfRange, SameSphere
from .exact import gamma_constant, sce_exponent
from .operators import (
    CliffordOperator,
    CommutingTuple,
    cm_mul,
    cm_norm,
    joint_spectrum,
    slice_complex_invert,
    spectral_distance,
)
from .resolvents import (
    f_resolvent_left,
    f_resolvent_right,
    quadratic_polynomial,
    s_resolvent_left,
    s_resolvent_right,
)

DENOMINATOR_MARGIN = 1e-6


class EquationId(str, enum.Enum):
    S_EQ = "S_EQ"
    F3 = "F3"
    F5_PSEUDO = "F5_PSEUDO"
    F5_FULL = "F5_FULL"
    F7_PSEUDO = "F7_PSEUDO"
    F7_FULL = "F7_FULL"
    GEN_PSEUDO = "GEN_PSEUDO"
    PSEUDO_F_H_ODD = "PSEUDO_F_H_ODD"
    PSEUDO_F_H_EVEN = "PSEUDO_F_H_EVEN"

    def __str__(self) -> str:
        return self.value


# CLI default tolerances; longer formulas accumulate more rounding.
EQUATION_TOLERANCES = {
    EquationId.S_EQ: 1e-10,
    EquationId.F3: 1e-9,
    EquationId.F5_PSEUDO: 1e-9,
    EquationId.F5_FULL: 1e-9,
    EquationId.F7_PSEUDO: 1e-8,
    EquationId.F7_FULL: 1e-8,
    EquationId.GEN_PSEUDO: 1e-8,
    EquationId.PSEUDO_F_H_ODD: 1e-8,
    EquationId.PSEUDO_F_H_EVEN: 1e-8,
}


@dataclass(frozen=True)
class EquationTerm:
    """One signed term of a left-hand side: coeff * op."""

    label: str
    coeff: float
    op: CliffordOperator

    def norm(self) -> float:
        return abs(self.coeff) * cm_norm(self.op)


@dataclass(frozen=True)
class ResidualReport:
    equation_id: EquationId
    n: int
    d: int
    seed: int | None
    s: SlicePoint
    p: SlicePoint
    lhs_norm: float
    rhs_norm: float
    residual_abs: float
    residual_rel: float
    commutator_noise: float

    def to_dict(self) -> dict:
        return {
            "equation_id": str(self.equation_id),
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "s": [self.s.u, self.s.v],
            "p": [self.p.u, self.p.v],
            "unit": [float(c) for c in self.s.unit.direction],
            "lhs_norm": self.lhs_norm,
            "rhs_norm": self.rhs_norm,
            "residual_abs": self.residual_abs,
            "residual_rel": self.residual_rel,
            "commutator_noise": self.commutator_noise,
        }


class _Workspace:
    """Caches of operators shared by the term builders for one (s, p, T)."""

    def __init__(self, s: SlicePoint, p: SlicePoint, t: CommutingTuple):
        if s.unit != p.unit:
            raise SameSphere("s and p must lie on the same slice plane")
        self.s, self.p, self.t = s, p, t
        self.n, self.d = t.n, t.d
        self.sc = s.as_complex()
        self.pc = p.as_complex()
        self._qs_base = slice_complex_invert(quadratic_polynomial(s, t))
        self._qp_base = slice_complex_invert(quadratic_polynomial(p, t))
        self._qs_cache: dict[int, CliffordOperator] = {}
        self._qp_cache: dict[int, CliffordOperator] = {}
        self._cache: dict[str, CliffordOperator] = {}
        self._ws_pow: dict[int, CliffordOperator] = {}
        self._wp_pow: dict[int, CliffordOperator] = {}

    def emb(self, z: complex) -> CliffordOperator:
        return CliffordOperator.from_slice_point(
            SlicePoint.from_complex(z, self.s.unit), self.d
        )

    def spow(self, a: int) -> CliffordOperator:
        return self.emb(self.sc**a)

    def ppow(self, b: int) -> CliffordOperator:
        return self.emb(self.pc**b)

    def qs(self, k: int) -> CliffordOperator:
        if k not in self._qs_cache:
            self._qs_cache[k] = self._qs_base.power(k).to_clifford_operator(self.n)
        return self._qs_cache[k]

    def qp(self, k: int) -> CliffordOperator:
        if k not in self._qp_cache:
            self._qp_cache[k] = self._qp_base.power(k).to_clifford_operator(self.n)
        return self._qp_cache[k]

    def _get(self, key: str, make) -> CliffordOperator:
        if key not in self._cache:
            self._cache[key] = make()
        return self._cache[key]

    @property
    def T(self) -> CliffordOperator:
        return self._get("T", self.t.operator)

    @property
    def Tb(self) -> CliffordOperator:
        return self._get("Tb", self.t.conjugate_operator)

    @property
    def T2(self) -> CliffordOperator:
        return self._get("T2", lambda: cm_mul(self.T, self.T))

    @property
    def T3(self) -> CliffordOperator:
        return self._get("T3", lambda: cm_mul(self.T2, self.T))

    @property
    def Tb2(self) -> CliffordOperator:
        return self._get("Tb2", lambda: cm_mul(self.Tb, self.Tb))

    @property
    def absT2(self) -> CliffordOperator:
        # |T|^2 = bar{T} T, the honest Clifford product
        return self._get("absT2", lambda: cm_mul(self.Tb, self.T))

    def w_s(self, k: int = 1) -> CliffordOperator:
        """(|T|^2 - 2 T0 s)^k with 2 T0 = T + bar T."""
        if 1 not in self._ws_pow:
            self._ws_pow[1] = self.absT2 - cm_mul(self.T + self.Tb, self.emb(self.sc))
        while k not in self._ws_pow:
            m = max(self._ws_pow)
            self._ws_pow[m + 1] = cm_mul(self._ws_pow[m], self._ws_pow[1])
        return self._ws_pow[k]

    def w_p(self, k: int = 1) -> CliffordOperator:
        if 1 not in self._wp_pow:
            self._wp_pow[1] = self.absT2 - cm_mul(self.T + self.Tb, self.emb(self.pc))
        while k not in self._wp_pow:
            m = max(self._wp_pow)
            self._wp_pow[m + 1] = cm_mul(self._wp_pow[m], self._wp_pow[1])
        return self._wp_pow[k]

    @property
    def sl(self) -> CliffordOperator:
        return self._get("sl", lambda: s_resolvent_left(self.p, self.t))

    @property
    def sr(self) -> CliffordOperator:
        return self._get("sr", lambda: s_resolvent_right(self.s, self.t))

    @property
    def fr(self) -> CliffordOperator:
        return self._get("fr", lambda: f_resolvent_right(self.n, self.s, self.t))

    @property
    def fl(self) -> CliffordOperator:
        return self._get("fl", lambda: f_resolvent_left(self.n, self.p, self.t))

    def chain(self, *ops: CliffordOperator) -> CliffordOperator:
        acc = ops[0]
        for op in ops[1:]:
            acc = cm_mul(acc, op)
        return acc

    def rhs_from_difference(self, delta: CliffordOperator) -> CliffordOperator:
        denom = self.pc * self.pc - 2.0 * self.s.u * self.pc + abs(self.sc) ** 2
        scale = abs(self.pc) ** 2 + abs(self.sc) ** 2
        if abs(denom) < DENOMINATOR_MARGIN * scale:
            raise SameSphere(
                f"p too close to the sphere of s: |p^2-2s0p+|s|^2| = {abs(denom):.3e}"
            )
        bracket = cm_mul(delta, self.emb(self.pc)) - cm_mul(
            self.emb(np.conj(self.sc)), delta
        )
        return cm_mul(bracket, self.emb(1.0 / denom))


def _head_terms(ws: _Workspace) -> list[EquationTerm]:
    return [
        EquationTerm("F^R(s) S_L^{-1}(p)", 1.0, cm_mul(ws.fr, ws.sl)),
        EquationTerm("S_R^{-1}(s) F^L(p)", 1.0, cm_mul(ws.sr, ws.fl)),
    ]


def _terms_s_eq(ws: _Workspace) -> list[EquationTerm]:
    return [EquationTerm("S_R^{-1}(s) S_L^{-1}(p)", 1.0, cm_mul(ws.sr, ws.sl))]


def _terms_f3(ws: _Workspace) -> list[EquationTerm]:
    g = float(gamma_constant(3))
    c = 1.0 / g  # the displayed -1/4
    terms = _head_terms(ws)
    terms += [
        EquationTerm("s F^R F^L p", c, ws.chain(ws.spow(1), ws.fr, ws.fl, ws.ppow(1))),
        EquationTerm("s F^R T F^L", -c, ws.chain(ws.spow(1), ws.fr, ws.T, ws.fl)),
        EquationTerm("F^R T F^L p", -c, ws.chain(ws.fr, ws.T, ws.fl, ws.ppow(1))),
        EquationTerm("F^R T^2 F^L", c, ws.chain(ws.fr, ws.T2, ws.fl)),
    ]
    return terms


def _terms_f5_pseudo(ws: _Workspace) -> list[EquationTerm]:
    g = float(gamma_constant(5))
    terms = _head_terms(ws)
    terms += [
        EquationTerm(
            "Q_s S_R^{-1} S_L^{-1} Q_p", g, ws.chain(ws.qs(1), ws.sr, ws.sl, ws.qp(1))
        ),
        EquationTerm("Q_s^2 Q_p", g, cm_mul(ws.qs(2), ws.qp(1))),
        EquationTerm("Q_s Q_p^2", g, cm_mul(ws.qs(1), ws.qp(2))),
    ]
    return terms


def _terms_f5_full(ws: _Workspace) -> list[EquationTerm]:
    """The n=5 equation in F-resolvents only.

    The coefficient table is the sum of the six expansion steps in the
    source derivation (24 monomials), which is the form that actually
    closes; the compressed 20-term variant seen in print does not.
    """
    c = 1.0 / float(gamma_constant(5))
    T, T2, T3, Tb, Tb2, a2 = ws.T, ws.T2, ws.T3, ws.Tb, ws.Tb2, ws.absT2
    a2T = cm_mul(a2, T)
    a2Tb = cm_mul(a2, Tb)
    a4 = cm_mul(a2, a2)
    T2a2 = cm_mul(T2, a2)
    table = [
        ("s^2 F^R F^L p^2", 2, None, 2, 1),
        ("s^2 F^R T F^L p", 2, T, 1, -3),
        ("s F^R T F^L p^2", 1, T, 2, -3),
        ("s F^R T^2 F^L p", 1, T2, 1, 3),
        ("s^2 F^R barT F^L p", 2, Tb, 1, -2),
        ("s^2 F^R |T|^2 F^L", 2, a2, 0, 2),
        ("s F^R |T|^2 F^L p", 1, a2, 1, 6),
        ("s F^R |T|^2 T F^L", 1, a2T, 0, -4),
        ("s F^R barT F^L p^2", 1, Tb, 2, -2),
        ("F^R |T|^2 F^L p^2", 0, a2, 2, 2),
        ("F^R |T|^2 T F^L p", 0, a2T, 1, -4),
        ("s F^R barT^2 F^L p", 1, Tb2, 1, 1),
        ("s F^R |T|^2 barT F^L", 1, a2Tb, 0, -1),
        ("F^R |T|^2 barT F^L p", 0, a2Tb, 1, -1),
        ("F^R |T|^4 F^L", 0, a4, 0, 1),
        ("s F^R F^L p^3", 1, None, 3, 1),
        ("F^R T F^L p^3", 0, T, 3, -1),
        ("F^R T^2 F^L p^2", 0, T2, 2, 2),
        ("F^R T^3 F^L p", 0, T3, 1, -1),
        ("F^R T^2 |T|^2 F^L", 0, T2a2, 0, 2),
        ("s^3 F^R F^L p", 3, None, 1, 1),
        ("s^3 F^R T F^L", 3, T, 0, -1),
        ("s^2 F^R T^2 F^L", 2, T2, 0, 2),
        ("s F^R T^3 F^L", 1, T3, 0, -1),
    ]
    terms = _head_terms(ws)
    for label, a, X, b, k in table:
        middle = cm_mul(cm_mul(ws.fr, X), ws.fl) if X is not None else cm_mul(ws.fr, ws.fl)
        op = ws.chain(ws.spow(a), middle, ws.ppow(b))
        terms.append(EquationTerm(label, k * c, op))
    return terms


def _terms_f7_pseudo(ws: _Workspace) -> list[EquationTerm]:
    g = float(gamma_constant(7))
    terms = _head_terms(ws)
    terms += [
        EquationTerm(
            "Q_s S_R^{-1} S_L^{-1} Q_p^2", g, ws.chain(ws.qs(1), ws.sr, ws.sl, ws.qp(2))
        ),
        EquationTerm(
            "Q_s^2 S_R^{-1} S_L^{-1} Q_p", g, ws.chain(ws.qs(2), ws.sr, ws.sl, ws.qp(1))
        ),
        EquationTerm("Q_s Q_p^3", g, cm_mul(ws.qs(1), ws.qp(3))),
        EquationTerm("Q_s^3 Q_p", g, cm_mul(ws.qs(3), ws.qp(1))),
        EquationTerm("Q_s^2 Q_p^2", g, cm_mul(ws.qs(2), ws.qp(2))),
    ]
    return terms


def _terms_f7_full(ws: _Workspace) -> list[EquationTerm]:
    # Block coefficients come from substituting the power identities into the
    # pseudo form: gamma_7 * (gamma_7^-1 [...]) = 1 on the resolvent block and
    # gamma_7 * (gamma_7^-2 [...]) = gamma_7^-1 on the monomial block.
    g = float(gamma_constant(7))
    c1, c2 = 1.0, 1.0 / g
    T, T2, Tb, a2 = ws.T, ws.T2, ws.Tb, ws.absT2
    s1 = ws.spow(1)
    p1 = ws.ppow(1)
    wp, wso = ws.w_p(1), ws.w_s(1)
    terms = _head_terms(ws)
    block1 = [
        ("Q_s S_R^{-1} F^L p^2", 1, ws.chain(ws.qs(1), ws.sr, ws.fl, ws.ppow(2))),
        ("Q_s S_R^{-1} T F^L p", -1, ws.chain(ws.qs(1), ws.sr, T, ws.fl, p1)),
        ("Q_s S_R^{-1} barT F^L p", -1, ws.chain(ws.qs(1), ws.sr, Tb, ws.fl, p1)),
        ("Q_s S_R^{-1} |T|^2 F^L", 1, ws.chain(ws.qs(1), ws.sr, a2, ws.fl)),
        ("s^2 F^R S_L^{-1} Q_p", 1, ws.chain(ws.spow(2), ws.fr, ws.sl, ws.qp(1))),
        ("s F^R T S_L^{-1} Q_p", -1, ws.chain(s1, ws.fr, T, ws.sl, ws.qp(1))),
        ("s F^R barT S_L^{-1} Q_p", -1, ws.chain(s1, ws.fr, Tb, ws.sl, ws.qp(1))),
        ("F^R |T|^2 S_L^{-1} Q_p", 1, ws.chain(ws.fr, a2, ws.sl, ws.qp(1))),
        ("Q_s F^L p", 1, ws.chain(ws.qs(1), ws.fl, p1)),
        ("Q_s T F^L", -1, ws.chain(ws.qs(1), T, ws.fl)),
        ("s F^R Q_p", 1, ws.chain(s1, ws.fr, ws.qp(1))),
        ("F^R T Q_p", -1, ws.chain(ws.fr, T, ws.qp(1))),
    ]
    for label, k, op in block1:
        terms.append(EquationTerm(label, k * c1, op))
    block2 = [
        ("s^3 F^R F^L p^3", 1, ws.chain(ws.spow(3), ws.fr, ws.fl, ws.ppow(3))),
        ("s^3 F^R T F^L p^2", -1, ws.chain(ws.spow(3), ws.fr, T, ws.fl, ws.ppow(2))),
        ("s^2 F^R T F^L p^3", -1, ws.chain(ws.spow(2), ws.fr, T, ws.fl, ws.ppow(3))),
        ("s^2 F^R T^2 F^L p^2", 1, ws.chain(ws.spow(2), ws.fr, T2, ws.fl, ws.ppow(2))),
        ("s^3 F^R F^L p w_p", 1, ws.chain(ws.spow(3), ws.fr, ws.fl, p1, wp)),
        ("s^3 F^R T F^L w_p", -1, ws.chain(ws.spow(3), ws.fr, T, ws.fl, wp)),
        ("s^2 F^R T F^L p w_p", -1, ws.chain(ws.spow(2), ws.fr, T, ws.fl, p1, wp)),
        ("s^2 F^R T^2 F^L w_p", 1, ws.chain(ws.spow(2), ws.fr, T2, ws.fl, wp)),
        ("w_s s F^R F^L p^3", 1, ws.chain(wso, s1, ws.fr, ws.fl, ws.ppow(3))),
        ("w_s s F^R T F^L p^2", -1, ws.chain(wso, s1, ws.fr, T, ws.fl, ws.ppow(2))),
        ("w_s F^R T F^L p^3", -1, ws.chain(wso, ws.fr, T, ws.fl, ws.ppow(3))),
        ("w_s F^R T^2 F^L p^2", 1, ws.chain(wso, ws.fr, T2, ws.fl, ws.ppow(2))),
        ("w_s s F^R F^L p w_p", 1, ws.chain(wso, s1, ws.fr, ws.fl, p1, wp)),
        ("w_s s F^R T F^L w_p", -1, ws.chain(wso, s1, ws.fr, T, ws.fl, wp)),
        ("w_s F^R T F^L p w_p", -1, ws.chain(wso, ws.fr, T, ws.fl, p1, wp)),
        ("w_s F^R T^2 F^L w_p", 1, ws.chain(wso, ws.fr, T2, ws.fl, wp)),
    ]
    for label, k, op in block2:
        terms.append(EquationTerm(label, k * c2, op))
    return terms


def _terms_gen_pseudo(ws: _Workspace) -> list[EquationTerm]:
    h = sce_exponent(ws.n)
    g = float(gamma_constant(ws.n))
    terms = _head_terms(ws)
    for i in range(h - 1):
        terms.append(
            EquationTerm(
                f"Q_s^{h - i - 1} S_R^{{-1}} S_L^{{-1}} Q_p^{i + 1}",
                g,
                ws.chain(ws.qs(h - i - 1), ws.sr, ws.sl, ws.qp(i + 1)),
            )
        )
    for i in range(h):
        terms.append(
            EquationTerm(f"Q_s^{h - i} Q_p^{i + 1}", g, cm_mul(ws.qs(h - i), ws.qp(i + 1)))
        )
    return terms


def _binom_sum(ws: _Workspace, hh: int, make_term) -> CliffordOperator:
    """sum_{k=1}^{hh} C(hh, k) * make_term(k); zero operator when hh < 1."""
    acc = CliffordOperator.zero(ws.n, ws.d)
    for k in range(1, hh + 1):
        acc = acc + float(comb(hh, k)) * make_term(k)
    return acc


def _pseudo_f_common_tail(ws: _Workspace, hh: int) -> list[EquationTerm]:
    """The gamma_n^{-1} groups shared by both parity branches.

    hh is the binomial upper bound: (h-1)/2 for h odd, (h-2)/2 for h even.
    For h = 2 every k-sum is empty and only the three plain monomials and
    the leading s^h F^R F^L p^h survive.
    """
    h = sce_exponent(ws.n)
    c = 1.0 / float(gamma_constant(ws.n))
    T = ws.T
    fr, fl = ws.fr, ws.fl
    # the four bracketed sums reused across the A/B/C groups
    right_plain = lambda k: ws.chain(ws.w_p(k), fl, ws.ppow(h - 2 * k))
    right_t = lambda k: ws.chain(ws.w_p(k), T, fl, ws.ppow(h - 1 - 2 * k))
    left_plain = lambda k: ws.chain(ws.spow(h - 2 * k), fr, ws.w_s(k))
    left_t = lambda k: ws.chain(ws.spow(h - 2 * k - 1), fr, T, ws.w_s(k))
    R1 = _binom_sum(ws, hh, right_plain)
    R2 = _binom_sum(ws, hh, right_t)
    L1 = _binom_sum(ws, hh, left_plain)
    L2 = _binom_sum(ws, hh, left_t)
    terms = [
        EquationTerm(
            "s^h F^R F^L p^h", c, ws.chain(ws.spow(h), fr, fl, ws.ppow(h))
        ),
        EquationTerm(
            "s^h F^R T F^L p^{h-1}", -c, ws.chain(ws.spow(h), fr, T, fl, ws.ppow(h - 1))
        ),
        EquationTerm(
            "s^{h-1} F^R T F^L p^h", -c, ws.chain(ws.spow(h - 1), fr, T, fl, ws.ppow(h))
        ),
        EquationTerm(
            "s^{h-1} F^R T^2 F^L p^{h-1}",
            c,
            ws.chain(ws.spow(h - 1), fr, ws.T2, fl, ws.ppow(h - 1)),
        ),
        EquationTerm(
            "s^h F^R sum w_p^k F^L p^{h-2k}", c, ws.chain(ws.spow(h), fr, R1)
        ),
        EquationTerm(
            "s^h F^R sum w_p^k T F^L p^{h-1-2k}", -c, ws.chain(ws.spow(h), fr, R2)
        ),
        EquationTerm(
            "s^{h-1} F^R sum T w_p^k F^L p^{h-2k}",
            -c,
            ws.chain(
                ws.spow(h - 1), fr, _binom_sum(ws, hh, lambda k: ws.chain(T, ws.w_p(k), fl, ws.ppow(h - 2 * k)))
            ),
        ),
        EquationTerm(
            "s^{h-1} F^R sum T w_p^k T F^L p^{h-1-2k}",
            c,
            ws.chain(
                ws.spow(h - 1),
                fr,
                _binom_sum(ws, hh, lambda k: ws.chain(T, ws.w_p(k), T, fl, ws.ppow(h - 1 - 2 * k))),
            ),
        ),
        EquationTerm("[sum s^{h-2k} F^R w_s^k][sum w_p^k F^L p^{h-2k}]", c, cm_mul(L1, R1)),
        EquationTerm("[sum s^{h-2k} F^R w_s^k][sum w_p^k T F^L p^{h-1-2k}]", -c, cm_mul(L1, R2)),
        EquationTerm("[sum s^{h-2k-1} F^R T w_s^k][sum w_p^k F^L p^{h-2k}]", -c, cm_mul(L2, R1)),
        EquationTerm("[sum s^{h-2k-1} F^R T w_s^k][sum w_p^k T F^L p^{h-1-2k}]", c, cm_mul(L2, R2)),
        EquationTerm(
            "[sum s^{h-2k} F^R w_s^k] F^L p^h", c, ws.chain(L1, fl, ws.ppow(h))
        ),
        EquationTerm(
            "[sum s^{h-2k} F^R w_s^k T] F^L p^{h-1}",
            -c,
            ws.chain(cm_mul(L1, T), fl, ws.ppow(h - 1)),
        ),
        EquationTerm(
            "[sum s^{h-1-2k} F^R T w_s^k] F^L p^h", -c, ws.chain(L2, fl, ws.ppow(h))
        ),
        EquationTerm(
            "[sum s^{h-1-2k} F^R T w_s^k T] F^L p^{h-1}",
            c,
            ws.chain(cm_mul(L2, T), fl, ws.ppow(h - 1)),
        ),
    ]
    return terms


def _terms_pseudo_f_h_odd(ws: _Workspace) -> list[EquationTerm]:
    h = sce_exponent(ws.n)
    g = float(gamma_constant(ws.n))
    Tb, Tb2 = ws.Tb, ws.Tb2
    terms = _head_terms(ws)

    def isum(make):
        acc = CliffordOperator.zero(ws.n, ws.d)
        for i in range(h - 1):
            acc = acc + make(i)
        return acc

    terms += [
        EquationTerm(
            "s sum Q_s^{h-i} Q_p^{i+2} p",
            g,
            isum(lambda i: ws.chain(ws.spow(1), ws.qs(h - i), ws.qp(i + 2), ws.ppow(1))),
        ),
        EquationTerm(
            "s sum Q_s^{h-i} barT Q_p^{i+2}",
            -g,
            isum(lambda i: ws.chain(ws.spow(1), ws.qs(h - i), Tb, ws.qp(i + 2))),
        ),
        EquationTerm(
            "sum Q_s^{h-i} barT Q_p^{i+2} p",
            -g,
            isum(lambda i: ws.chain(ws.qs(h - i), Tb, ws.qp(i + 2), ws.ppow(1))),
        ),
        EquationTerm(
            "sum Q_s^{h-i} barT^2 Q_p^{i+2}",
            g,
            isum(lambda i: ws.chain(ws.qs(h - i), Tb2, ws.qp(i + 2))),
        ),
        EquationTerm(
            "sum_{i != (h-1)/2} Q_s^{h-i} Q_p^{i+1}",
            g,
            sum(
                (cm_mul(ws.qs(h - i), ws.qp(i + 1)) for i in range(h) if i != (h - 1) // 2),
                CliffordOperator.zero(ws.n, ws.d),
            ),
        ),
    ]
    terms += _pseudo_f_common_tail(ws, (h - 1) // 2)
    return terms


def _terms_pseudo_f_h_even(ws: _Workspace) -> list[EquationTerm]:
    h = sce_exponent(ws.n)
    g = float(gamma_constant(ws.n))
    Tb, Tb2 = ws.Tb, ws.Tb2
    half = (h + 2) // 2
    terms = _head_terms(ws)

    def isum(make):
        acc = CliffordOperator.zero(ws.n, ws.d)
        for i in range(h - 1):
            if i != (h - 2) // 2:
                acc = acc + make(i)
        return acc

    terms += [
        EquationTerm(
            "s Q_s^{(h+2)/2} barT Q_p^{(h+2)/2}",
            -g,
            ws.chain(ws.spow(1), ws.qs(half), Tb, ws.qp(half)),
        ),
        EquationTerm(
            "Q_s^{(h+2)/2} barT Q_p^{(h+2)/2} p",
            -g,
            ws.chain(ws.qs(half), Tb, ws.qp(half), ws.ppow(1)),
        ),
        EquationTerm(
            "Q_s^{(h+2)/2} barT^2 Q_p^{(h+2)/2}",
            g,
            ws.chain(ws.qs(half), Tb2, ws.qp(half)),
        ),
        EquationTerm(
            "sum Q_s^{h-i} Q_p^{i+1}",
            g,
            sum(
                (cm_mul(ws.qs(h - i), ws.qp(i + 1)) for i in range(h)),
                CliffordOperator.zero(ws.n, ws.d),
            ),
        ),
        EquationTerm(
            "s sum_{i != (h-2)/2} Q_s^{h-i} Q_p^{i+2} p",
            g,
            isum(lambda i: ws.chain(ws.spow(1), ws.qs(h - i), ws.qp(i + 2), ws.ppow(1))),
        ),
        EquationTerm(
            "s sum_{i != (h-2)/2} Q_s^{h-i} barT Q_p^{i+2}",
            -g,
            isum(lambda i: ws.chain(ws.spow(1), ws.qs(h - i), Tb, ws.qp(i + 2))),
        ),
        EquationTerm(
            "sum_{i != (h-2)/2} Q_s^{h-i} barT Q_p^{i+2} p",
            -g,
            isum(lambda i: ws.chain(ws.qs(h - i), Tb, ws.qp(i + 2), ws.ppow(1))),
        ),
        EquationTerm(
            "sum_{i != (h-2)/2} Q_s^{h-i} barT^2 Q_p^{i+2}",
            g,
            isum(lambda i: ws.chain(ws.qs(h - i), Tb2, ws.qp(i + 2))),
        ),
    ]
    terms += _pseudo_f_common_tail(ws, (h - 2) // 2)
    return terms


_BUILDERS = {
    EquationId.S_EQ: _terms_s_eq,
    EquationId.F3: _terms_f3,
    EquationId.F5_PSEUDO: _terms_f5_pseudo,
    EquationId.F5_FULL: _terms_f5_full,
    EquationId.F7_PSEUDO: _terms_f7_pseudo,
    EquationId.F7_FULL: _terms_f7_full,
    EquationId.GEN_PSEUDO: _terms_gen_pseudo,
    EquationId.PSEUDO_F_H_ODD: _terms_pseudo_f_h_odd,
    EquationId.PSEUDO_F_H_EVEN: _terms_pseudo_f_h_even,
}

_FIXED_N = {
    EquationId.F3: 3,
    EquationId.F5_PSEUDO: 5,
    EquationId.F5_FULL: 5,
    EquationId.F7_PSEUDO: 7,
    EquationId.F7_FULL: 7,
}


def _validate(eq: EquationId, t: CommutingTuple):
    n = t.n
    fixed = _FIXED_N.get(eq)
    if fixed is not None and n != fixed:
        raise ValueError(f"{eq} requires a tuple over n={fixed}, got n={n}")
    if eq is EquationId.GEN_PSEUDO and (n % 2 == 0 or n <= 3):
        raise OddDimension(f"{eq} requires odd n > 3, got n={n}")
    if eq in (EquationId.PSEUDO_F_H_ODD, EquationId.PSEUDO_F_H_EVEN):
        if n % 2 == 0 or n <= 3:
            raise OddDimension(f"{eq} requires odd n > 3, got n={n}")
        h = sce_exponent(n)
        if eq is EquationId.PSEUDO_F_H_ODD and h % 2 == 0:
            raise HParityMismatch(f"h = {h} is even; use PSEUDO_F_H_EVEN")
        if eq is EquationId.PSEUDO_F_H_EVEN and h % 2 == 1:
            raise HParityMismatch(f"h = {h} is odd; use PSEUDO_F_H_ODD")


def equation_lhs_terms(
    eq: EquationId, s: SlicePoint, p: SlicePoint, t: CommutingTuple
) -> list[EquationTerm]:
    """The left-hand side of an equation as its list of displayed terms."""
    _validate(eq, t)
    return _BUILDERS[eq](_Workspace(s, p, t))


def equation_rhs(
    eq: EquationId, s: SlicePoint, p: SlicePoint, t: CommutingTuple
) -> CliffordOperator:
    """The shared right-hand side [dR p - conj(s) dR] (p^2 - 2 s0 p + |s|^2)^(-1).

    dR is the right-minus-left difference of S-resolvents for the S-equation
    and of F-resolvents for everything else.
    """
    _validate(eq, t)
    ws = _Workspace(s, p, t)
    if eq is EquationId.S_EQ:
        return ws.rhs_from_difference(ws.sr - ws.sl)
    return ws.rhs_from_difference(ws.fr - ws.fl)


def evaluate_equation(
    eq: EquationId,
    s: SlicePoint,
    p: SlicePoint,
    t: CommutingTuple,
    *,
    drop_term: int | None = None,
    perturb_term: int | None = None,
    perturb_scale: float = 1.01,
) -> ResidualReport:
    """Assemble one equation and report its residual.

    drop_term omits the indexed LHS term; perturb_term multiplies its
    coefficient by perturb_scale. Both exist to prove the residual checks
    can fail.
    """
    _validate(eq, t)
    ws = _Workspace(s, p, t)
    terms = _BUILDERS[eq](ws)
    for idx in (drop_term, perturb_term):
        if idx is not None and not 0 <= idx < len(terms):
            raise OutOfRange(f"term index {idx} out of range for {eq} ({len(terms)} terms)")
    if eq is EquationId.S_EQ:
        rhs = ws.rhs_from_difference(ws.sr - ws.sl)
    else:
        rhs = ws.rhs_from_difference(ws.fr - ws.fl)
    lhs = CliffordOperator.zero(t.n, t.d)
    for i, term in enumerate(terms):
        if i == drop_term:
            continue
        coeff = term.coeff * (perturb_scale if i == perturb_term else 1.0)
        lhs = lhs + coeff * term.op
    lhs_norm = cm_norm(lhs)
    rhs_norm = cm_norm(rhs)
    residual_abs = cm_norm(lhs - rhs)
    return ResidualReport(
        equation_id=eq,
        n=t.n,
        d=t.d,
        seed=t.seed,
        s=s,
        p=p,
        lhs_norm=lhs_norm,
        rhs_norm=rhs_norm,
        residual_abs=residual_abs,
        residual_rel=residual_abs / max(1.0, lhs_norm, rhs_norm),
        commutator_noise=t.commutator_noise(),
    )


def s_resolvent_eq_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.S_EQ, s, p, t, **kwargs)


def f_eq_n3_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.F3, s, p, t, **kwargs)


def f_eq_n5_pseudo_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.F5_PSEUDO, s, p, t, **kwargs)


def f_eq_n5_full_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.F5_FULL, s, p, t, **kwargs)


def f_eq_n7_pseudo_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.F7_PSEUDO, s, p, t, **kwargs)


def f_eq_n7_full_residual(s, p, t, **kwargs) -> ResidualReport:
    return evaluate_equation(EquationId.F7_FULL, s, p, t, **kwargs)


def f_eq_general_residual(n, s, p, t, **kwargs) -> ResidualReport:
    if n != t.n:
        raise ValueError(f"n={n} does not match tuple n={t.n}")
    return evaluate_equation(EquationId.GEN_PSEUDO, s, p, t, **kwargs)


def pseudo_f_eq_h_odd_residual(n, s, p, t, **kwargs) -> ResidualReport:
    if n != t.n:
        raise ValueError(f"n={n} does not match tuple n={t.n}")
    return evaluate_equation(EquationId.PSEUDO_F_H_ODD, s, p, t, **kwargs)


def pseudo_f_eq_h_even_residual(n, s, p, t, **kwargs) -> ResidualReport:
    if n != t.n:
        raise ValueError(f"n={n} does not match tuple n={t.n}")
    return evaluate_equation(EquationId.PSEUDO_F_H_EVEN, s, p, t, **kwargs)


def applicable_equations(n: int) -> list[EquationId]:
    """The equations defined for a tuple over R_n."""
    ids = [EquationId.S_EQ]
    if n == 3:
        ids.append(EquationId.F3)
    if n == 5:
        ids += [EquationId.F5_PSEUDO, EquationId.F5_FULL]
    if n == 7:
        ids += [EquationId.F7_PSEUDO, EquationId.F7_FULL]
    if n > 3:
        ids.append(EquationId.GEN_PSEUDO)
        h = sce_exponent(n)
        ids.append(EquationId.PSEUDO_F_H_ODD if h % 2 else EquationId.PSEUDO_F_H_EVEN)
    return ids


def sample_admissible_pair(
    t: CommutingTuple,
    rng: np.random.Generator,
    *,
    margin: float = 0.05,
    max_tries: int = 1000,
) -> tuple[SlicePoint, SlicePoint]:
    """Random (s, p) on a random common slice, clear of the spectrum.

    Keeps both points at distance >= margin * spectral radius from every
    spectral sphere and keeps |p^2 - 2 s0 p + |s|^2| well above the
    degeneracy gate, so all equation evaluations stay well conditioned.
    """
    spheres = joint_spectrum(t)
    radius = max(t.spectral_radius(), 1.0)
    for _ in range(max_tries):
        direction = rng.standard_normal(t.n)
        if np.linalg.norm(direction) < 1e-6:
            continue
        unit = SliceUnit(t.n, direction)
        u_s, u_p = rng.uniform(-1.6 * radius, 1.6 * radius, size=2)
        v_s, v_p = rng.uniform(0.15 * radius, 1.7 * radius, size=2)
        s = SlicePoint(u_s, v_s, unit)
        p = SlicePoint(u_p, v_p, unit)
        gap = margin * t.spectral_radius()
        if spectral_distance(s, spheres) < gap or spectral_distance(p, spheres) < gap:
            continue
        sc, pc = s.as_complex(), p.as_complex()
        denom = pc * pc - 2.0 * s.u * pc + abs(sc) ** 2
        if abs(denom) < 1e-2 * (abs(pc) ** 2 + abs(sc) ** 2):
            continue
        return s, p
    raise RuntimeError("could not sample an admissible (s, p) pair")
