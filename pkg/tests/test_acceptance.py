"""Acceptance gate: one test per contract criterion, at the stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to get one verdict line per
criterion. Each test prints its verdict before asserting, so failures still
leave a readable scoreboard. Tolerances here are the contract values; the
unit-test files probe tighter bounds where the implementation earns them.
"""

import math

import numpy as np
import pytest
from click.testing import CliRunner

from cliff_fcalc.algebra import CliffordNumber, Paravector, SlicePoint, SliceUnit
from cliff_fcalc.calculus import (
    Annulus,
    Contour,
    IntrinsicSliceFunction,
    cauchy_vanishing_check,
    moment_vanishing_check,
    res2_identity_check,
    riesz_projector,
)
from cliff_fcalc.cli import main as cli_main
from cliff_fcalc.equations import (
    EquationId,
    equation_lhs_terms,
    equation_rhs,
    evaluate_equation,
    sample_admissible_pair,
)
from cliff_fcalc.exact import (
    appendix_identity_check,
    gamma_constant,
    k_coeff_exact,
    sce_exponent,
)
from cliff_fcalc.operators import (
    CliffordOperator,
    cm_norm,
    make_commuting_tuple,
)
from cliff_fcalc.resolvents import (
    f_kernel_left,
    lr_f_resolvent_residual,
    s_kernel_left,
)
from tests.conftest import axis_unit, two_cluster_tuple

LAPLACIAN_DIAGONAL = {
    1: -4,
    2: 64,
    3: -2304,
    4: 147456,
    5: -14745600,
    6: 2123366400,
    7: -416179814400,
    8: 106542032486400,
}


def _verdict(num: int, name: str, ok: bool, detail: str):
    tag = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:02d} {name}: {tag} ({detail})")
    assert ok, f"criterion {num} {name}: {detail}"


def _pair(t, seed):
    return sample_admissible_pair(t, np.random.default_rng(seed))


def test_criterion_01_exact_combinatorics():
    failures = [
        (h, m)
        for h in range(1, 7)
        for m in range(2 * h, 2 * h + 41)
        if not appendix_identity_check(m, h)
    ]
    constants_ok = all(
        k_coeff_exact(2 * h, h, 1) == LAPLACIAN_DIAGONAL[h] for h in range(1, 9)
    )
    ok = not failures and constants_ok
    _verdict(
        1,
        "exact combinatorics",
        ok,
        f"246 sweep cells, {len(failures)} failures; "
        f"diagonal constants h=1..8 {'match' if constants_ok else 'MISMATCH'}",
    )


def test_criterion_02_gamma_coherence():
    bad = []
    for n in (3, 5, 7, 9, 11, 13):
        h = sce_exponent(n)
        expected = h * 4**h * (-1) ** h * math.factorial(h) * math.factorial(h - 1)
        if gamma_constant(n) != expected:
            bad.append(n)
    _verdict(2, "gamma coherence", not bad, f"n in 3..13 odd; mismatches: {bad or 'none'}")


def test_criterion_03_series_convergence():
    runner = CliRunner()
    worst_rel = 0.0
    worst_ratio_gap = 0.0
    for n in (3, 5, 7):
        result = runner.invoke(cli_main, ["series", "--n", str(n), "--m-max", "80"])
        assert result.exit_code == 0, result.output
        import json

        summaries = [
            json.loads(line)
            for line in result.output.strip().splitlines()
            if '"series_summary"' in line
        ]
        entry = summaries[0]
        worst_rel = max(worst_rel, entry["rel_error_final"])
        worst_ratio_gap = max(
            worst_ratio_gap, abs(entry["observed_geometric_ratio"] - 0.5)
        )
    ok = worst_rel <= 1e-8 and worst_ratio_gap <= 0.05
    _verdict(
        3,
        "series convergence",
        ok,
        f"n in {{3,5,7}}, M=80: worst rel error {worst_rel:.2e} (<=1e-8), "
        f"worst ratio gap {worst_ratio_gap:.3f} (<=0.05)",
    )


def test_criterion_04_lr_f_resolvent_equations():
    worst = 0.0
    for n in (5, 7, 9):
        for trial in range(50):
            t = make_commuting_tuple(n, 4, seed=1000 * n + trial)
            rng = np.random.default_rng(trial)
            s, _ = sample_admissible_pair(t, rng)
            worst = max(worst, *lr_f_resolvent_residual(n, s, t))
    ok = worst <= 1e-10
    _verdict(4, "left/right F-resolvent equations", ok,
             f"50 tuples per n in {{5,7,9}}, d=4: worst residual {worst:.2e} (<=1e-10)")


def test_criterion_05_s_resolvent_equation():
    worst = 0.0
    for n in (3, 5, 7):
        for trial in range(50):
            t = make_commuting_tuple(n, 4, seed=2000 * n + trial)
            s, p = _pair(t, trial)
            worst = max(worst, evaluate_equation(EquationId.S_EQ, s, p, t).residual_rel)
    ok = worst <= 1e-10
    _verdict(5, "S-resolvent equation", ok,
             f"50 trials per n in {{3,5,7}}, d=4: worst residual {worst:.2e} (<=1e-10)")


def test_criterion_06_f_resolvent_equations():
    budgets = {
        EquationId.F3: (3, 1e-9),
        EquationId.F5_PSEUDO: (5, 1e-9),
        EquationId.F5_FULL: (5, 1e-9),
        EquationId.F7_PSEUDO: (7, 1e-8),
        EquationId.F7_FULL: (7, 1e-8),
    }
    report = []
    ok = True
    for eq, (n, tol) in budgets.items():
        worst = 0.0
        for trial in range(20):
            t = make_commuting_tuple(n, 3, seed=3000 * n + trial)
            s, p = _pair(t, trial)
            worst = max(worst, evaluate_equation(eq, s, p, t).residual_rel)
        ok = ok and worst <= tol
        report.append(f"{eq}={worst:.1e}")
    for n in (5, 7, 9):
        worst = 0.0
        for trial in range(20):
            t = make_commuting_tuple(n, 3, seed=4000 * n + trial)
            s, p = _pair(t, trial)
            worst = max(
                worst, evaluate_equation(EquationId.GEN_PSEUDO, s, p, t).residual_rel
            )
        ok = ok and worst <= 1e-8
        report.append(f"GEN(n={n})={worst:.1e}")
    # the general form must specialize exactly to the printed n=5/7 forms
    spec_gap = 0.0
    for n, fixed in ((5, EquationId.F5_PSEUDO), (7, EquationId.F7_PSEUDO)):
        t = make_commuting_tuple(n, 3, seed=5000 + n)
        s, p = _pair(t, n)

        def lhs(eq):
            total = CliffordOperator.zero(t.n, t.d)
            for term in equation_lhs_terms(eq, s, p, t):
                total = total + term.coeff * term.op
            return total

        gap = cm_norm(lhs(EquationId.GEN_PSEUDO) - lhs(fixed)) / cm_norm(lhs(fixed))
        spec_gap = max(spec_gap, gap)
    ok = ok and spec_gap <= 1e-12
    report.append(f"specialization={spec_gap:.1e}")
    _verdict(6, "F-resolvent equations", ok, "20 trials each: " + ", ".join(report))


def test_criterion_07_pseudo_f_resolvent_equations():
    cases = [
        (EquationId.PSEUDO_F_H_EVEN, 5, 4),
        (EquationId.PSEUDO_F_H_ODD, 7, 4),
        (EquationId.PSEUDO_F_H_EVEN, 9, 3),
        (EquationId.PSEUDO_F_H_ODD, 11, 2),
    ]
    report = []
    ok = True
    for eq, n, d in cases:
        worst = 0.0
        for trial in range(20):
            t = make_commuting_tuple(n, d, seed=6000 * n + trial)
            s, p = _pair(t, trial)
            worst = max(worst, evaluate_equation(eq, s, p, t).residual_rel)
        ok = ok and worst <= 1e-7
        report.append(f"n={n},d={d}: {worst:.1e}")
    _verdict(7, "pseudo F-resolvent equations", ok,
             "20 trials, tol 1e-7: " + "; ".join(report))


def test_criterion_08_moment_vanishing():
    report = []
    ok = True
    for n in (5, 7):
        h = sce_exponent(n)
        t = two_cluster_tuple(n, seed=70 + n, d=2)
        circle = Contour((0.0, 0.0), 4.0, axis_unit(n), 256)
        worst = max(
            moment_vanishing_check(n, t, circle, m) for m in range(0, 2 * h)
        )
        witness = moment_vanishing_check(n, t, circle, 2 * h)
        normalized = witness / (2.0 * np.pi * np.sqrt(t.d))
        floor = 0.1 * abs(gamma_constant(n))
        ok = ok and worst <= 1e-9 and normalized >= floor
        report.append(
            f"n={n}: vanishing {worst:.1e} (<=1e-9), witness {normalized:.1f} "
            f"(>={floor:.1f})"
        )
    _verdict(8, "moment vanishing", ok, "; ".join(report))


def test_criterion_09_riesz_projectors():
    report = []
    ok = True
    for n in (5, 7):
        t = two_cluster_tuple(n, seed=80 + n, d=3)
        unit = axis_unit(n)

        def circle(radius):
            return Contour((0.0, 0.0), radius, unit, 256)

        base = riesz_projector(n, t, circle(2.0))
        idem = base.idempotency_gap
        lr = base.left_right_gap
        # +/-20% radius keeps the same cluster enclosed
        spread = max(
            cm_norm(riesz_projector(n, t, circle(1.6)).operator - base.operator),
            cm_norm(riesz_projector(n, t, circle(2.4)).operator - base.operator),
        )
        eye = CliffordOperator.identity(n, t.d)
        full = cm_norm(riesz_projector(n, t, circle(4.3)).operator - eye)
        empty_circle = Contour((6.5, 0.0), 0.5, unit, 256)
        empty = cm_norm(riesz_projector(n, t, empty_circle).operator)
        ok = ok and idem <= 1e-8 and lr <= 1e-8 and spread <= 1e-8
        ok = ok and full <= 1e-9 and empty <= 1e-10
        report.append(
            f"n={n}: idem {idem:.1e}, lr {lr:.1e}, radius {spread:.1e}, "
            f"full {full:.1e}, empty {empty:.1e}"
        )
    _verdict(9, "Riesz projectors", ok, "; ".join(report))


def test_criterion_10_integral_lemmas():
    n, d = 3, 3
    unit = axis_unit(n)
    circle = Contour((0.0, 0.0), 2.0, unit, 256)
    p = SlicePoint(0.4, 0.8, unit)
    rng = np.random.default_rng(10)
    B = CliffordOperator(
        n, d,
        {0: rng.standard_normal((d, d)), 1: rng.standard_normal((d, d)),
         6: rng.standard_normal((d, d))},
    )
    r_one = res2_identity_check(IntrinsicSliceFunction.one(),
                                CliffordOperator.identity(n, d), circle, p)
    r_sq = res2_identity_check(IntrinsicSliceFunction.monomial(2), B, circle, p)
    poly = IntrinsicSliceFunction.polynomial([0.2, -1.0, 0.0, 0.7])
    vanish = cauchy_vanishing_check(poly, poly, circle)
    ring = Annulus(circle, Contour((0.0, 0.0), 0.5, unit, 256))
    vanish = max(vanish, cauchy_vanishing_check(poly, poly, ring))
    witness = cauchy_vanishing_check(
        IntrinsicSliceFunction.one(),
        IntrinsicSliceFunction.rational((1.0,), (-0.2, 1.0)),
        circle,
    )
    ok = (
        r_one <= 1e-9
        and r_sq <= 1e-9
        and vanish <= 1e-9
        and abs(witness - 2.0 * np.pi) <= 1e-9
    )
    _verdict(
        10,
        "integral lemmas",
        ok,
        f"reproduction f=1 {r_one:.1e}, f=s^2 arbitrary B {r_sq:.1e}, "
        f"pole-free {vanish:.1e} (<=1e-9), pole witness {witness:.6f} (=2pi)",
    )


def test_criterion_11_sensitivity():
    # PSEUDO_F_H_EVEN appears twice: at h = 2 its excluded-index sums are
    # empty, so those terms only become editable at h = 4
    coverage = [
        (3, 2, (EquationId.S_EQ, EquationId.F3)),
        (5, 2, (EquationId.F5_PSEUDO, EquationId.F5_FULL, EquationId.GEN_PSEUDO,
                EquationId.PSEUDO_F_H_EVEN)),
        (7, 2, (EquationId.F7_PSEUDO, EquationId.F7_FULL, EquationId.PSEUDO_F_H_ODD)),
        (9, 2, (EquationId.PSEUDO_F_H_EVEN,)),
    ]
    detected: dict[tuple[str, int], float] = {}
    inert = 0
    checked = 0
    for n, d, eqs in coverage:
        t = make_commuting_tuple(n, d, seed=90 + n)
        # wide spread of admissible points: terms trade dominance with the
        # magnitudes of s and p, so detection needs both near and far pairs
        pairs = [_pair(t, seed) for seed in range(10)]
        for eq in eqs:
            # D = (assembled LHS) - RHS in one pass per sample point, then
            # each single-term edit is D with that term adjusted
            per_pair = []
            for s, p in pairs:
                terms = equation_lhs_terms(eq, s, p, t)
                rhs = equation_rhs(eq, s, p, t)
                lhs = CliffordOperator.zero(t.n, t.d)
                for term in terms:
                    lhs = lhs + term.coeff * term.op
                scale = max(1.0, cm_norm(lhs), cm_norm(rhs))
                per_pair.append((terms, lhs - rhs, scale))
            for idx in range(len(per_pair[0][0])):
                if all(term[idx].norm() == 0.0 for term, _, _ in per_pair):
                    # an empty sum at this h contributes nothing, so no
                    # transcription error in it is observable here
                    inert += 1
                    detected.setdefault((str(eq), idx), 0.0)
                    continue
                dropped = max(
                    cm_norm(diff - terms[idx].coeff * terms[idx].op) / scale
                    for terms, diff, scale in per_pair
                )
                nudged = max(
                    cm_norm(diff + 0.01 * terms[idx].coeff * terms[idx].op) / scale
                    for terms, diff, scale in per_pair
                )
                checked += 1
                low = min(dropped, nudged)
                key = (str(eq), idx)
                detected[key] = max(detected.get(key, 0.0), low)
    weakest_at, weakest = min(detected.items(), key=lambda kv: kv[1])
    ok = weakest >= 1e-4
    # the public API must agree with the shortcut used above
    t = make_commuting_tuple(5, 2, seed=95)
    s, p = _pair(t, 1)
    api = evaluate_equation(EquationId.F5_FULL, s, p, t, drop_term=3).residual_rel
    terms = equation_lhs_terms(EquationId.F5_FULL, s, p, t)
    rhs = equation_rhs(EquationId.F5_FULL, s, p, t)
    lhs = CliffordOperator.zero(t.n, t.d)
    for term in terms:
        lhs = lhs + term.coeff * term.op
    short = cm_norm((lhs - rhs) - terms[3].coeff * terms[3].op)
    agreement = abs(api - short / max(1.0, cm_norm(lhs), cm_norm(rhs))) / api
    ok = ok and agreement < 1e-6
    _verdict(
        11,
        "sensitivity",
        ok,
        f"{checked} term edits across 9 equations ({inert} empty-sum slots "
        f"retried at higher h): weakest detection {weakest:.2e} at "
        f"{weakest_at} (>=1e-4); API agreement {agreement:.1e}",
    )


def test_criterion_12_laplacian_of_cauchy_kernel():
    n = 3
    step = 1e-3
    rng = np.random.default_rng(12)
    unit = SliceUnit(n, rng.standard_normal(n))
    s = SlicePoint(1.4, 1.1, unit)
    worst = 0.0
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
        worst = max(worst, abs(lap - f_kernel_left(n, s, x)))
    ok = worst <= 1e-4
    _verdict(12, "Laplacian maps Cauchy kernel to F-kernel", ok,
             f"n=3, 10 points, step 1e-3: worst gap {worst:.2e} (<=1e-4)")
