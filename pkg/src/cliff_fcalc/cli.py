"""Command-line driver: verification sweeps, projector runs, series tables.

Reports are JSON lines, one check per line, each stamped with "schema": "1".
The same configuration and seed always produce byte-identical output: trials
are seeded individually, worker results are merged in trial order, and every
reduction inside the library uses a fixed order. The parallelism degree is
deliberately left out of the report so that --jobs does not change the bytes.

Exit codes: 0 when every check passes, 1 when any tolerance is breached (the
report is still written), 2 on configuration errors.
"""

from __future__ import annotations

import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import click
import numpy as np

from .algebra import CliffordNumber, Paravector, SlicePoint, SliceUnit
from .calculus import Annulus, Contour, riesz_projector
from .equations import (
    EQUATION_TOLERANCES,
    EquationId,
    applicable_equations,
    evaluate_equation,
    sample_admissible_pair,
)
from .errors import CliffFcalcError, DivergentRegion
from .exact import appendix_identity_check, sce_exponent
from .operators import (
    CliffordOperator,
    cm_norm,
    joint_spectrum,
    make_commuting_tuple,
)
from .resolvents import (
    f_kernel_left,
    f_kernel_series_terms,
    lr_f_resolvent_residual,
)

SCHEMA = "1"
LR_TOLERANCE = 1e-10
SERIES_TOLERANCE = 1e-8
RATIO_WINDOW = 0.05
# Rows whose relative error has sunk to roughly machine rounding carry no
# information about the geometric rate, so the ratio estimate only uses
# truncation errors above this floor.
RATIO_CLEAN_FLOOR = 1e-11
PROJECTOR_TOLERANCES = {
    "idempotency": 1e-8,
    "left_right": 1e-8,
    "contour_independence": 1e-8,
    "additivity_identity": 1e-8,
    "full_identity": 1e-9,
    "empty_zero": 1e-10,
}


def _resolved_seed(seed: int) -> int:
    env = os.environ.get("CLIFF_FCALC_SEED")
    if env is None:
        return seed
    try:
        return int(env)
    except ValueError:
        raise click.UsageError(f"CLIFF_FCALC_SEED must be an integer, got {env!r}")


def _require_odd_n(n: int):
    if n % 2 == 0:
        raise click.UsageError("n must be odd")
    if n < 3:
        raise click.UsageError(f"n must be >= 3, got {n}")


def _parse_tol_overrides(pairs, allowed: dict[str, float]) -> dict[str, float]:
    out = dict(allowed)
    for pair in pairs:
        key, sep, value = pair.partition("=")
        key = key.strip().lower()
        if not sep:
            raise click.UsageError(f"--tol expects <id>=<value>, got {pair!r}")
        if key not in out:
            known = ", ".join(sorted(out))
            raise click.UsageError(f"unknown tolerance id {key!r}; known: {known}")
        try:
            tol = float(value)
        except ValueError:
            raise click.UsageError(f"bad tolerance value in {pair!r}")
        if tol <= 0:
            raise click.UsageError(f"tolerance must be positive, got {pair!r}")
        out[key] = tol
    return out


def _parse_contour(text: str) -> tuple[float, float, float, int]:
    parts = text.split(",")
    if len(parts) != 4:
        raise click.UsageError(
            f"--contour expects c0,c1,r,N, got {text!r}"
        )
    try:
        c0, c1, r = (float(p) for p in parts[:3])
        nodes = int(parts[3])
    except ValueError:
        raise click.UsageError(f"--contour expects numbers, got {text!r}")
    return c0, c1, r, nodes


def _emit(lines: list[dict], out_path: str | None):
    text = "".join(
        json.dumps(line, sort_keys=True, separators=(",", ":")) + "\n"
        for line in lines
    )
    if out_path is None:
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _finish(lines: list[dict], out_path: str | None, ok: bool):
    _emit(lines, out_path)
    sys.exit(0 if ok else 1)


@click.group()
def main():
    """Numerical checks for the F-resolvent calculus on the S-spectrum."""


# ---------------------------------------------------------------- verify


def _verify_trial(payload) -> list[dict]:
    """Run all applicable residual checks for one trial; used by the pool."""
    n, d, seed, trial, tol_items, ablate, drop_term = payload
    tols = dict(tol_items)
    tuple_seed = seed * 1_000_003 + 2 * trial
    t = make_commuting_tuple(n, d, tuple_seed)
    rng = np.random.default_rng(tuple_seed + 1)
    s, p = sample_admissible_pair(t, rng)
    lines = []
    for eq in applicable_equations(n):
        dropped = drop_term if (ablate is not None and eq is ablate) else None
        report = evaluate_equation(eq, s, p, t, drop_term=dropped)
        tol = tols[str(eq).lower()]
        line = {"schema": SCHEMA, "check": "equation", "trial": trial}
        line.update(report.to_dict())
        line["tolerance"] = tol
        line["pass"] = report.residual_rel <= tol
        line["dropped_term"] = dropped
        lines.append(line)
    left, right = lr_f_resolvent_residual(n, s, t)
    for side, value in (("left", left), ("right", right)):
        lines.append(
            {
                "schema": SCHEMA,
                "check": "lr_f_resolvent",
                "trial": trial,
                "n": n,
                "d": d,
                "seed": tuple_seed,
                "side": side,
                "residual_rel": value,
                "tolerance": tols["lr_f"],
                "pass": value <= tols["lr_f"],
            }
        )
    return lines


@main.command()
@click.option("--n", default=5, show_default=True, help="Clifford generators (odd).")
@click.option("--d", default=4, show_default=True, help="Matrix size per component.")
@click.option("--trials", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--jobs", default=1, show_default=True, help="Worker processes.")
@click.option("--tol", "tol_pairs", multiple=True, metavar="<id>=<v>")
@click.option("--ablate", default=None, metavar="<equation id>",
              help="Drop one term from this equation to prove the check can fail.")
@click.option("--drop-term", default=None, type=int, metavar="<k>")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--figures", "figures_dir", default=None, type=click.Path(file_okay=False),
              help="Also render plots of the report into this directory.")
def verify(n, d, trials, seed, jobs, tol_pairs, ablate, drop_term, out_path, figures_dir):
    """Residuals of every applicable resolvent equation on random tuples."""
    _require_odd_n(n)
    if d < 1:
        raise click.UsageError(f"d must be >= 1, got {d}")
    if trials < 1:
        raise click.UsageError(f"trials must be >= 1, got {trials}")
    if jobs < 1:
        raise click.UsageError(f"jobs must be >= 1, got {jobs}")
    seed = _resolved_seed(seed)
    defaults = {str(eq).lower(): tol for eq, tol in EQUATION_TOLERANCES.items()}
    defaults["lr_f"] = LR_TOLERANCE
    tols = _parse_tol_overrides(tol_pairs, defaults)

    ablate_eq = None
    if ablate is not None:
        try:
            ablate_eq = EquationId(ablate.upper())
        except ValueError:
            raise click.UsageError(f"unknown equation id {ablate!r}")
        if ablate_eq not in applicable_equations(n):
            raise click.UsageError(f"{ablate} is not applicable at n={n}")
        if drop_term is None:
            raise click.UsageError("--ablate requires --drop-term")
    elif drop_term is not None:
        raise click.UsageError("--drop-term requires --ablate")

    lines = [
        {
            "schema": SCHEMA,
            "check": "config",
            "command": "verify",
            "n": n,
            "d": d,
            "trials": trials,
            "seed": seed,
            "tolerances": tols,
            "ablate": str(ablate_eq) if ablate_eq else None,
            "drop_term": drop_term,
        }
    ]
    payloads = [
        (n, d, seed, trial, tuple(sorted(tols.items())), ablate_eq, drop_term)
        for trial in range(trials)
    ]
    try:
        if jobs == 1:
            results = [_verify_trial(p) for p in payloads]
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_verify_trial, payloads))
    except CliffFcalcError as exc:
        raise click.UsageError(str(exc))
    for chunk in results:
        lines.extend(chunk)
    if figures_dir is not None:
        from . import figures

        path = figures.render_verify_residuals(lines, figures_dir)
        lines.append({"schema": SCHEMA, "check": "figure", "name": "residuals", "path": path})
    _finish(lines, out_path, all(l.get("pass", True) for l in lines))


# ---------------------------------------------------------------- projector


def _two_cluster_tuple(n: int, d: int, seed: int):
    """Vector-operator tuple whose sphere radii split into bands near 1 and 3."""
    rng = np.random.default_rng(seed)
    inner = (d + 1) // 2
    vectors = []
    for k in range(d):
        base, count, idx = (0.9, inner, k) if k < inner else (2.9, d - inner, k - inner)
        radius = base + (0.2 * idx / max(1, count - 1) if count > 1 else 0.1)
        direction = rng.standard_normal(n)
        direction *= radius / np.linalg.norm(direction)
        vectors.append(np.concatenate(([0.0], direction)))
    return make_commuting_tuple(n, d, seed, spectrum_spec=vectors, vector_operator=True)


@main.command()
@click.option("--n", default=5, show_default=True)
@click.option("--d", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--contour", "contour_text", default="0,0,2,256", show_default=True,
              metavar="c0,c1,r,N")
@click.option("--tol", "tol_pairs", multiple=True, metavar="<id>=<v>")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--figures", "figures_dir", default=None, type=click.Path(file_okay=False))
def projector(n, d, seed, contour_text, tol_pairs, out_path, figures_dir):
    """Riesz projector gaps for a two-cluster vector-operator tuple."""
    _require_odd_n(n)
    if d < 2:
        raise click.UsageError(f"two spectral clusters need d >= 2, got {d}")
    seed = _resolved_seed(seed)
    tols = _parse_tol_overrides(tol_pairs, PROJECTOR_TOLERANCES)
    c0, c1, radius, nodes = _parse_contour(contour_text)
    unit = SliceUnit(n, np.eye(n)[0])

    t = _two_cluster_tuple(n, d, seed)
    spheres = joint_spectrum(t)
    outer_reach = max(abs(s.center) + s.radius for s in spheres)
    full_radius = 1.3 * outer_reach
    eye = CliffordOperator.identity(n, d)

    def circle(center0, center1, r):
        return Contour(center=(center0, center1), radius=r, unit=unit, nodes=nodes)

    try:
        base = circle(c0, c1, radius)
        result = riesz_projector(n, t, base)
        shrunk = riesz_projector(n, t, circle(c0, c1, radius - 0.125 * radius))
        grown = riesz_projector(n, t, circle(c0, c1, radius + 0.125 * radius))
        annulus = Annulus(outer=circle(c0, c1, full_radius), inner=base)
        complement = riesz_projector(n, t, annulus)
        full = riesz_projector(n, t, circle(c0, c1, full_radius))
        empty = riesz_projector(n, t, circle(full_radius + 2.0, c1, 0.5))
    except CliffFcalcError as exc:
        raise click.UsageError(str(exc))

    quantities = {
        "idempotency": result.idempotency_gap,
        "left_right": result.left_right_gap,
        "contour_independence": max(
            cm_norm(shrunk.operator - result.operator),
            cm_norm(grown.operator - result.operator),
        ),
        "additivity_identity": cm_norm(result.operator + complement.operator - eye),
        "full_identity": cm_norm(full.operator - eye),
        "empty_zero": cm_norm(empty.operator),
    }
    lines = [
        {
            "schema": SCHEMA,
            "check": "config",
            "command": "projector",
            "n": n,
            "d": d,
            "seed": seed,
            "contour": [c0, c1, radius, nodes],
            "spheres": [[s.center, s.radius, s.multiplicity] for s in spheres],
            "tolerances": tols,
        }
    ]
    for name, value in quantities.items():
        lines.append(
            {
                "schema": SCHEMA,
                "check": "projector",
                "quantity": name,
                "value": value,
                "tolerance": tols[name],
                "pass": value <= tols[name],
            }
        )
    if figures_dir is not None:
        from . import figures

        path = figures.render_projector_layout(
            spheres,
            [(c0, c1, radius), (c0, c1, full_radius), (full_radius + 2.0, c1, 0.5)],
            figures_dir,
        )
        lines.append({"schema": SCHEMA, "check": "figure", "name": "layout", "path": path})
    _finish(lines, out_path, all(l.get("pass", True) for l in lines))


# ---------------------------------------------------------------- series


def _series_rows(n: int, ratio: float, m_max: int, rng) -> tuple[list[dict], dict]:
    unit = SliceUnit(n, np.eye(n)[0])
    s = SlicePoint(1.1, 1.7, unit)
    direction = rng.standard_normal(n + 1)
    direction /= np.linalg.norm(direction)
    x = Paravector(n, ratio * s.modulus() * direction)
    try:
        terms = f_kernel_series_terms(n, s, x)
    except DivergentRegion as exc:
        row = {
            "schema": SCHEMA,
            "check": "series",
            "n": n,
            "ratio": ratio,
            "flag": "divergent",
            "detail": str(exc),
        }
        summary = {
            "schema": SCHEMA,
            "check": "series_summary",
            "n": n,
            "ratio": ratio,
            "flag": "divergent",
            "pass": True,
        }
        return [row], summary

    closed = f_kernel_left(n, s, x)
    scale = abs(closed)
    partial = CliffordNumber(n)
    rows = []
    errors: list[float] = []
    for m, term in terms:
        if m > m_max:
            break
        partial = partial + term
        err = abs(partial - closed)
        prev = errors[-1] if errors else 0.0
        rows.append(
            {
                "schema": SCHEMA,
                "check": "series",
                "n": n,
                "ratio": ratio,
                "M": m,
                "abs_error": err,
                "rel_error": err / scale,
                "observed_ratio": (err / prev) if prev > 0 else None,
            }
        )
        errors.append(err)

    rel_final = errors[-1] / scale
    observed = None
    clean = [i for i, e in enumerate(errors) if e / scale >= RATIO_CLEAN_FLOOR]
    run = []
    for i in clean:
        if run and i != run[-1] + 1:
            run = []
        run.append(i)
    window = run[-13:]
    if len(window) >= 4:
        span = window[-1] - window[0]
        observed = (errors[window[-1]] / errors[window[0]]) ** (1.0 / span)
    ratio_ok = True
    if observed is not None and 0.0 < ratio < 1.0:
        ratio_ok = abs(observed - ratio) <= RATIO_WINDOW
    summary = {
        "schema": SCHEMA,
        "check": "series_summary",
        "n": n,
        "ratio": ratio,
        "m_max": m_max,
        "rel_error_final": rel_final,
        "observed_geometric_ratio": observed,
        "tolerance": SERIES_TOLERANCE,
        "pass": rel_final <= SERIES_TOLERANCE and ratio_ok,
    }
    return rows, summary


@main.command()
@click.option("--n", default=3, show_default=True)
@click.option("--m-max", default=80, show_default=True)
@click.option("--ratio", "ratios", multiple=True, type=float,
              help="Target |x|/|s| ratios; defaults to 0.5.")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--figures", "figures_dir", default=None, type=click.Path(file_okay=False))
def series(n, m_max, ratios, seed, out_path, figures_dir):
    """Truncation error of the kernel power series against the closed form."""
    _require_odd_n(n)
    h = sce_exponent(n)
    if m_max < 2 * h:
        raise click.UsageError(f"m-max must be >= 2h = {2 * h}, got {m_max}")
    if not ratios:
        ratios = (0.5,)
    if any(r < 0 for r in ratios):
        raise click.UsageError("ratios must be >= 0")
    seed = _resolved_seed(seed)
    rng = np.random.default_rng(seed)
    lines = [
        {
            "schema": SCHEMA,
            "check": "config",
            "command": "series",
            "n": n,
            "m_max": m_max,
            "ratios": list(ratios),
            "seed": seed,
        }
    ]
    summaries = []
    for ratio in ratios:
        rows, summary = _series_rows(n, ratio, m_max, rng)
        lines.extend(rows)
        summaries.append(summary)
    lines.extend(summaries)
    if figures_dir is not None:
        from . import figures

        path = figures.render_series_convergence(lines, figures_dir)
        lines.append({"schema": SCHEMA, "check": "figure", "name": "series", "path": path})
    _finish(lines, out_path, all(s["pass"] for s in summaries))


# ---------------------------------------------------------------- appendix


@main.command()
@click.option("--h-max", default=6, show_default=True)
@click.option("--m-span", default=40, show_default=True,
              help="Check m from 2h through 2h + span for each h.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
def appendix(h_max, m_span, out_path):
    """Exact integer sweep of the iterated-Laplacian coefficient identity."""
    if h_max < 0:
        raise click.UsageError(f"h-max must be >= 0, got {h_max}")
    lines = [
        {
            "schema": SCHEMA,
            "check": "config",
            "command": "appendix",
            "h_max": h_max,
            "m_span": m_span,
        }
    ]
    cells = 0
    failures = 0
    for h in range(1, h_max + 1):
        for m in range(2 * h, 2 * h + m_span + 1):
            ok = appendix_identity_check(m, h)
            cells += 1
            failures += 0 if ok else 1
            lines.append(
                {"schema": SCHEMA, "check": "appendix", "h": h, "m": m, "pass": ok}
            )
    if cells == 0:
        lines.append(
            {
                "schema": SCHEMA,
                "check": "warning",
                "message": "empty sweep range; vacuously passing",
            }
        )
    lines.append(
        {
            "schema": SCHEMA,
            "check": "appendix_summary",
            "cells": cells,
            "failures": failures,
            "pass": failures == 0,
        }
    )
    _finish(lines, out_path, failures == 0)


if __name__ == "__main__":
    main()
