"""Shared builders for the test suite.

The projector and moment tests need spectra whose clusters keep a wide berth
from the integration contours: the trapezoid rule converges like
exp(-N * clearance / radius), so crowding the contour makes a correct
implementation look broken. Everything here hands out well-separated spectra
on purpose.
"""

from __future__ import annotations

import numpy as np

from cliff_fcalc.algebra import SliceUnit
from cliff_fcalc.operators import CommutingTuple, make_commuting_tuple

INNER_RADII = (1.0, 1.07)
OUTER_RADII = (2.93, 3.08)


def axis_unit(n: int) -> SliceUnit:
    return SliceUnit(n, np.eye(n)[0])


def two_cluster_tuple(n: int, seed: int, d: int = 4) -> CommutingTuple:
    """Vector-operator tuple with sphere radii near 1 and near 3.

    d <= 4; the first half of the joint eigenvalues lands in the inner
    cluster, the rest in the outer one.
    """
    if not 2 <= d <= 4:
        raise ValueError(f"two clusters want 2 <= d <= 4, got {d}")
    radii = list(INNER_RADII[: (d + 1) // 2]) + list(OUTER_RADII[: d // 2])
    rng = np.random.default_rng(seed)
    vectors = []
    for radius in radii:
        direction = rng.standard_normal(n)
        direction *= radius / np.linalg.norm(direction)
        vectors.append(np.concatenate(([0.0], direction)))
    return make_commuting_tuple(n, d, seed, spectrum_spec=vectors, vector_operator=True)
