"""Operator level: Clifford-coefficient matrices and commuting tuples."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cliff_fcalc.algebra import SlicePoint, SliceUnit, blade_product
from cliff_fcalc.errors import BadSpec, SpectralPoint
from cliff_fcalc.operators import (
    CliffordOperator,
    CommutingTuple,
    SliceComplexOperator,
    cm_mul,
    cm_norm,
    joint_spectrum,
    make_commuting_tuple,
    slice_complex_invert,
    spectral_distance,
)


def _random_operator(n, d, rng, support):
    coeffs = {}
    masks = rng.choice(1 << n, size=min(support, 1 << n), replace=False)
    for mask in masks:
        coeffs[int(mask)] = rng.standard_normal((d, d))
    return CliffordOperator(n, d, coeffs)


def test_identity_and_zero():
    eye = CliffordOperator.identity(3, 2)
    zero = CliffordOperator.zero(3, 2)
    rng = np.random.default_rng(0)
    a = _random_operator(3, 2, rng, 5)
    assert cm_norm(cm_mul(eye, a) - a) == 0
    assert cm_norm(cm_mul(a, eye) - a) == 0
    assert cm_norm(a + zero - a) == 0


@pytest.mark.parametrize("n,support", [(5, 32), (7, 60)])
def test_cm_mul_vectorized_matches_loop(n, support):
    """Large supports switch to the batched path; it must stay bit-exact."""
    rng = np.random.default_rng(support)
    d = 2
    a = _random_operator(n, d, rng, support)
    b = _random_operator(n, d, rng, support)
    acc = {}
    for p, pa in a.coeffs.items():
        for q, qa in b.coeffs.items():
            mask, sign = blade_product(p, q)
            block = sign * (pa @ qa)
            if mask in acc:
                acc[mask] += block
            else:
                acc[mask] = block
    got = cm_mul(a, b)
    for mask, block in acc.items():
        if np.any(block):
            assert np.array_equal(got.coeffs[mask], block), mask


@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_cm_mul_associative(seed):
    rng = np.random.default_rng(seed)
    ops = [_random_operator(3, 2, rng, 4) for _ in range(3)]
    left = cm_mul(cm_mul(ops[0], ops[1]), ops[2])
    right = cm_mul(ops[0], cm_mul(ops[1], ops[2]))
    scale = max(1.0, cm_norm(left))
    assert cm_norm(left - right) / scale < 1e-12


def test_make_commuting_tuple_commutes():
    t = make_commuting_tuple(5, 4, seed=7)
    assert t.commutator_noise() < 1e-12
    for i in range(len(t.components)):
        for j in range(i + 1, len(t.components)):
            gap = np.linalg.norm(
                t.components[i] @ t.components[j] - t.components[j] @ t.components[i]
            )
            assert gap < 1e-11
    assert np.linalg.cond(t.basis) <= 100.0


def test_make_commuting_tuple_deterministic():
    a = make_commuting_tuple(5, 3, seed=3)
    b = make_commuting_tuple(5, 3, seed=3)
    assert np.array_equal(a.basis, b.basis)
    assert np.array_equal(a.diagonals, b.diagonals)


def test_tuple_conjugate_identities():
    """T + bar T = 2 T0 and T bar T = scalar matrix, both on the scalar blade."""
    t = make_commuting_tuple(5, 3, seed=1)
    top = t.operator() + t.conjugate_operator()
    for mask, mat in top.coeffs.items():
        if mask != 0:
            assert not np.any(mat)
    assert np.allclose(top.coeffs[0], 2.0 * t.components[0], atol=1e-12)
    prod = cm_mul(t.operator(), t.conjugate_operator())
    off_scalar = sum(
        np.abs(mat).max() for mask, mat in prod.coeffs.items() if mask != 0
    )
    assert off_scalar < 1e-12
    assert np.allclose(prod.coeffs[0], t.scalar_square(), atol=1e-10)


def test_explicit_spectrum_and_vector_operator():
    vectors = [
        np.array([0.0, 1.0, 0.0, 0.0]),
        np.array([0.0, 0.0, 3.0, 0.0]),
    ]
    t = make_commuting_tuple(3, 2, seed=5, spectrum_spec=vectors, vector_operator=True)
    assert np.all(t.diagonals[0] == 0.0)
    spheres = joint_spectrum(t)
    assert [(s.center, s.radius, s.multiplicity) for s in spheres] == [
        (0.0, 1.0, 1),
        (0.0, 3.0, 1),
    ]


def test_spectrum_spec_errors():
    with pytest.raises(BadSpec):
        make_commuting_tuple(3, 2, seed=0, spectrum_spec="random-normal[0,1]")
    with pytest.raises(BadSpec):
        make_commuting_tuple(3, 2, seed=0, spectrum_spec="random-uniform[2,1]")
    with pytest.raises(BadSpec):
        make_commuting_tuple(3, 2, seed=0, spectrum_spec=[np.zeros(4)])
    with pytest.raises(BadSpec):
        make_commuting_tuple(3, 2, seed=0, spectrum_spec=[np.zeros(3), np.zeros(3)])
    with pytest.raises(BadSpec):
        make_commuting_tuple(3, 0, seed=0)


def test_joint_spectrum_merges_multiplicity():
    vectors = [np.array([0.5, 2.0, 0.0, 0.0]), np.array([0.5, 0.0, 2.0, 0.0])]
    t = make_commuting_tuple(3, 2, seed=2, spectrum_spec=vectors)
    spheres = joint_spectrum(t)
    assert len(spheres) == 1
    assert spheres[0].multiplicity == 2
    assert spheres[0].center == 0.5 and abs(spheres[0].radius - 2.0) < 1e-15


def test_spectral_distance_hand_value():
    vectors = [np.array([1.0, 2.0, 0.0, 0.0])]
    t = make_commuting_tuple(3, 1, seed=0, spectrum_spec=vectors)
    unit = SliceUnit(3, [0.0, 1.0, 0.0])
    s = SlicePoint(1.0, 2.3, unit)
    assert abs(spectral_distance(s, joint_spectrum(t)) - 0.3) < 1e-12
    below = SlicePoint(1.0, -2.0, unit)
    assert spectral_distance(below, joint_spectrum(t)) < 1e-12


def test_slice_complex_operator_roundtrip():
    rng = np.random.default_rng(4)
    mat = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    unit = SliceUnit(5, rng.standard_normal(5))
    op = SliceComplexOperator.from_complex(mat, unit)
    chunky = op.to_clifford_operator(5)
    # scalar blade carries re, the unit-direction blades carry im
    assert np.allclose(chunky.coeffs[0], mat.real)
    back = cm_mul(chunky, chunky)
    square = SliceComplexOperator.from_complex(mat @ mat, unit)
    assert cm_norm(back - square.to_clifford_operator(5)) < 1e-12


def test_slice_complex_invert_and_singularity():
    rng = np.random.default_rng(6)
    mat = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    unit = SliceUnit(3, [1.0, 0.0, 0.0])
    op = SliceComplexOperator.from_complex(mat, unit)
    inv = slice_complex_invert(op)
    assert np.allclose(inv.to_complex() @ mat, np.eye(3), atol=1e-12)
    singular = SliceComplexOperator.from_complex(np.zeros((2, 2), dtype=complex), unit)
    with pytest.raises(SpectralPoint):
        slice_complex_invert(singular)


def test_tuple_json_roundtrip():
    t = make_commuting_tuple(3, 3, seed=9)
    doc = json.loads(t.to_json())
    assert doc["n"] == 3 and doc["d"] == 3 and doc["seed"] == 9
    back = CommutingTuple.from_json(t.to_json())
    assert np.array_equal(back.basis, t.basis)
    assert np.array_equal(back.diagonals, t.diagonals)
