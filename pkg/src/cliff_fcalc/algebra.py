"""Arithmetic in the real Clifford algebra R_n and paravector geometry.

The algebra has n generators e_1 .. e_n with e_l e_m = -e_m e_l for l != m
and e_l^2 = -1. A basis blade e_A is encoded as an integer bitmask: bit
(j - 1) set means e_j participates, so ``0`` is the scalar blade and
``0b101`` is e_1 e_3. Elements carry a dense coefficient vector of length
2^n indexed by mask; products iterate over the nonzero entries only, so
sparse elements (paravectors, slice numbers) stay cheap even for larger n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInSlice

SLICE_EXTRACT_TOL = 1e-12


def blade_product(p: int, q: int) -> tuple[int, int]:
    """Multiply basis blades: e_p * e_q = sign * e_(p XOR q).

    The sign is exact (+1 or -1): a reordering factor from anticommuting
    the generators of q past those of p, times (-1) for every shared
    generator (e_l^2 = -1).

    >>> blade_product(0b01, 0b01)   # e1 * e1 = -1
    (0, -1)
    >>> blade_product(0b01, 0b10)   # e1 * e2 = e12
    (3, 1)
    >>> blade_product(0b10, 0b01)   # e2 * e1 = -e12
    (3, -1)
    """
    a = p >> 1
    swaps = 0
    while a:
        swaps += (a & q).bit_count()
        a >>= 1
    sign = -1 if (swaps + (p & q).bit_count()) & 1 else 1
    return p ^ q, sign


def _blade_grade_signs(n: int) -> np.ndarray:
    """Signs of the Clifford conjugate per blade mask: (-1)^(k(k+1)/2) on grade k."""
    masks = np.arange(1 << n)
    grades = np.array([int(m).bit_count() for m in masks])
    return np.where((grades * (grades + 1) // 2) % 2, -1.0, 1.0)


class CliffordNumber:
    """Element of R_n with real blade coefficients.

    Supports +, -, * (Clifford product, or scaling when one side is a real
    number), abs() (Euclidean coefficient norm) and ``conjugate``. Instances
    are treated as immutable; arithmetic returns new objects.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs=None):
        if n < 1:
            raise ValueError(f"algebra needs at least one generator, got n={n}")
        self.n = n
        if coeffs is None:
            self.coeffs = np.zeros(1 << n)
        else:
            coeffs = np.asarray(coeffs, dtype=float)
            if coeffs.shape != (1 << n,):
                raise ValueError(
                    f"expected {1 << n} blade coefficients for n={n}, "
                    f"got shape {coeffs.shape}"
                )
            self.coeffs = coeffs

    @classmethod
    def scalar(cls, n: int, value: float) -> "CliffordNumber":
        out = cls(n)
        out.coeffs[0] = value
        return out

    @classmethod
    def unit(cls, n: int, mask: int) -> "CliffordNumber":
        """The basis blade e_mask."""
        if not 0 <= mask < (1 << n):
            raise ValueError(f"blade mask {mask} out of range for n={n}")
        out = cls(n)
        out.coeffs[mask] = 1.0
        return out

    def copy(self) -> "CliffordNumber":
        return CliffordNumber(self.n, self.coeffs.copy())

    def __add__(self, other):
        if isinstance(other, CliffordNumber):
            self._check(other)
            return CliffordNumber(self.n, self.coeffs + other.coeffs)
        return self + CliffordNumber.scalar(self.n, float(other))

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, CliffordNumber):
            self._check(other)
            return CliffordNumber(self.n, self.coeffs - other.coeffs)
        return self - CliffordNumber.scalar(self.n, float(other))

    def __rsub__(self, other):
        return CliffordNumber.scalar(self.n, float(other)) - self

    def __neg__(self):
        return CliffordNumber(self.n, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, CliffordNumber):
            return cn_mul(self, other)
        return CliffordNumber(self.n, self.coeffs * float(other))

    def __rmul__(self, other):
        # only reached for real scalars, which commute
        return CliffordNumber(self.n, self.coeffs * float(other))

    def __abs__(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __eq__(self, other):
        return (
            isinstance(other, CliffordNumber)
            and self.n == other.n
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __repr__(self):
        terms = []
        for mask in np.nonzero(self.coeffs)[0]:
            c = self.coeffs[mask]
            if mask == 0:
                terms.append(f"{c:.6g}")
            else:
                gens = "".join(str(j + 1) for j in range(self.n) if mask >> j & 1)
                terms.append(f"{c:.6g}*e{gens}")
        body = " + ".join(terms) if terms else "0"
        return f"CliffordNumber(n={self.n}: {body})"

    def _check(self, other: "CliffordNumber"):
        if self.n != other.n:
            raise ValueError(f"mixed algebras: n={self.n} vs n={other.n}")

    @property
    def scalar_part(self) -> float:
        return float(self.coeffs[0])

    def grade(self, k: int) -> "CliffordNumber":
        """Projection onto blades of grade k."""
        out = CliffordNumber(self.n)
        for mask in np.nonzero(self.coeffs)[0]:
            if int(mask).bit_count() == k:
                out.coeffs[mask] = self.coeffs[mask]
        return out

    def max_grade(self) -> int:
        nz = np.nonzero(self.coeffs)[0]
        if len(nz) == 0:
            return 0
        return max(int(m).bit_count() for m in nz)

    def conjugate(self) -> "CliffordNumber":
        """Clifford conjugate: sign (-1)^(k(k+1)/2) on grade-k blades.

        On paravectors x0 + sum x_j e_j this is the bar map x0 - sum x_j e_j.
        """
        return CliffordNumber(self.n, self.coeffs * _blade_grade_signs(self.n))


def cn_mul(a: CliffordNumber, b: CliffordNumber) -> CliffordNumber:
    """Clifford product, iterating over nonzero blades of both factors.

    Small supports go through a plain Python loop; once the support pair
    count grows (powers of generic elements fill the blade basis quickly,
    since rounding breaks the exact cross-term cancellations) the signs are
    computed with batched bit counts and accumulated with bincount instead.
    """
    a._check(b)
    an = np.nonzero(a.coeffs)[0]
    bn = np.nonzero(b.coeffs)[0]
    if len(an) * len(bn) <= 256:
        out = np.zeros(1 << a.n)
        bc = b.coeffs[bn]
        for p in an:
            ap = a.coeffs[p]
            for q, bq in zip(bn, bc):
                mask, sign = blade_product(int(p), int(q))
                out[mask] += sign * ap * bq
        return CliffordNumber(a.n, out)
    pm = an[:, None]
    qm = bn[None, :]
    parity = np.bitwise_count(pm & qm).astype(np.int64)
    for k in range(1, a.n + 1):
        parity += np.bitwise_count((pm >> k) & qm)
    values = np.where(parity & 1, -1.0, 1.0)
    values *= a.coeffs[an, None]
    values *= b.coeffs[None, bn]
    out = np.bincount((pm ^ qm).ravel(), weights=values.ravel(), minlength=1 << a.n)
    return CliffordNumber(a.n, out)


@dataclass(frozen=True)
class Paravector:
    """Point x = x0 + x1 e_1 + ... + xn e_n of R^(n+1) inside R_n."""

    n: int
    components: np.ndarray  # length n + 1, real

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        if comps.shape != (self.n + 1,):
            raise ValueError(
                f"paravector in R_{self.n} needs {self.n + 1} components, "
                f"got shape {comps.shape}"
            )
        object.__setattr__(self, "components", comps)

    def to_clifford(self) -> CliffordNumber:
        out = CliffordNumber(self.n)
        out.coeffs[0] = self.components[0]
        for j in range(self.n):
            out.coeffs[1 << j] = self.components[j + 1]
        return out

    @property
    def real(self) -> float:
        return float(self.components[0])

    @property
    def vector_modulus(self) -> float:
        """|underline(x)|, the length of the imaginary part."""
        return float(np.linalg.norm(self.components[1:]))


def pv_conjugate(x: Paravector) -> Paravector:
    """bar(x) = x0 - underline(x)."""
    comps = x.components.copy()
    comps[1:] *= -1.0
    return Paravector(x.n, comps)


def pv_modulus(x: Paravector) -> float:
    """Euclidean modulus |x| = sqrt(x0^2 + ... + xn^2)."""
    return float(np.linalg.norm(x.components))


class SliceUnit:
    """Unit J = sum_j c_j e_j with |c| = 1, so that J^2 = -1.

    The plane spanned by 1 and J is a commutative copy of the complex
    numbers inside R_n.
    """

    __slots__ = ("n", "direction")

    def __init__(self, n: int, direction):
        d = np.asarray(direction, dtype=float)
        if d.shape != (n,):
            raise ValueError(f"direction needs {n} components, got {d.shape}")
        norm = np.linalg.norm(d)
        if norm == 0:
            raise ValueError("slice unit direction must be nonzero")
        self.n = n
        self.direction = d / norm

    @classmethod
    def axis(cls, n: int, j: int = 1) -> "SliceUnit":
        """The coordinate unit e_j."""
        d = np.zeros(n)
        d[j - 1] = 1.0
        return cls(n, d)

    def to_clifford(self) -> CliffordNumber:
        out = CliffordNumber(self.n)
        for j in range(self.n):
            out.coeffs[1 << j] = self.direction[j]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, SliceUnit)
            and self.n == other.n
            and np.allclose(self.direction, other.direction, atol=1e-14)
        )

    def __repr__(self):
        return f"SliceUnit(n={self.n}, direction={self.direction})"


@dataclass(frozen=True)
class SlicePoint:
    """Point s = u + J v on the slice plane C_J.

    Slice points with a common unit multiply like complex numbers; the
    ``as_complex`` view makes that explicit and is what the operator layer
    uses for inversion and powers.
    """

    u: float
    v: float
    unit: SliceUnit

    @property
    def n(self) -> int:
        return self.unit.n

    def as_complex(self) -> complex:
        return complex(self.u, self.v)

    @classmethod
    def from_complex(cls, z: complex, unit: SliceUnit) -> "SlicePoint":
        return cls(float(z.real), float(z.imag), unit)

    def conjugate(self) -> "SlicePoint":
        return SlicePoint(self.u, -self.v, self.unit)

    def modulus(self) -> float:
        return float(np.hypot(self.u, self.v))

    def to_paravector(self) -> Paravector:
        comps = np.empty(self.n + 1)
        comps[0] = self.u
        comps[1:] = self.v * self.unit.direction
        return Paravector(self.n, comps)


def slice_embed(point: SlicePoint) -> CliffordNumber:
    """u + J v as a CliffordNumber."""
    return point.to_paravector().to_clifford()


def slice_extract(c: CliffordNumber, unit: SliceUnit) -> SlicePoint:
    """Invert slice_embed: recover (u, v) with c = u + J v.

    Raises NotInSlice when c has any component off the plane span{1, J},
    measured relative to |c| with absolute floor 1e-12.
    """
    if c.n != unit.n:
        raise ValueError(f"mixed algebras: n={c.n} vs n={unit.n}")
    u = c.scalar_part
    vec = np.array([c.coeffs[1 << j] for j in range(c.n)])
    v = float(vec @ unit.direction)
    residual = c.coeffs.copy()
    residual[0] -= u
    for j in range(c.n):
        residual[1 << j] -= v * unit.direction[j]
    tol = SLICE_EXTRACT_TOL * max(1.0, abs(c))
    if np.linalg.norm(residual) > tol:
        raise NotInSlice(
            f"element deviates from span{{1, J}} by {np.linalg.norm(residual):.3g}"
        )
    return SlicePoint(u, v, unit)
