"""Clifford-valued matrix operators and commuting paravector tuples.

An operator on V_n = R^d (x) R_n is stored as a map from blade mask to a
real d x d matrix. Products combine blade signs with matrix products, so
the non-commutativity of both layers is respected. The slice-complex
sublayer (operators supported on span{1, J}) is where every inversion
happens: such operators are isomorphic to complex d x d matrices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .algebra import CliffordNumber, SlicePoint, SliceUnit, blade_product
from .errors import BadSpec, NotInSlice, SpectralPoint

CONDITION_LIMIT = 1e12  # beyond this the quadratic polynomial counts as singular
BASIS_CONDITION_LIMIT = 100.0  # resample the shared eigenbasis above this
SPHERE_MERGE_TOL = 1e-9


class CliffordOperator:
    """Operator sum_A e_A M_A with real matrix coefficients M_A."""

    __slots__ = ("n", "d", "coeffs")

    def __init__(self, n: int, d: int, coeffs: dict[int, np.ndarray] | None = None):
        self.n = n
        self.d = d
        self.coeffs: dict[int, np.ndarray] = {}
        if coeffs:
            for mask, mat in coeffs.items():
                mat = np.asarray(mat, dtype=float)
                if mat.shape != (d, d):
                    raise ValueError(
                        f"blade {mask}: expected {(d, d)} matrix, got {mat.shape}"
                    )
                self.coeffs[int(mask)] = mat

    @classmethod
    def zero(cls, n: int, d: int) -> "CliffordOperator":
        return cls(n, d)

    @classmethod
    def identity(cls, n: int, d: int) -> "CliffordOperator":
        return cls(n, d, {0: np.eye(d)})

    @classmethod
    def from_clifford_number(cls, c: CliffordNumber, d: int) -> "CliffordOperator":
        """c acting by multiplication: each blade coefficient times Id."""
        out = cls(c.n, d)
        eye = np.eye(d)
        for mask in np.nonzero(c.coeffs)[0]:
            out.coeffs[int(mask)] = c.coeffs[mask] * eye
        return out

    @classmethod
    def from_slice_point(cls, s: SlicePoint, d: int) -> "CliffordOperator":
        """The scalar s = u + Jv as the operator u Id + J (v Id)."""
        from .algebra import slice_embed

        return cls.from_clifford_number(slice_embed(s), d)

    def blade(self, mask: int) -> np.ndarray:
        """Matrix coefficient of e_mask (zero matrix if absent)."""
        got = self.coeffs.get(mask)
        return got.copy() if got is not None else np.zeros((self.d, self.d))

    def __add__(self, other: "CliffordOperator") -> "CliffordOperator":
        self._check(other)
        out = CliffordOperator(self.n, self.d)
        out.coeffs = {m: mat.copy() for m, mat in self.coeffs.items()}
        for mask, mat in other.coeffs.items():
            if mask in out.coeffs:
                out.coeffs[mask] = out.coeffs[mask] + mat
            else:
                out.coeffs[mask] = mat.copy()
        return out

    def __sub__(self, other: "CliffordOperator") -> "CliffordOperator":
        return self + (-other)

    def __neg__(self) -> "CliffordOperator":
        out = CliffordOperator(self.n, self.d)
        out.coeffs = {m: -mat for m, mat in self.coeffs.items()}
        return out

    def __mul__(self, other):
        if isinstance(other, CliffordOperator):
            return cm_mul(self, other)
        out = CliffordOperator(self.n, self.d)
        out.coeffs = {m: mat * float(other) for m, mat in self.coeffs.items()}
        return out

    def __rmul__(self, other):
        # real scalars only; Clifford factors must use cm_scale_left/right
        out = CliffordOperator(self.n, self.d)
        out.coeffs = {m: mat * float(other) for m, mat in self.coeffs.items()}
        return out

    def _check(self, other: "CliffordOperator"):
        if self.n != other.n or self.d != other.d:
            raise ValueError(
                f"operator shape mismatch: (n={self.n}, d={self.d}) vs "
                f"(n={other.n}, d={other.d})"
            )

    def __repr__(self):
        masks = sorted(self.coeffs)
        return f"CliffordOperator(n={self.n}, d={self.d}, blades={masks})"


def cm_add(a: CliffordOperator, b: CliffordOperator) -> CliffordOperator:
    return a + b


def cm_mul(a: CliffordOperator, b: CliffordOperator) -> CliffordOperator:
    """(sum e_P M_P)(sum e_Q N_Q) = sum sign(P,Q) e_(P xor Q) M_P N_Q.

    Large blade supports (they grow quickly in chained resolvent products)
    take a vectorized path: blade signs via batched bit counts, matrix
    products via one broadcast matmul, accumulation via bincount. Blades
    whose accumulated matrix is exactly zero are dropped; that changes no
    operator, only the storage.
    """
    a._check(b)
    out = CliffordOperator(a.n, a.d)
    if len(a.coeffs) * len(b.coeffs) <= 256:
        acc: dict[int, np.ndarray] = {}
        for p, mp in a.coeffs.items():
            for q, nq in b.coeffs.items():
                mask, sign = blade_product(p, q)
                prod = mp @ nq
                if sign < 0:
                    prod = -prod
                if mask in acc:
                    acc[mask] += prod
                else:
                    acc[mask] = prod
        out.coeffs = {m: mat for m, mat in acc.items() if np.any(mat)}
        return out

    d = a.d
    pm = np.fromiter(a.coeffs.keys(), dtype=np.int64, count=len(a.coeffs))
    qm = np.fromiter(b.coeffs.keys(), dtype=np.int64, count=len(b.coeffs))
    pa = np.stack([a.coeffs[int(m)] for m in pm])
    qa = np.stack([b.coeffs[int(m)] for m in qm])
    merged: dict[int, np.ndarray] = {}
    # chunk the left factor so the [chunk, B2, d, d] product buffer stays small
    chunk = max(1, 4_000_000 // (len(qm) * d * d))
    for start in range(0, len(pm), chunk):
        pmc = pm[start:start + chunk, None]
        parity = np.bitwise_count(pmc & qm[None, :]).astype(np.int64)
        for k in range(1, a.n + 1):
            parity += np.bitwise_count((pmc >> k) & qm[None, :])
        signs = np.where(parity & 1, -1.0, 1.0)
        prods = pa[start:start + chunk, None] @ qa[None, :]
        prods *= signs[:, :, None, None]
        flat_masks = (pmc ^ qm[None, :]).ravel()
        flat = prods.reshape(-1, d * d)
        uniq, inv = np.unique(flat_masks, return_inverse=True)
        acc_arr = np.empty((len(uniq), d * d))
        for col in range(d * d):
            acc_arr[:, col] = np.bincount(inv, weights=flat[:, col],
                                          minlength=len(uniq))
        for idx, mask in enumerate(uniq):
            block = acc_arr[idx].reshape(d, d)
            key = int(mask)
            if key in merged:
                merged[key] += block
            else:
                merged[key] = block
    out.coeffs = {m: mat for m, mat in merged.items() if np.any(mat)}
    return out


def cm_scale_left(c: CliffordNumber, a: CliffordOperator) -> CliffordOperator:
    """c * A with c acting as the multiplication operator c (x) Id."""
    return cm_mul(CliffordOperator.from_clifford_number(c, a.d), a)


def cm_scale_right(a: CliffordOperator, c: CliffordNumber) -> CliffordOperator:
    """A * c; differs from cm_scale_left because blades anticommute."""
    return cm_mul(a, CliffordOperator.from_clifford_number(c, a.d))


def cm_norm(a: CliffordOperator) -> float:
    """sqrt(sum over blades of Frobenius norm squared); zero iff A = 0."""
    total = 0.0
    for mat in a.coeffs.values():
        total += float(np.sum(mat * mat))
    return float(np.sqrt(total))


@dataclass(frozen=True)
class SpectralSphere:
    """The sphere [x] = {x0 + J r : J in S}, with eigenvalue multiplicity."""

    center: float
    radius: float
    multiplicity: int

    def slice_points(self, unit: SliceUnit) -> tuple[SlicePoint, SlicePoint]:
        """Intersection with the plane C_J: the pair x0 +/- J r."""
        return (
            SlicePoint(self.center, self.radius, unit),
            SlicePoint(self.center, -self.radius, unit),
        )


class CommutingTuple:
    """Paravector operator T = T0 + e_1 T_1 + ... + e_n T_n.

    Components are built as V D_l V^(-1) from a shared basis V and real
    diagonals, so they commute and have real spectra by construction (up to
    float roundoff, which ``commutator_noise`` measures).
    """

    def __init__(self, n: int, d: int, basis: np.ndarray, diagonals: np.ndarray,
                 seed: int | None = None):
        basis = np.asarray(basis, dtype=float)
        diagonals = np.asarray(diagonals, dtype=float)
        if basis.shape != (d, d):
            raise ValueError(f"basis must be {d}x{d}, got {basis.shape}")
        if diagonals.shape != (n + 1, d):
            raise ValueError(
                f"diagonals must be ({n + 1}, {d}), got {diagonals.shape}"
            )
        self.n = n
        self.d = d
        self.basis = basis
        self.diagonals = diagonals
        self.seed = seed
        inv = np.linalg.inv(basis)
        self.components = [basis @ np.diag(diagonals[k]) @ inv for k in range(n + 1)]

    def operator(self) -> CliffordOperator:
        """T as a CliffordOperator (blades: scalar and the n generators)."""
        coeffs = {0: self.components[0]}
        for j in range(self.n):
            coeffs[1 << j] = self.components[j + 1]
        return CliffordOperator(self.n, self.d, coeffs)

    def conjugate_operator(self) -> CliffordOperator:
        """bar(T) = T0 - e_1 T_1 - ... - e_n T_n."""
        coeffs = {0: self.components[0]}
        for j in range(self.n):
            coeffs[1 << j] = -self.components[j + 1]
        return CliffordOperator(self.n, self.d, coeffs)

    def scalar_square(self) -> np.ndarray:
        """T0^2 + sum_l T_l^2, the matrix part of T bar(T) when components commute."""
        acc = np.zeros((self.d, self.d))
        for mat in self.components:
            acc += mat @ mat
        return acc

    def norm(self) -> float:
        return cm_norm(self.operator())

    def spectral_radius(self) -> float:
        """max over joint eigenvalues of |lambda| (paravector modulus)."""
        return float(np.max(np.linalg.norm(self.diagonals, axis=0), initial=0.0))

    def commutator_noise(self) -> float:
        """max over pairs of ||[T_l, T_m]|| / (||T_l|| ||T_m||), 0 for exact commuting."""
        worst = 0.0
        mats = self.components
        for i in range(len(mats)):
            ni = np.linalg.norm(mats[i])
            if ni == 0:
                continue
            for j in range(i + 1, len(mats)):
                nj = np.linalg.norm(mats[j])
                if nj == 0:
                    continue
                comm = mats[i] @ mats[j] - mats[j] @ mats[i]
                worst = max(worst, float(np.linalg.norm(comm)) / (ni * nj))
        return worst

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "d": self.d,
                "seed": self.seed,
                "V": self.basis.tolist(),
                "diagonals": self.diagonals.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CommutingTuple":
        doc = json.loads(text)
        return cls(
            doc["n"], doc["d"], np.array(doc["V"]), np.array(doc["diagonals"]),
            seed=doc.get("seed"),
        )


def op_conjugate(t: CommutingTuple) -> CliffordOperator:
    """bar(T) as an operator; T + bar(T) = 2 T0 and T bar(T) = sum T_l^2 + T0^2."""
    return t.conjugate_operator()


def _parse_spectrum_spec(spec, n: int, d: int):
    """Return a (n+1, d) diagonal array or a sampler request.

    Accepted forms: the string "random-uniform[a,b]", or an explicit list of
    d joint eigenvalue vectors, each of length n + 1.
    """
    if isinstance(spec, str):
        body = spec.strip()
        prefix = "random-uniform["
        if not (body.startswith(prefix) and body.endswith("]")):
            raise BadSpec(f"unrecognized spectrum spec {spec!r}")
        inner = body[len(prefix):-1]
        try:
            a, b = (float(part) for part in inner.split(","))
        except ValueError as exc:
            raise BadSpec(f"bad bounds in spectrum spec {spec!r}") from exc
        if not a < b:
            raise BadSpec(f"empty interval in spectrum spec {spec!r}")
        return ("uniform", a, b)
    vectors = [np.asarray(v, dtype=float) for v in spec]
    if len(vectors) != d:
        raise BadSpec(f"expected {d} joint eigenvalue vectors, got {len(vectors)}")
    for v in vectors:
        if v.shape != (n + 1,):
            raise BadSpec(
                f"joint eigenvalue vectors need {n + 1} entries, got shape {v.shape}"
            )
    return ("explicit", np.stack(vectors, axis=1))


def make_commuting_tuple(
    n: int,
    d: int,
    seed: int,
    spectrum_spec="random-uniform[-2,2]",
    vector_operator: bool = False,
) -> CommutingTuple:
    """Deterministically generate a commuting tuple with real joint spectrum.

    The shared basis V is drawn uniformly and resampled until cond(V) <= 100,
    keeping residuals of the downstream identities meaningful. With
    ``vector_operator`` the scalar component T0 is forced to zero, as the
    projector theorems require.
    """
    if d < 1:
        raise BadSpec(f"d must be >= 1, got {d}")
    parsed = _parse_spectrum_spec(spectrum_spec, n, d)
    rng = np.random.default_rng(seed)
    while True:
        basis = rng.uniform(-1.0, 1.0, size=(d, d))
        if d == 1 or np.linalg.cond(basis) <= BASIS_CONDITION_LIMIT:
            break
    if parsed[0] == "uniform":
        _, a, b = parsed
        diagonals = rng.uniform(a, b, size=(n + 1, d))
    else:
        diagonals = parsed[1].copy()
    if vector_operator:
        diagonals[0] = 0.0
    return CommutingTuple(n, d, basis, diagonals, seed=seed)


def joint_spectrum(t: CommutingTuple) -> list[SpectralSphere]:
    """Spheres (center, radius) of the joint eigenvalues, merged within 1e-9."""
    spheres: list[list[float]] = []  # [center, radius, multiplicity]
    for k in range(t.d):
        center = float(t.diagonals[0, k])
        radius = float(np.linalg.norm(t.diagonals[1:, k]))
        for entry in spheres:
            if (
                abs(entry[0] - center) <= SPHERE_MERGE_TOL
                and abs(entry[1] - radius) <= SPHERE_MERGE_TOL
            ):
                entry[2] += 1
                break
        else:
            spheres.append([center, radius, 1])
    spheres.sort(key=lambda e: (e[0], e[1]))
    return [SpectralSphere(c, r, int(m)) for c, r, m in spheres]


def spectral_distance(s: SlicePoint, spheres: list[SpectralSphere]) -> float:
    """Distance from s to the spectrum, measured inside the slice plane.

    Each sphere meets C_J in the two points center +/- J radius; distance is
    the minimum over all of them (infinity when the spectrum is empty).
    """
    z = s.as_complex()
    best = np.inf
    for sphere in spheres:
        for sgn in (1.0, -1.0):
            best = min(best, abs(z - complex(sphere.center, sgn * sphere.radius)))
    return float(best)


class SliceComplexOperator:
    """Operator re + J im supported on span{1, J}; isomorphic to re + i im."""

    __slots__ = ("re", "im", "unit")

    def __init__(self, re: np.ndarray, im: np.ndarray, unit: SliceUnit):
        re = np.asarray(re, dtype=float)
        im = np.asarray(im, dtype=float)
        if re.shape != im.shape or re.ndim != 2 or re.shape[0] != re.shape[1]:
            raise ValueError(f"expected square matching matrices, got {re.shape}, {im.shape}")
        self.re = re
        self.im = im
        self.unit = unit

    @property
    def d(self) -> int:
        return self.re.shape[0]

    @classmethod
    def from_complex(cls, mat: np.ndarray, unit: SliceUnit) -> "SliceComplexOperator":
        mat = np.asarray(mat, dtype=complex)
        return cls(mat.real.copy(), mat.imag.copy(), unit)

    def to_complex(self) -> np.ndarray:
        return self.re + 1j * self.im

    def to_clifford_operator(self, n: int | None = None) -> CliffordOperator:
        n = self.unit.n if n is None else n
        out = CliffordOperator(n, self.d, {0: self.re})
        for j in range(n):
            cj = self.unit.direction[j]
            if cj != 0.0:
                out.coeffs[1 << j] = cj * self.im
        # drop blades that are exactly zero matrices (axis-aligned units)
        out.coeffs = {m: mat for m, mat in out.coeffs.items() if np.any(mat)}
        if not out.coeffs:
            out.coeffs[0] = np.zeros((self.d, self.d))
        return out

    @classmethod
    def from_clifford_operator(
        cls,
        a: CliffordOperator,
        unit: SliceUnit,
        tol: float = 1e-8,
    ) -> "SliceComplexOperator":
        """Project A onto span{1, J}; reject if the remainder is too large.

        tol is relative to max(1, ||A||). The default is loose enough to
        absorb commutator noise from float products of commuting matrices.
        """
        re = a.blade(0)
        im = np.zeros((a.d, a.d))
        for j in range(a.n):
            cj = unit.direction[j]
            if cj != 0.0:
                im += cj * a.blade(1 << j)
        embedded = cls(re, im, unit).to_clifford_operator(a.n)
        residual = cm_norm(a - embedded)
        if residual > tol * max(1.0, cm_norm(a)):
            raise NotInSlice(
                f"operator off span{{1, J}} by {residual:.3g} (tol {tol:.1g})"
            )
        return cls(re, im, unit)

    def __mul__(self, other: "SliceComplexOperator") -> "SliceComplexOperator":
        return SliceComplexOperator.from_complex(
            self.to_complex() @ other.to_complex(), self.unit
        )

    def power(self, k: int) -> "SliceComplexOperator":
        return SliceComplexOperator.from_complex(
            np.linalg.matrix_power(self.to_complex(), k), self.unit
        )


def slice_complex_invert(q: SliceComplexOperator) -> SliceComplexOperator:
    """Invert via one complex solve; SpectralPoint if cond >= 1e12."""
    mat = q.to_complex()
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond >= CONDITION_LIMIT:
        raise SpectralPoint(
            f"slice-complex operator condition {cond:.3g} >= {CONDITION_LIMIT:.0e}"
        )
    inv = np.linalg.solve(mat, np.eye(q.d, dtype=complex))
    return SliceComplexOperator.from_complex(inv, q.unit)
