"""Hermite basis of L2(R^3) and exact coefficient-space operator algebra.

The basis functions are built from the Gaussian ground state
``Phi_0(v) = (2*pi)**(-3/4) * exp(-|v|**2/4)`` by the raising operators
``a[+,j] = v_j/2 - d/dv_j`` (one per velocity axis), normalized so that

    Phi_alpha = a[+,1]**a1 a[+,2]**a2 a[+,3]**a3 Phi_0 / sqrt(alpha!)

is orthonormal.  A function is represented by its coefficient vector on all
Phi_alpha with |alpha| = a1+a2+a3 <= N ("degree cap").  All operators act on
coefficients only; there is no velocity grid anywhere in this module.

Coefficient actions (exact, up to Galerkin truncation at the cap):

    raising     out[alpha+e_j] += sqrt(alpha_j+1) * s[alpha]
    lowering    out[alpha-e_j] += sqrt(alpha_j)   * s[alpha]
    v_j         raising + lowering
    d/dv_j      (lowering - raising)/2
    rotation    L[k,j] = v_j d/dv_k - v_k d/dv_j
                       = a[+,j]a[-,k] - a[+,k]a[-,j]   (level preserving)

Truncation policy: ladder output beyond the cap is dropped.  Compositions of
p ladder factors are therefore exact on inputs of degree <= N - p; callers
that need exact identities restrict inputs accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

__all__ = [
    "MultiIndex",
    "HermiteSpectrum",
    "HermiteBasis",
    "enumerate_indices",
    "basis_size",
    "get_basis",
    "zero_spectrum",
    "unit_spectrum",
    "random_spectrum",
    "raise_op",
    "lower_op",
    "multiply_v",
    "differentiate_v",
    "angular",
    "inner_product",
]

MultiIndex = tuple[int, int, int]


def basis_size(N: int) -> int:
    """Number of multi-indices with |alpha| <= N, i.e. C(N+3, 3)."""
    return math.comb(N + 3, 3)


def enumerate_indices(N: int) -> list[MultiIndex]:
    """All alpha = (a1, a2, a3) with |alpha| <= N in canonical order.

    Canonical order is ascending by level |alpha|, lexicographic within a
    level.  The position of an index in this list is its coefficient slot.
    """
    if N < 0:
        raise ValueError("degree cap must be >= 0")
    out: list[MultiIndex] = []
    for level in range(N + 1):
        for a1 in range(level + 1):
            for a2 in range(level - a1 + 1):
                out.append((a1, a2, level - a1 - a2))
    return out


class HermiteBasis:
    """Precomputed index tables and sparse operator matrices for one cap N.

    Instances are cached by :func:`get_basis`; they are immutable after
    construction and safe to share across threads.
    """

    def __init__(self, N: int):
        self.N = N
        self.indices = enumerate_indices(N)
        self.size = len(self.indices)
        assert self.size == basis_size(N)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self.levels = np.array([sum(a) for a in self.indices], dtype=np.int64)
        # slices of the canonical ordering, one per level
        self.level_slices = []
        start = 0
        for n in range(N + 1):
            width = (n + 1) * (n + 2) // 2
            self.level_slices.append(slice(start, start + width))
            start += width
        self._raising = [self._build_raising(axis) for axis in range(3)]
        self._lowering = [R.T.tocsr() for R in self._raising]
        self._op_cache: dict[str, sp.csr_matrix] = {}

    def _build_raising(self, axis: int) -> sp.csr_matrix:
        rows, cols, vals = [], [], []
        for col, alpha in enumerate(self.indices):
            if sum(alpha) == self.N:
                continue  # pushed past the cap, dropped
            up = list(alpha)
            up[axis] += 1
            rows.append(self.index_of[tuple(up)])
            cols.append(col)
            vals.append(math.sqrt(alpha[axis] + 1))
        return sp.csr_matrix(
            (vals, (rows, cols)), shape=(self.size, self.size), dtype=np.float64
        )

    def raising(self, axis: int) -> sp.csr_matrix:
        """Matrix of a[+,axis] (0-based axis)."""
        return self._raising[axis]

    def lowering(self, axis: int) -> sp.csr_matrix:
        """Matrix of a[-,axis] (0-based axis); the transpose of raising."""
        return self._lowering[axis]

    def coordinate(self, axis: int) -> sp.csr_matrix:
        """Matrix of multiplication by v_axis."""
        key = f"v{axis}"
        if key not in self._op_cache:
            self._op_cache[key] = (self._raising[axis] + self._lowering[axis]).tocsr()
        return self._op_cache[key]

    def derivative(self, axis: int) -> sp.csr_matrix:
        """Matrix of d/dv_axis."""
        key = f"d{axis}"
        if key not in self._op_cache:
            self._op_cache[key] = (
                0.5 * (self._lowering[axis] - self._raising[axis])
            ).tocsr()
        return self._op_cache[key]

    def rotation(self, k: int, j: int) -> sp.csr_matrix:
        """Matrix of L[k,j] = v_j d/dv_k - v_k d/dv_j (0-based axes, k != j)."""
        if k == j:
            raise ValueError("rotation axes must differ")
        key = f"L{k}{j}"
        if key not in self._op_cache:
            A = self._raising[j] @ self._lowering[k] - self._raising[k] @ self._lowering[j]
            self._op_cache[key] = A.tocsr()
        return self._op_cache[key]

    def number_operator(self) -> sp.csr_matrix:
        """Matrix of sum_j a[+,j] a[-,j]; diagonal with entries |alpha|."""
        key = "number"
        if key not in self._op_cache:
            self._op_cache[key] = sp.diags(self.levels.astype(np.float64)).tocsr()
        return self._op_cache[key]

    def sphere_laplacian(self) -> sp.csr_matrix:
        """Matrix of the Laplace-Beltrami operator (1/2) sum_{j!=k} L[k,j]^2."""
        key = "sphere"
        if key not in self._op_cache:
            acc = sp.csr_matrix((self.size, self.size), dtype=np.float64)
            for k in range(3):
                for j in range(3):
                    if k == j:
                        continue
                    A = self.rotation(k, j)
                    acc = acc + 0.5 * (A @ A)
            self._op_cache[key] = acc.tocsr()
        return self._op_cache[key]


@lru_cache(maxsize=None)
def get_basis(N: int) -> HermiteBasis:
    return HermiteBasis(N)


@dataclass
class HermiteSpectrum:
    """Coefficients of a function on the orthonormal basis, |alpha| <= cap.

    The basis is orthonormal in L2(R^3), so the squared L2 norm is the sum of
    squared coefficient moduli.
    """

    degree_cap: int
    coeffs: np.ndarray

    def __post_init__(self):
        expected = basis_size(self.degree_cap)
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.shape != (expected,):
            raise ValueError(
                f"coefficient vector must have length {expected} for cap "
                f"{self.degree_cap}, got shape {self.coeffs.shape}"
            )

    @property
    def basis(self) -> HermiteBasis:
        return get_basis(self.degree_cap)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def degree(self) -> int:
        """Largest level carrying a nonzero coefficient ( -1 for the zero function)."""
        nz = np.nonzero(self.coeffs)[0]
        if nz.size == 0:
            return -1
        return int(self.basis.levels[nz].max())

    def copy(self) -> "HermiteSpectrum":
        return HermiteSpectrum(self.degree_cap, self.coeffs.copy())

    def __add__(self, other: "HermiteSpectrum") -> "HermiteSpectrum":
        self._check_compatible(other)
        return HermiteSpectrum(self.degree_cap, self.coeffs + other.coeffs)

    def __sub__(self, other: "HermiteSpectrum") -> "HermiteSpectrum":
        self._check_compatible(other)
        return HermiteSpectrum(self.degree_cap, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "HermiteSpectrum":
        return HermiteSpectrum(self.degree_cap, self.coeffs * scalar)

    __rmul__ = __mul__

    def _check_compatible(self, other: "HermiteSpectrum"):
        if self.degree_cap != other.degree_cap:
            raise ValueError("spectra have different degree caps")


def zero_spectrum(N: int) -> HermiteSpectrum:
    return HermiteSpectrum(N, np.zeros(basis_size(N), dtype=np.complex128))


def unit_spectrum(N: int, alpha: MultiIndex) -> HermiteSpectrum:
    """The single basis function Phi_alpha as a spectrum with cap N."""
    s = zero_spectrum(N)
    s.coeffs[get_basis(N).index_of[tuple(alpha)]] = 1.0
    return s


def random_spectrum(
    N: int,
    rng: np.random.Generator,
    max_level: int | None = None,
    complex_valued: bool = True,
) -> HermiteSpectrum:
    """Random unit-norm spectrum supported on levels <= max_level (default N)."""
    basis = get_basis(N)
    c = rng.standard_normal(basis.size)
    if complex_valued:
        c = c + 1j * rng.standard_normal(basis.size)
    if max_level is not None:
        c = np.where(basis.levels <= max_level, c, 0.0)
    c = c / np.linalg.norm(c)
    return HermiteSpectrum(N, c)


def _axis_03(j: int) -> int:
    if j not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    return j - 1


def raise_op(j: int, s: HermiteSpectrum) -> HermiteSpectrum:
    """Apply the raising operator a[+,j], axis j in 1..3.

    Output entries past the degree cap are dropped.
    """
    return HermiteSpectrum(s.degree_cap, s.basis.raising(_axis_03(j)) @ s.coeffs)


def lower_op(j: int, s: HermiteSpectrum) -> HermiteSpectrum:
    """Apply the lowering operator a[-,j], axis j in 1..3."""
    return HermiteSpectrum(s.degree_cap, s.basis.lowering(_axis_03(j)) @ s.coeffs)


def multiply_v(j: int, s: HermiteSpectrum) -> HermiteSpectrum:
    """Multiply by the coordinate v_j (= raising + lowering).

    Exact for inputs of degree <= N-1; the level-(N+1) part of the product is
    truncated otherwise.
    """
    return HermiteSpectrum(s.degree_cap, s.basis.coordinate(_axis_03(j)) @ s.coeffs)


def differentiate_v(j: int, s: HermiteSpectrum) -> HermiteSpectrum:
    """Differentiate along v_j (= (lowering - raising)/2); same truncation
    caveat as multiply_v."""
    return HermiteSpectrum(s.degree_cap, s.basis.derivative(_axis_03(j)) @ s.coeffs)


def angular(k: int, j: int, s: HermiteSpectrum) -> HermiteSpectrum:
    """Apply the rotation generator L[k,j] = v_j d/dv_k - v_k d/dv_j.

    Level preserving, hence exact at every degree <= N.  Axes 1..3, k != j.
    """
    return HermiteSpectrum(
        s.degree_cap, s.basis.rotation(_axis_03(k), _axis_03(j)) @ s.coeffs
    )


def inner_product(s1: HermiteSpectrum, s2: HermiteSpectrum) -> complex:
    """L2(R^3) inner product (s1, s2) = sum s1[alpha] * conj(s2[alpha])."""
    s1._check_compatible(s2)
    return complex(np.vdot(s2.coeffs, s1.coeffs))
