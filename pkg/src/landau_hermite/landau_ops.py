"""Galerkin form of the linearized Landau operator and the bilinear term.

For Maxwellian molecules the linearized collision operator diagonalizes over
Hermite levels and splits as L = L1 + L2 with

    L1 = 2 * (number operator) - (sphere Laplacian)
    L2 = [sphere - 2*number] P1 + [-sphere - 2*number] P2

where P1, P2 project on Hermite levels 1 and 2.  L is level preserving,
symmetric positive semidefinite, and annihilates exactly the five collision
invariants (ground state, the three v_j modes, and the radial level-2
combination).

The bilinear term B(f, g) (collision interaction of two perturbations) is
trilinear in (f, g, test) and touches f only through ten low-order moments.
Three independent routes to the same object are provided:

* ``gamma_weak_D``  - the seven-block ladder/rotation form, coded literally.
* ``gamma_weak_E``  - an equivalent seven-block form using only coordinate
  multiplications and derivatives.
* ``gamma_apply``   - the strong (matrix) form obtained from the D blocks by
  moving every operator off the test slot (adjoints: lowering <-> raising,
  rotations are skew).  f enters through moment coefficients multiplying ten
  fixed sparse matrices, which makes repeated application cheap.

``gamma_quadrature_oracle`` evaluates the defining double integral over
(v, v*) with tensor Gauss-Hermite quadrature and pointwise Hermite function
evaluation - no ladder algebra - as an independent reference for the three
routes above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .hermite_core import (
    HermiteSpectrum,
    get_basis,
    unit_spectrum,
    inner_product,
    raise_op,
    lower_op,
    multiply_v,
    differentiate_v,
    angular,
)

__all__ = [
    "CollisionMoments",
    "LandauOperators",
    "get_operators",
    "apply_L1",
    "apply_L2",
    "apply_L",
    "level_blocks_L",
    "collision_moments",
    "gamma_weak_D",
    "gamma_weak_E",
    "gamma_apply",
    "gamma_quadrature_oracle",
    "QuadratureConvergenceError",
    "MOMENT_PAIRS",
]

# off-diagonal level-2 index pairs, 0-based axes, in slot order
MOMENT_PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass
class CollisionMoments:
    """The ten pairings of f that enter the bilinear collision term.

    m0      (f, Phi_0)
    m1[i]   (f, Phi_{e_i})                       i = 1..3
    m2d[i]  (f, Phi_{2 e_i})                     i = 1..3
    m2o[p]  (f, Phi_{e_i + e_j})                 p over (1,2), (1,3), (2,3)
    """

    m0: complex
    m1: np.ndarray
    m2d: np.ndarray
    m2o: np.ndarray

    def as_vector(self) -> np.ndarray:
        """Flat length-10 vector in the fixed slot order m0, m1, m2d, m2o."""
        return np.concatenate(
            ([self.m0], self.m1, self.m2d, self.m2o)
        ).astype(np.complex128)


class LandauOperators:
    """Sparse matrices of L1, L2, L and the ten bilinear moment operators.

    One instance per degree cap, cached by :func:`get_operators`.  Matrices
    are built once and read-only afterwards.
    """

    def __init__(self, N: int):
        if N < 2:
            raise ValueError("operator assembly needs degree cap >= 2")
        self.N = N
        self.basis = get_basis(N)
        b = self.basis
        sphere = b.sphere_laplacian()
        number2 = 2.0 * b.number_operator()
        self.L1 = (number2 - sphere).tocsr()
        p1 = sp.diags((b.levels == 1).astype(np.float64))
        p2 = sp.diags((b.levels == 2).astype(np.float64))
        self.L2 = ((sphere - number2) @ p1 + (-sphere - number2) @ p2).tocsr()
        self.L = (self.L1 + self.L2).tocsr()
        self.moment_slots = self._moment_slots()
        self.moment_operators = self._build_moment_operators()

    def _moment_slots(self) -> np.ndarray:
        """Coefficient slots of the ten moment basis functions."""
        ix = self.basis.index_of
        slots = [ix[(0, 0, 0)]]
        for i in range(3):
            e = [0, 0, 0]
            e[i] = 1
            slots.append(ix[tuple(e)])
        for i in range(3):
            e = [0, 0, 0]
            e[i] = 2
            slots.append(ix[tuple(e)])
        for a, bx in MOMENT_PAIRS:
            e = [0, 0, 0]
            e[a] = 1
            e[bx] = 1
            slots.append(ix[tuple(e)])
        return np.array(slots, dtype=np.int64)

    def _build_moment_operators(self) -> list[sp.csr_matrix]:
        """For each moment slot m, the matrix G_m with
        B(f, g) = sum_m moment_m(f) * (G_m @ g).

        Derived from the seven weak blocks by taking adjoints on the test
        slot; the ground-state moment operator is exactly -L1 and the whole
        family reproduces -L2 when the moments are taken of g itself.
        """
        b = self.basis
        R = [b.raising(i) for i in range(3)]
        ops: list[sp.csr_matrix] = []
        # m0: -2 sum_i a+ a-  + sphere Laplacian  == -L1
        ops.append((-self.L1).tocsr())
        # m1[a]: 2 a+_a  + sum_{i != a} (a+_i L_{i,a} + L_{i,a} a+_i)
        for a in range(3):
            acc = 2.0 * R[a]
            for i in range(3):
                if i == a:
                    continue
                A = b.rotation(i, a)
                acc = acc + R[i] @ A + A @ R[i]
            ops.append(acc.tocsr())
        # m2d[a]: sqrt(2) sum_{i != a} (a+_i)^2
        for a in range(3):
            acc = sp.csr_matrix((b.size, b.size), dtype=np.float64)
            for i in range(3):
                if i == a:
                    continue
                acc = acc + R[i] @ R[i]
            ops.append((math.sqrt(2.0) * acc).tocsr())
        # m2o[(a,c)]: -2 a+_a a+_c
        for a, c in MOMENT_PAIRS:
            ops.append((-2.0 * (R[a] @ R[c])).tocsr())
        return ops

    def level_blocks(self) -> list[np.ndarray]:
        """Dense blocks of L, one per Hermite level (L is level preserving)."""
        blocks = []
        Ld = self.L
        for sl in self.basis.level_slices:
            blocks.append(Ld[sl, sl].toarray())
        return blocks

    def apply_gamma_coeffs(self, mom: np.ndarray, g: np.ndarray) -> np.ndarray:
        """B(f, g) on raw coefficient vectors, f given by its moment vector."""
        out = np.zeros_like(g, dtype=np.complex128)
        for m, G in zip(mom, self.moment_operators):
            if m != 0.0:
                out += m * (G @ g)
        return out


@lru_cache(maxsize=None)
def get_operators(N: int) -> LandauOperators:
    return LandauOperators(N)


def apply_L1(s: HermiteSpectrum) -> HermiteSpectrum:
    """Harmonic-oscillator-plus-rotation part; level preserving, exact for
    all degrees <= cap."""
    return HermiteSpectrum(s.degree_cap, get_operators(s.degree_cap).L1 @ s.coeffs)


def apply_L2(s: HermiteSpectrum) -> HermiteSpectrum:
    """Finite-rank correction supported on Hermite levels 1 and 2."""
    return HermiteSpectrum(s.degree_cap, get_operators(s.degree_cap).L2 @ s.coeffs)


def apply_L(s: HermiteSpectrum) -> HermiteSpectrum:
    """Full linearized collision operator L = L1 + L2."""
    return HermiteSpectrum(s.degree_cap, get_operators(s.degree_cap).L @ s.coeffs)


def level_blocks_L(N: int) -> list[np.ndarray]:
    """Dense symmetric PSD blocks of L per level; block n has dimension
    (n+1)(n+2)/2."""
    return get_operators(N).level_blocks()


def collision_moments(f: HermiteSpectrum) -> CollisionMoments:
    """Read the ten bilinear-term moments directly off the coefficients."""
    if f.degree_cap < 2:
        raise ValueError("moments need degree cap >= 2")
    slots = get_operators(f.degree_cap).moment_slots
    c = f.coeffs[slots]
    return CollisionMoments(
        m0=complex(c[0]), m1=c[1:4].copy(), m2d=c[4:7].copy(), m2o=c[7:10].copy()
    )


def _ordered_pairs():
    for i in range(1, 4):
        for j in range(1, 4):
            if i != j:
                yield i, j


def gamma_weak_D(f: HermiteSpectrum, g: HermiteSpectrum, h: HermiteSpectrum) -> complex:
    """Seven-block ladder/rotation form of (B(f,g), h).

    Exact on the truncated space for h of any degree; identical to the E form
    when g and h have degree <= cap-2.
    """
    mom = collision_moments(f)
    pair_slot = {(a + 1, b + 1): p for p, (a, b) in enumerate(MOMENT_PAIRS)}
    d1 = d2 = d3 = d4 = d5 = d6 = d7 = 0.0 + 0.0j
    for i, j in _ordered_pairs():
        lo_i_h = lower_op(i, h)
        d1 += mom.m2d[j - 1] * inner_product(raise_op(i, g), lo_i_h)
        d2 -= mom.m0 * inner_product(lower_op(i, g), lo_i_h)
        key = (i, j) if i < j else (j, i)
        d3 -= mom.m2o[pair_slot[key]] * inner_product(raise_op(j, g), lo_i_h)
        d4 += mom.m1[i - 1] * inner_product(g, lo_i_h)
        ang_ij_h = angular(i, j, h)
        d5 -= 0.5 * mom.m0 * inner_product(angular(i, j, g), ang_ij_h)
        d6 += mom.m1[j - 1] * inner_product(angular(i, j, g), lo_i_h)
        d7 -= mom.m1[j - 1] * inner_product(raise_op(i, g), ang_ij_h)
    return complex(math.sqrt(2.0) * d1 + d2 + d3 + d4 + d5 + d6 + d7)


def gamma_weak_E(f: HermiteSpectrum, g: HermiteSpectrum, h: HermiteSpectrum) -> complex:
    """Seven-block coordinate/derivative form of (B(f,g), h).

    Uses only multiply_v and differentiate_v on g and h, so compositions
    truncate: agrees with the D form for g, h of degree <= cap-2.
    """
    N = f.degree_cap
    phi0 = unit_spectrum(N, (0, 0, 0))

    def fmom(*axes: int) -> complex:
        w = phi0
        for ax in axes:
            w = multiply_v(ax, w)
        return inner_product(f, w)

    def grad_minus_half_v(ax: int, s: HermiteSpectrum) -> HermiteSpectrum:
        return differentiate_v(ax, s) - 0.5 * multiply_v(ax, s)

    def rot(jj: int, kk: int, s: HermiteSpectrum) -> HermiteSpectrum:
        # v_j d_k - v_k d_j
        return multiply_v(jj, differentiate_v(kk, s)) - multiply_v(
            kk, differentiate_v(jj, s)
        )

    e1 = e2 = e3 = e4 = e5 = e6 = e7 = 0.0 + 0.0j
    for k, j in _ordered_pairs():
        minus_ak_h = -1.0 * (differentiate_v(k, h) + 0.5 * multiply_v(k, h))
        e1 += fmom(j, j) * inner_product(grad_minus_half_v(k, g), minus_ak_h)
        e2 -= fmom(k, j) * inner_product(grad_minus_half_v(j, g), minus_ak_h)
        e3 += fmom() * inner_product(multiply_v(k, g), minus_ak_h)
        e4 -= fmom(k) * inner_product(g, minus_ak_h)
        rot_g = rot(j, k, g)
        rot_h = rot(j, k, h)
        e5 -= 0.5 * fmom() * inner_product(rot_g, rot_h)
        e6 -= fmom(j) * inner_product(rot_g, minus_ak_h)
        e7 += fmom(j) * inner_product(grad_minus_half_v(k, g), rot_h)
    return complex(e1 + e2 + e3 + e4 + e5 + e6 + e7)


def gamma_apply(f: HermiteSpectrum, g: HermiteSpectrum) -> HermiteSpectrum:
    """Strong form of the bilinear term: (gamma_apply(f,g), h) equals
    gamma_weak_D(f,g,h) for every h on the truncated space.

    Identities: gamma_apply(Phi_0, g) == -L1 g, gamma_apply(g, Phi_0) == -L2 g.
    Output levels exceed those of g by at most 2.
    """
    f._check_compatible(g)
    ops = get_operators(f.degree_cap)
    mom = f.coeffs[ops.moment_slots]
    return HermiteSpectrum(f.degree_cap, ops.apply_gamma_coeffs(mom, g.coeffs))


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------


class QuadratureConvergenceError(RuntimeError):
    """Raised when raising the quadrature order still moves the result."""


def _hermite_value_tables(max_deg: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polynomial parts p_n and p_n' of the basis functions at the points x.

    p_0 = (2 pi)^(-1/4), p_{n+1} = (x p_n - sqrt(n) p_{n-1}) / sqrt(n+1),
    and the basis function is p_n(x) * exp(-x^2/4).
    """
    P = np.zeros((max_deg + 1, x.size))
    dP = np.zeros_like(P)
    P[0] = (2.0 * math.pi) ** (-0.25)
    if max_deg >= 1:
        P[1] = x * P[0]
        dP[1] = P[0]
    for n in range(1, max_deg):
        P[n + 1] = (x * P[n] - math.sqrt(n) * P[n - 1]) / math.sqrt(n + 1)
    for n in range(1, max_deg):
        dP[n + 1] = math.sqrt(n + 1) * P[n]
    return P, dP


def _eval_poly_grids(
    coeffs: np.ndarray,
    indices: np.ndarray,
    P: np.ndarray,
    dP: np.ndarray,
    n1d: int,
):
    """Pointwise polynomial parts of s, of (d_j - v_j) s, and of d_k s on the
    tensor grid, for a spectrum with index table `indices` (rows of alpha)."""
    npts = n1d**3
    # per-basis-function tensor values, assembled axis by axis
    V = (
        P[indices[:, 0]][:, :, None, None]
        * P[indices[:, 1]][:, None, :, None]
        * P[indices[:, 2]][:, None, None, :]
    ).reshape(len(indices), npts)
    D = []
    for ax in range(3):
        tabs = [P[indices[:, 0]], P[indices[:, 1]], P[indices[:, 2]]]
        tabs[ax] = dP[indices[:, ax]]
        D.append(
            (
                tabs[0][:, :, None, None]
                * tabs[1][:, None, :, None]
                * tabs[2][:, None, None, :]
            ).reshape(len(indices), npts)
        )
    val = coeffs @ V
    dval = [coeffs @ D[ax] for ax in range(3)]
    return val, dval, V, D


_A_TERMS: dict[tuple[int, int], list[tuple[float, tuple, tuple]]] = {}


def _a_matrix_terms(k: int, j: int):
    """Separated monomial expansion of the collision matrix entry
    a_kj(v - v*) = delta_kj |v - v*|^2 - (v_k - v*_k)(v_j - v*_j), as
    (coefficient, v-exponents, v*-exponents) triples.  0-based axes."""
    key = (k, j)
    if key not in _A_TERMS:
        terms = []
        if k == j:
            for axis in range(3):
                if axis == k:
                    continue
                ev = [0, 0, 0]
                ev[axis] = 2
                e1 = [0, 0, 0]
                e1[axis] = 1
                terms.append((1.0, tuple(ev), (0, 0, 0)))
                terms.append((-2.0, tuple(e1), tuple(e1)))
                terms.append((1.0, (0, 0, 0), tuple(ev)))
        else:
            ek = [0, 0, 0]
            ek[k] = 1
            ej = [0, 0, 0]
            ej[j] = 1
            ekj = [0, 0, 0]
            ekj[k] += 1
            ekj[j] += 1
            terms.append((-1.0, tuple(ekj), (0, 0, 0)))
            terms.append((1.0, tuple(ek), tuple(ej)))
            terms.append((1.0, tuple(ej), tuple(ek)))
            terms.append((-1.0, (0, 0, 0), tuple(ekj)))
        _A_TERMS[key] = terms
    return _A_TERMS[key]


def _oracle_at_order(
    f: HermiteSpectrum, g: HermiteSpectrum, order: int
) -> np.ndarray:
    N = f.degree_cap
    basis = get_basis(N)
    indices = np.array(basis.indices, dtype=np.int64)
    max_deg = N

    nodes, wts = np.polynomial.hermite.hermgauss(order)
    x = math.sqrt(2.0) * nodes  # points where the e^{-v^2/2} weight lives
    P, dP = _hermite_value_tables(max_deg, x)

    n1 = order
    w3 = (math.sqrt(2.0) ** 3) * (
        wts[:, None, None] * wts[None, :, None] * wts[None, None, :]
    ).reshape(-1)
    grid = [
        np.broadcast_to(x[:, None, None], (n1, n1, n1)).reshape(-1),
        np.broadcast_to(x[None, :, None], (n1, n1, n1)).reshape(-1),
        np.broadcast_to(x[None, None, :], (n1, n1, n1)).reshape(-1),
    ]

    def monomial(exps):
        m = np.ones_like(grid[0])
        for ax, e in enumerate(exps):
            if e:
                m = m * grid[ax] ** e
        return m

    fval, fder, _, _ = _eval_poly_grids(f.coeffs, indices, P, dP, n1)
    gval, gder, V, D = _eval_poly_grids(g.coeffs, indices, P, dP, n1)

    mu_fac = (2.0 * math.pi) ** (-0.75)
    # v*-side profiles: sqrt(mu) f  and  sqrt(mu) (d_j - v*_j/2) f
    star_f = mu_fac * fval
    star_df = [mu_fac * (fder[ax] - grid[ax] * fval) for ax in range(3)]
    # v-side profiles of g
    g_plain = gval
    g_ladder = [gder[ax] - grid[ax] * gval for ax in range(3)]
    # test-side: polynomial part of (-d_k - v_k/2) Phi_beta is -d_k p_beta
    test_k = [-D[ax] for ax in range(3)]

    out = np.zeros(basis.size, dtype=np.complex128)
    for k in range(3):
        for j in range(3):
            for coef, pexp, qexp in _a_matrix_terms(k, j):
                mono = monomial(pexp)
                qmono = monomial(qexp)
                w_star = np.sum(w3 * qmono * star_f)
                x_star = np.sum(w3 * qmono * star_df[j])
                u_side = test_k[k] @ (w3 * mono * g_ladder[j])
                v_side = test_k[k] @ (w3 * mono * g_plain)
                out += coef * (w_star * u_side - x_star * v_side)
    return out


def gamma_quadrature_oracle(
    f: HermiteSpectrum,
    g: HermiteSpectrum,
    order: int = 20,
    convergence_tol: float = 1e-9,
) -> HermiteSpectrum:
    """Reference bilinear term from the defining (v, v*) double integral.

    The weak form is integrated by tensor Gauss-Hermite quadrature on both
    velocity arguments (weight exp(-|.|^2/2) after absorbing the Gaussian
    factors of the arguments), pairing against every basis function up to the
    cap.  The separable polynomial collision matrix lets the 6-D tensor sum
    factor into 3-D sums; the result is identical to a literal 6-D
    evaluation up to summation order.

    The degree of f and g must be <= 3 and the cap <= 8 (cost guard).  The
    computation is repeated at `order + 4`; if any coefficient moves by more
    than `convergence_tol` a QuadratureConvergenceError is raised.
    """
    f._check_compatible(g)
    if f.degree() > 3 or g.degree() > 3:
        raise ValueError("oracle arguments must have degree <= 3")
    if f.degree_cap > 8:
        raise ValueError("oracle degree cap limited to 8")
    lo = _oracle_at_order(f, g, order)
    hi = _oracle_at_order(f, g, order + 4)
    drift = float(np.max(np.abs(hi - lo)))
    if drift > convergence_tol:
        raise QuadratureConvergenceError(
            f"quadrature order {order} insufficient: order +4 moved a "
            f"coefficient by {drift:.3e}"
        )
    return HermiteSpectrum(f.degree_cap, hi)


def _oracle_full6d(f: HermiteSpectrum, g: HermiteSpectrum, order: int = 6) -> np.ndarray:
    """Literal 6-D tensor quadrature over (v, v*) pairs, for cross-checking
    the factored path in tests.  Cost grows like order^6; keep order small."""
    N = f.degree_cap
    basis = get_basis(N)
    indices = np.array(basis.indices, dtype=np.int64)
    nodes, wts = np.polynomial.hermite.hermgauss(order)
    x = math.sqrt(2.0) * nodes
    P, dP = _hermite_value_tables(N, x)
    n1 = order
    w3 = (math.sqrt(2.0) ** 3) * (
        wts[:, None, None] * wts[None, :, None] * wts[None, None, :]
    ).reshape(-1)
    grid = [
        np.broadcast_to(x[:, None, None], (n1, n1, n1)).reshape(-1),
        np.broadcast_to(x[None, :, None], (n1, n1, n1)).reshape(-1),
        np.broadcast_to(x[None, None, :], (n1, n1, n1)).reshape(-1),
    ]
    fval, fder, _, _ = _eval_poly_grids(f.coeffs, indices, P, dP, n1)
    gval, gder, V, D = _eval_poly_grids(g.coeffs, indices, P, dP, n1)
    mu_fac = (2.0 * math.pi) ** (-0.75)
    star_f = mu_fac * fval
    star_df = [mu_fac * (fder[ax] - grid[ax] * fval) for ax in range(3)]
    g_ladder = [gder[ax] - grid[ax] * gval for ax in range(3)]
    test_k = [-D[ax] for ax in range(3)]

    npts = n1**3
    out = np.zeros(basis.size, dtype=np.complex128)
    # pairwise collision matrix on the product grid, one (k, j) at a time
    dz = [grid[ax][:, None] - grid[ax][None, :] for ax in range(3)]  # v - v*
    z2 = dz[0] ** 2 + dz[1] ** 2 + dz[2] ** 2
    for k in range(3):
        for j in range(3):
            akj = (z2 if k == j else 0.0) - dz[k] * dz[j]
            # sum over v* for both f profiles
            inner1 = akj @ (w3 * star_f)  # (npts,)
            inner2 = akj @ (w3 * star_df[j])
            integrand = inner1 * g_ladder[j] - inner2 * gval
            out += test_k[k] @ (w3 * integrand)
    return out
