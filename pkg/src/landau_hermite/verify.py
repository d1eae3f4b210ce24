"""Named verification suites aggregating the module invariants.

Each check yields a record {suite, check, status, worst_value, tolerance};
a suite passes when every check does.  Suites: ladder, linear_op,
gamma_oracle, weights, kolmogorov, plus "all".  Independent checks may run
in parallel; the thread budget is capped by the LANDAU_THREADS environment
variable.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import hermite_core as hc
from . import landau_ops as lo
from . import weights as wt
from . import kolmogorov as kg

__all__ = ["SUITES", "run_suite", "thread_count"]


def thread_count() -> int:
    raw = os.environ.get("LANDAU_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _record(suite, check, ok, worst, tol):
    return {
        "suite": suite,
        "check": check,
        "status": "pass" if ok else "fail",
        "worst_value": float(worst),
        "tolerance": float(tol),
    }


# ---------------------------------------------------------------------------
# ladder
# ---------------------------------------------------------------------------


def _ladder_checks():
    N = 12
    rng = np.random.default_rng(100)
    tol = 1e-12
    worst_comm = worst_adj = worst_skew = worst_ident = 0.0
    for _ in range(100):
        s = hc.random_spectrum(N, rng, max_level=N - 2)
        s2 = hc.random_spectrum(N, rng, max_level=N - 2)
        for j in (1, 2, 3):
            comm = (
                hc.lower_op(j, hc.raise_op(j, s)) - hc.raise_op(j, hc.lower_op(j, s))
            ).coeffs - s.coeffs
            worst_comm = max(worst_comm, float(np.max(np.abs(comm))))
            adj = hc.inner_product(hc.raise_op(j, s), s2) - hc.inner_product(
                s, hc.lower_op(j, s2)
            )
            worst_adj = max(worst_adj, abs(adj))
        for k, j in ((1, 2), (2, 3), (3, 1)):
            skew = hc.inner_product(hc.angular(k, j, s), s2) + hc.inner_product(
                s, hc.angular(k, j, s2)
            )
            worst_skew = max(worst_skew, abs(skew))
            ident = (
                hc.angular(k, j, s).coeffs
                - (
                    hc.multiply_v(j, hc.differentiate_v(k, s))
                    - hc.multiply_v(k, hc.differentiate_v(j, s))
                ).coeffs
            )
            worst_ident = max(worst_ident, float(np.max(np.abs(ident))))
    yield _record("ladder", "commutation", worst_comm <= tol, worst_comm, tol)
    yield _record("ladder", "adjointness", worst_adj <= tol, worst_adj, tol)
    yield _record("ladder", "rotation_skew", worst_skew <= tol, worst_skew, tol)
    yield _record("ladder", "rotation_ladder_identity", worst_ident <= tol, worst_ident, tol)


# ---------------------------------------------------------------------------
# linear operator
# ---------------------------------------------------------------------------


def _linear_op_checks():
    N = 10
    rng = np.random.default_rng(101)
    invariants = [hc.unit_spectrum(N, (0, 0, 0))]
    for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        invariants.append(hc.unit_spectrum(N, e))
    radial = (
        hc.unit_spectrum(N, (2, 0, 0))
        + hc.unit_spectrum(N, (0, 2, 0))
        + hc.unit_spectrum(N, (0, 0, 2))
    )
    invariants.append(radial)
    worst_kernel = max(lo.apply_L(s).norm() for s in invariants)
    yield _record("linear_op", "collision_invariant_kernel", worst_kernel <= 1e-12, worst_kernel, 1e-12)

    blocks = lo.level_blocks_L(N)
    worst_sym = max(float(np.max(np.abs(b - b.T))) for b in blocks)
    min_eig = min(float(np.linalg.eigvalsh(b).min()) for b in blocks)
    yield _record("linear_op", "blocks_symmetric", worst_sym <= 1e-12, worst_sym, 1e-12)
    yield _record("linear_op", "blocks_psd", min_eig >= -1e-10, min_eig, -1e-10)

    s = hc.unit_spectrum(N, (1, 1, 0))
    eig_res = float(np.max(np.abs(lo.apply_L(s).coeffs - 12.0 * s.coeffs)))
    yield _record("linear_op", "level2_eigenvalue_12", eig_res <= 1e-10, eig_res, 1e-10)

    worst_coer = 0.0
    for _ in range(100):
        g = hc.random_spectrum(N, rng, max_level=N - 2)
        lhs = hc.inner_product(lo.apply_L1(g), g).real
        total = 0.0
        for j in (1, 2, 3):
            total += 2.0 * hc.differentiate_v(j, g).norm() ** 2
            total += 0.5 * hc.multiply_v(j, g).norm() ** 2
        for k in (1, 2, 3):
            for j in (1, 2, 3):
                if k != j:
                    total += 0.5 * hc.angular(k, j, g).norm() ** 2
        worst_coer = max(worst_coer, abs(lhs - (total - 3.0 * g.norm() ** 2)))
    yield _record("linear_op", "coercivity_identity", worst_coer <= 1e-10, worst_coer, 1e-10)


# ---------------------------------------------------------------------------
# bilinear term and its oracle
# ---------------------------------------------------------------------------


def _gamma_checks():
    N = 10
    rng = np.random.default_rng(102)
    worst_de = worst_da = 0.0
    for _ in range(25):
        f = hc.random_spectrum(N, rng)
        g = hc.random_spectrum(N, rng, max_level=N - 2)
        h = hc.random_spectrum(N, rng, max_level=N - 2)
        d = lo.gamma_weak_D(f, g, h)
        e = lo.gamma_weak_E(f, g, h)
        a = hc.inner_product(lo.gamma_apply(f, g), h)
        worst_de = max(worst_de, abs(d - e))
        worst_da = max(worst_da, abs(d - a))
    yield _record("gamma_oracle", "weak_forms_agree", worst_de <= 1e-12, worst_de, 1e-12)
    yield _record("gamma_oracle", "strong_form_agrees", worst_da <= 1e-12, worst_da, 1e-12)

    phi0 = hc.unit_spectrum(N, (0, 0, 0))
    worst_id = 0.0
    for _ in range(5):
        g = hc.random_spectrum(N, rng)
        worst_id = max(
            worst_id,
            float(np.max(np.abs((lo.gamma_apply(phi0, g) + lo.apply_L1(g)).coeffs))),
            float(np.max(np.abs((lo.gamma_apply(g, phi0) + lo.apply_L2(g)).coeffs))),
        )
    yield _record("gamma_oracle", "ground_state_identities", worst_id <= 1e-12, worst_id, 1e-12)

    worst_cons = 0.0
    slots = lo.get_operators(N).moment_slots
    for _ in range(10):
        g = hc.random_spectrum(N, rng, max_level=N - 2)
        out = lo.gamma_apply(g, g)
        mom = out.coeffs[slots]
        vals = [abs(mom[0]), abs(mom[1]), abs(mom[2]), abs(mom[3]), abs(mom[4:7].sum())]
        worst_cons = max(worst_cons, max(vals))
    yield _record("gamma_oracle", "conservation_moments", worst_cons <= 1e-10, worst_cons, 1e-10)

    Nq = 5
    rng_q = np.random.default_rng(103)
    worst_rel = 0.0
    basis = hc.get_basis(Nq)
    for _ in range(5):
        sel = basis.levels <= 3
        fq = hc.zero_spectrum(Nq)
        gq = hc.zero_spectrum(Nq)
        fq.coeffs[sel] = rng_q.standard_normal(int(sel.sum()))
        gq.coeffs[sel] = rng_q.standard_normal(int(sel.sum()))
        fq.coeffs /= fq.norm()
        gq.coeffs /= gq.norm()
        oracle = lo.gamma_quadrature_oracle(fq, gq)
        direct = lo.gamma_apply(fq, gq)
        scale = max(float(np.max(np.abs(direct.coeffs))), 1e-30)
        worst_rel = max(
            worst_rel, float(np.max(np.abs(oracle.coeffs - direct.coeffs))) / scale
        )
    yield _record("gamma_oracle", "quadrature_oracle_match", worst_rel <= 1e-8, worst_rel, 1e-8)


# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------


def _weights_checks():
    rng = np.random.default_rng(104)
    c0 = 1.0 / 32.0
    worst_tr = 0.0
    for _ in range(10):
        eta = rng.standard_normal(3) * 2
        xi = rng.standard_normal(3) * 2
        t = rng.uniform(0.2, 0.9)
        worst_tr = max(worst_tr, wt.transport_identity_residual(t, eta, xi, c0))
    yield _record("weights", "transport_identity", worst_tr <= 1e-6, worst_tr, 1e-6)

    p = wt.WeightParams(c0=c0, delta=0.5, delta_prime=0.25, r=2.0, t=0.7)
    worst_43 = 0.0
    for _ in range(10):
        eta = rng.standard_normal(3)
        xi = rng.standard_normal(3)
        direction = rng.standard_normal(7)
        worst_43 = max(worst_43, wt.weight_derivative_identity_residual(p, eta, xi, direction))
    yield _record("weights", "weight_derivative_identity", worst_43 <= 1e-6, worst_43, 1e-6)

    rep = wt.psi_derivative_bounds(
        p, rng.standard_normal((30, 3)) * 3, rng.standard_normal((30, 3)) * 3
    )
    ok = rep["max_first_ratio"] <= 1.0 + 1e-9
    yield _record("weights", "psi_first_derivative_bound", ok, rep["max_first_ratio"], 1.0)

    low1 = wt.time_integral_lower_ratio(1.0)
    yield _record("weights", "time_integral_lower_alpha1", low1.worst_ratio >= 1 / 16, low1.worst_ratio, 1 / 16)
    low2 = wt.time_integral_lower_ratio(2.0)
    yield _record("weights", "time_integral_lower_alpha2", low2.worst_ratio >= 1 / 32, low2.worst_ratio, 1 / 32)
    up1 = wt.time_integral_upper_ratio(1.0)
    yield _record("weights", "time_integral_upper_alpha1_finite", math.isfinite(up1.worst_ratio), up1.worst_ratio, math.sqrt(2.0))
    up2 = wt.time_integral_upper_ratio(2.0)
    yield _record("weights", "time_integral_upper_alpha2_finite", math.isfinite(up2.worst_ratio), up2.worst_ratio, 2.0)

    sub = wt.submultiplicativity_check(0.37, n_samples=100_000, seed=9)
    yield _record("weights", "submultiplicativity_factor3", sub.worst_ratio <= 0.0, sub.worst_ratio, 0.0)

    tri = wt.weight_triangle_check(p, n_samples=2000, seed=10)
    yield _record("weights", "weight_triangle_finite", math.isfinite(tri.worst_ratio), tri.worst_ratio, math.inf)

    worst_split = 0.0
    for _ in range(20):
        eta = rng.standard_normal(3) * 3
        xi = rng.standard_normal(3) * 3
        f0, g, brk = wt.weight_F_split(p, eta, xi)
        ref = wt.weight_F(p, eta, xi)
        worst_split = max(worst_split, abs(f0 * g * brk - ref) / abs(ref))
    yield _record("weights", "factor_split_identity", worst_split <= 1e-12, worst_split, 1e-12)


# ---------------------------------------------------------------------------
# kinetic-transport oracle
# ---------------------------------------------------------------------------


def _kolmogorov_checks():
    s = kg.gaussian_state(dims=1, eta_max=4, xi_max=12.0, xi_points=97)
    t = 0.5
    out = kg.exact_propagate(s, t)
    center = s.eta_max
    xi = s.xi_axis
    heat = np.exp(-t * xi**2) * s.values[center]
    worst_heat = float(np.max(np.abs(out.values[center] - heat)))
    yield _record("kolmogorov", "heat_reduction_exact", worst_heat <= 1e-14, worst_heat, 1e-14)

    fine = kg.gaussian_state(dims=1, eta_max=4, xi_max=12.0, xi_points=769)
    exact = kg.exact_propagate(fine, t)
    errs = [
        float(np.linalg.norm(kg.imex_reference_march(fine, t, dt).values - exact.values))
        for dt in (1 / 8, 1 / 16, 1 / 32)
    ]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    ok = all(1.6 <= r <= 2.4 for r in ratios)
    yield _record("kolmogorov", "first_order_convergence", ok, min(ratios), 2.0)

    c = (1.0 / 32.0) / 2.0
    prev = None
    worst_up = 0.0
    finite = True
    for tt in np.linspace(0.1, 1.0, 7):
        val = kg.smoothing_norm(kg.exact_propagate(s, float(tt)), c)
        finite = finite and math.isfinite(val)
        if prev is not None:
            worst_up = max(worst_up, val / prev - 1.0)
        prev = val
    yield _record("kolmogorov", "smoothing_norm_finite_decreasing", finite and worst_up <= 1e-10, worst_up, 1e-10)

    out2 = kg.exact_propagate(s, 0.5)
    worst_gain = 0.0
    for mode in s.eta_modes():
        gain = out2.slice_mass(mode) - s.slice_mass(mode)
        worst_gain = max(worst_gain, gain)
    yield _record("kolmogorov", "slice_mass_nonincreasing", worst_gain <= 1e-14, worst_gain, 1e-14)


SUITES = {
    "ladder": _ladder_checks,
    "linear_op": _linear_op_checks,
    "gamma_oracle": _gamma_checks,
    "weights": _weights_checks,
    "kolmogorov": _kolmogorov_checks,
}


def run_suite(name: str) -> list[dict]:
    """Run one named suite, or all of them, returning the check records."""
    if name == "all":
        names = list(SUITES)
    elif name in SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {list(SUITES)} or 'all'")
    workers = thread_count()
    if workers > 1 and len(names) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(lambda n: list(SUITES[n]()), names))
    else:
        groups = [list(SUITES[n]()) for n in names]
    records: list[dict] = []
    for group in groups:
        records.extend(group)
    return records
