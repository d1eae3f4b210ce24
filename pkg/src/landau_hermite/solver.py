"""Time integration of the perturbation equation on a Fourier x Hermite grid.

The state is the double spectrum c[eta, alpha] of the perturbation g:
integer Fourier modes eta in {-K..K}^d_x for the periodic spatial variable
(d_x = 0 collapses to the homogeneous problem) and Hermite multi-indices
|alpha| <= N for velocity.  The evolution

    dg/dt + v . grad_x g + L g = B(g, g)

is marched with a first-order IMEX scheme: the stiff symmetric part L goes
implicitly (it is level preserving, so the solve splits into small dense
blocks shared by all Fourier modes), transport and the bilinear term go
explicitly.  The bilinear term in x becomes a convolution over modes; since
it touches its first argument only through ten moments, the convolution is
ten scalar-sequence convolutions followed by ten sparse operator
applications.

A Picard mode mirrors the linearization sequence: each iterate solves the
linear equation with the bilinear term frozen on the previous iterate, and
the sup-in-time distance between successive iterates gives an empirical
contraction factor.

External formats owned by this module: flat key=value config files, the
"LNSP" binary snapshot, and the energy-ledger CSV.
"""

from __future__ import annotations

import io
import itertools
import math
import struct
from dataclasses import dataclass, field, fields

import numpy as np
import scipy.sparse as sp

from .hermite_core import get_basis
from .landau_ops import get_operators

__all__ = [
    "SolverConfig",
    "PhaseState",
    "EnergyLedger",
    "SolverDivergenceError",
    "PicardReport",
    "load_config",
    "parse_config_text",
    "build_initial_state",
    "h_r_norm",
    "triple_norm",
    "apply_transport",
    "gamma_conv",
    "step_imex",
    "run",
    "picard_solve",
    "write_snapshot",
    "read_snapshot",
    "hermitian_defect",
]

SCHEMES = ("imex_euler", "picard")
RECIPES = ("zero", "rough", "gaussian", "kernel")


class SolverDivergenceError(RuntimeError):
    """The marched norm doubled from its initial value: the run left the
    perturbative regime."""


@dataclass
class SolverConfig:
    N: int = 16
    K: int = 8
    d_x: int = 1
    dt: float = 2e-3
    T: float = 1.0
    r: float = 2.0
    scheme: str = "imex_euler"
    picard_tol: float = 1e-9
    picard_max_iter: int = 25
    c0: float = 1.0 / 32.0
    seed: int = 0
    recipe: str = "rough"
    g0_norm: float = 1e-3
    record_every: int = 25
    snapshot_every: int = 0

    def __post_init__(self):
        if self.r <= 1.5:
            raise ValueError("r must exceed 3/2")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.N < 4:
            raise ValueError("N must be at least 4")
        if self.d_x not in (0, 1, 2, 3):
            raise ValueError("d_x must be 0..3")
        if self.K < 0:
            raise ValueError("K must be >= 0")
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if self.recipe not in RECIPES:
            raise ValueError(f"recipe must be one of {RECIPES}")


_CONFIG_TYPES = {f.name: f.type for f in fields(SolverConfig)}


def parse_config_text(text: str) -> SolverConfig:
    """Flat key=value lines, UTF-8, '#' comments; keys are the SolverConfig
    field names."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_TYPES:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        kind = _CONFIG_TYPES[key]
        if kind in ("int", int):
            values[key] = int(val)
        elif kind in ("float", float):
            values[key] = float(val)
        else:
            values[key] = val
    return SolverConfig(**values)


def load_config(path) -> SolverConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


class _Workspace:
    """Mode tables and operator matrices shared by every state of one
    (N, K, d_x, r) configuration; read-only after construction."""

    _cache: dict = {}

    def __init__(self, N: int, K: int, d_x: int, r: float):
        self.N, self.K, self.d_x, self.r = N, K, d_x, r
        self.basis = get_basis(N)
        self.ops = get_operators(N)
        if d_x == 0:
            self.modes = [()]
        else:
            axis = range(-K, K + 1)
            self.modes = sorted(itertools.product(axis, repeat=d_x))
        self.n_modes = len(self.modes)
        self.mode_index = {m: i for i, m in enumerate(self.modes)}
        if d_x == 0:
            eta = np.zeros((1, 1))
        else:
            eta = np.array(self.modes, dtype=np.float64).reshape(self.n_modes, d_x)
        self.eta = eta
        self.eta_sq = np.sum(eta**2, axis=1)
        self.h_weight = (1.0 + self.eta_sq) ** r  # <eta>^(2r)
        self.neg_index = np.array(
            [self.mode_index[tuple(-c for c in m)] for m in self.modes], dtype=np.int64
        )
        # difference table for the mode convolution: diff[a, b] = index of
        # modes[a] - modes[b], or -1 when it falls off the lattice
        diff = np.full((self.n_modes, self.n_modes), -1, dtype=np.int64)
        for a, ma in enumerate(self.modes):
            for b, mb in enumerate(self.modes):
                d = tuple(x - y for x, y in zip(ma, mb))
                idx = self.mode_index.get(d)
                if idx is not None:
                    diff[a, b] = idx
        self.diff = diff
        b = self.basis
        self.V = [b.coordinate(ax) for ax in range(3)]
        self.D = [b.derivative(ax) for ax in range(3)]
        self.rot_pairs = [
            b.rotation(k, j) for k in range(3) for j in range(3) if k != j
        ]
        self._solve_cache: dict = {}

    @classmethod
    def for_config(cls, cfg: SolverConfig) -> "_Workspace":
        key = (cfg.N, cfg.K, cfg.d_x, cfg.r)
        if key not in cls._cache:
            cls._cache[key] = cls(*key)
        return cls._cache[key]

    def implicit_inverses(self, dt: float) -> list[np.ndarray]:
        """Dense inverses of (I + dt * L_block) per Hermite level."""
        key = round(dt, 15)
        if key not in self._solve_cache:
            inv = []
            for block in self.ops.level_blocks():
                inv.append(np.linalg.inv(np.eye(block.shape[0]) + dt * block))
            self._solve_cache[key] = inv
        return self._solve_cache[key]

    def dissipation_metric_inverses(self) -> list[np.ndarray]:
        """Per-level inverses of (Q + I) where Q is the quadratic form of the
        dissipation seminorm (operator-sum version, exact at the cap)."""
        if not hasattr(self, "_metric_inv"):
            Q = sp.csr_matrix((self.basis.size, self.basis.size))
            for ax in range(3):
                D, V = self.D[ax], self.V[ax]
                Q = Q + 2.0 * (D.T @ D) + 0.5 * (V.T @ V)
            for A in self.rot_pairs:
                Q = Q + 0.5 * (A.T @ A)
            inv = []
            for sl in self.basis.level_slices:
                dim = sl.stop - sl.start
                inv.append(np.linalg.inv(Q[sl, sl].toarray() + np.eye(dim)))
            self._metric_inv = inv
        return self._metric_inv

    def trilinear_constant(self, n_starts: int = 2, n_iters: int = 30) -> float:
        """Empirical constant C0 in the trilinear bound

            |(B(f,g), h)_weighted| <= C0 ||f|| (|||g||| + ||g||)(|||h||| + ||h||),

        found by alternating maximization (the f slot has a closed-form
        optimum because f enters through its ten moments per mode).  The
        value is a certified lower bound on the true constant: it is the
        exact ratio at an explicit triple.  Cached per workspace.
        """
        if hasattr(self, "_c0_hat"):
            return self._c0_hat
        rng = np.random.default_rng(12345)
        w = self.h_weight
        valid = self.diff >= 0
        diff_c = np.clip(self.diff, 0, None)

        def metric_inv(x):
            out = np.empty_like(x)
            for sl, inv in zip(self.basis.level_slices, self.dissipation_metric_inverses()):
                out[:, sl] = x[:, sl] @ inv
            return out / w[:, None]

        def seminorm_plus_norm(c):
            total = np.zeros(self.n_modes)
            for ax in range(3):
                total += 2.0 * np.sum(np.abs((self.D[ax] @ c.T).T) ** 2, axis=1)
                total += 0.5 * np.sum(np.abs((self.V[ax] @ c.T).T) ** 2, axis=1)
            for A in self.rot_pairs:
                total += 0.5 * np.sum(np.abs((A @ c.T).T) ** 2, axis=1)
            semi = math.sqrt(float(np.sum(w * total)))
            plain = math.sqrt(float(np.sum(w[:, None] * np.abs(c) ** 2)))
            return semi + plain

        def weighted_norm(c):
            return math.sqrt(float(np.sum(w[:, None] * np.abs(c) ** 2)))

        def pairing(fc, gc, hc):
            mom = fc[:, self.ops.moment_slots]
            coefs = [np.where(valid, mom[diff_c, m], 0.0) for m in range(10)]
            total = 0.0 + 0.0j
            for m, G in enumerate(self.ops.moment_operators):
                conv = coefs[m] @ gc
                total += np.sum(w[:, None] * ((G @ conv.T).T) * np.conj(hc))
            return total

        def f_optimum(gc, hc):
            fc = np.zeros_like(gc)
            wh = w[:, None] * hc
            for m, G in enumerate(self.ops.moment_operators):
                P = np.conj(wh) @ ((G @ gc.T).T).T  # P[a, b] = w_a <h_a, G g_b>
                Wm = np.zeros(self.n_modes, dtype=np.complex128)
                np.add.at(Wm, diff_c[valid], P[valid])
                fc[:, self.ops.moment_slots[m]] = np.conj(Wm) / w
            n = np.linalg.norm(fc)
            return fc / n if n > 0 else fc

        best = 0.0
        mask = (self.basis.levels <= min(4, self.N))[None, :]
        for _ in range(n_starts):
            gc = (
                rng.standard_normal((self.n_modes, self.basis.size))
                + 1j * rng.standard_normal((self.n_modes, self.basis.size))
            ) * mask
            hc = (
                rng.standard_normal((self.n_modes, self.basis.size))
                + 1j * rng.standard_normal((self.n_modes, self.basis.size))
            ) * mask
            gc /= np.linalg.norm(gc)
            hc /= np.linalg.norm(hc)
            fc = f_optimum(gc, hc)
            for _ in range(n_iters):
                mom = fc[:, self.ops.moment_slots]
                coefs = [np.where(valid, mom[diff_c, m], 0.0) for m in range(10)]
                # h-gradient of the pairing
                V = np.zeros_like(hc)
                for m, G in enumerate(self.ops.moment_operators):
                    V += (G @ (coefs[m] @ gc).T).T
                hc = metric_inv(w[:, None] * V)
                hc /= np.linalg.norm(hc)
                # g-gradient: adjoint of the mode convolution
                U = np.zeros_like(gc)
                for m, G in enumerate(self.ops.moment_operators):
                    Hm = (G.T @ hc.T).T
                    U += (np.conj(coefs[m]) * w[:, None]).T @ Hm
                gc = metric_inv(U)
                gc /= np.linalg.norm(gc)
                fc = f_optimum(gc, hc)
            val = abs(pairing(fc, gc, hc)) / (
                weighted_norm(fc) * seminorm_plus_norm(gc) * seminorm_plus_norm(hc)
            )
            best = max(best, float(val))
        self._c0_hat = best
        return best


@dataclass
class PhaseState:
    """Coefficients c[mode, alpha] at one time, tied to a config."""

    config: SolverConfig
    c: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        ws = _Workspace.for_config(self.config)
        self.c = np.ascontiguousarray(self.c, dtype=np.complex128)
        if self.c.shape != (ws.n_modes, ws.basis.size):
            raise ValueError(
                f"coefficients must have shape ({ws.n_modes}, {ws.basis.size})"
            )

    @property
    def workspace(self) -> _Workspace:
        return _Workspace.for_config(self.config)

    def copy(self) -> "PhaseState":
        return PhaseState(self.config, self.c.copy(), self.time)


def h_r_norm(state: PhaseState) -> float:
    """Weighted norm: sqrt(sum <eta>^(2r) |c|^2)."""
    ws = state.workspace
    return math.sqrt(float(np.sum(ws.h_weight[:, None] * np.abs(state.c) ** 2)))


def hermitian_defect(state: PhaseState) -> float:
    """How far the state is from representing a real function:
    max |c(-eta) - conj(c(eta))|."""
    ws = state.workspace
    return float(np.max(np.abs(state.c[ws.neg_index] - np.conj(state.c))))


def _sparse_right(c: np.ndarray, M: sp.csr_matrix) -> np.ndarray:
    """Apply the operator M to every mode row of c: rows become (M @ row)."""
    return (M @ c.T).T


def apply_transport(state: PhaseState) -> PhaseState:
    """The term v . grad_x in Fourier: i * sum_j eta_j * (v_j on the slice).

    Skew-Hermitian in the weighted pairing, so it moves no norm.
    """
    ws = state.workspace
    out = np.zeros_like(state.c)
    for j in range(state.config.d_x):
        out += 1j * ws.eta[:, j : j + 1] * _sparse_right(state.c, ws.V[j])
    return PhaseState(state.config, out, state.time)


def _conv_moment_fields(ws: _Workspace, mom: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Mode convolutions sum_b mom[a-b, m] g[b, :] for the ten moments.

    Returns array of shape (10, n_modes, M).  Direct summation via the
    difference table (the lattice is small at desk scale).
    """
    valid = ws.diff >= 0
    out = np.empty((10, ws.n_modes, g.shape[1]), dtype=np.complex128)
    for m in range(10):
        coef = np.where(valid, mom[np.clip(ws.diff, 0, None), m], 0.0)
        out[m] = coef @ g
    return out


def _conv_moment_fields_fft(ws: _Workspace, mom: np.ndarray, g: np.ndarray) -> np.ndarray:
    """FFT evaluation of the same convolutions (zero-padded, exact)."""
    d = ws.d_x
    if d == 0:
        return _conv_moment_fields(ws, mom, g)
    n = 2 * ws.K + 1
    full = 2 * n - 1
    lat = (n,) * d
    g_lat = g.reshape(lat + (g.shape[1],))
    mom_lat = mom.reshape(lat + (10,))
    axes = tuple(range(d))
    G = np.fft.fftn(g_lat, s=(full,) * d, axes=axes)
    out = np.empty((10, ws.n_modes, g.shape[1]), dtype=np.complex128)
    for m in range(10):
        A = np.fft.fftn(mom_lat[..., m], s=(full,) * d, axes=axes)
        prod = np.fft.ifftn(A[..., None] * G, axes=axes)
        # the difference index (a-b) + K plus the summation index b lands the
        # output mode a at linear-convolution offset a + K per axis
        sel = tuple(slice(ws.K, ws.K + n) for _ in range(d))
        out[m] = prod[sel].reshape(ws.n_modes, g.shape[1])
    return out


def gamma_conv(f_state: PhaseState, g_state: PhaseState, use_fft: bool = False) -> PhaseState:
    """Bilinear collision term lifted to x-dependence: per output mode the
    sum over mode pairs of the velocity-space bilinear term, with the
    f-dependence entering only through per-mode moments.

    Out-of-lattice convolution terms are dropped.  The optional FFT path must
    agree with direct summation to 1e-12.
    """
    if f_state.config is not g_state.config and f_state.config != g_state.config:
        raise ValueError("states must share a config")
    ws = f_state.workspace
    mom = f_state.c[:, ws.ops.moment_slots]
    fields10 = (
        _conv_moment_fields_fft(ws, mom, g_state.c)
        if use_fft
        else _conv_moment_fields(ws, mom, g_state.c)
    )
    out = np.zeros_like(g_state.c)
    for m, G in enumerate(ws.ops.moment_operators):
        out += _sparse_right(fields10[m], G)
    return PhaseState(f_state.config, out, g_state.time)


def step_imex(
    state: PhaseState,
    dt: float,
    gamma_on: bool = True,
    frozen_moment_fields: np.ndarray | None = None,
    guard_norm: float | None = None,
) -> PhaseState:
    """One IMEX Euler step: transport and the bilinear term explicit, L
    implicit through per-level dense solves shared by all modes.

    `frozen_moment_fields` (shape (n_modes, 10)) substitutes the moments of a
    frozen first argument in the bilinear term (Picard mode).  The divergence
    guard aborts when the weighted norm exceeds twice `guard_norm`.
    """
    ws = state.workspace
    rhs = state.c.copy()
    for j in range(state.config.d_x):
        rhs -= (1j * dt) * ws.eta[:, j : j + 1] * _sparse_right(state.c, ws.V[j])
    if gamma_on:
        mom = (
            frozen_moment_fields
            if frozen_moment_fields is not None
            else state.c[:, ws.ops.moment_slots]
        )
        fields10 = _conv_moment_fields(ws, mom, state.c)
        for m, G in enumerate(ws.ops.moment_operators):
            rhs += dt * _sparse_right(fields10[m], G)
    out = np.empty_like(rhs)
    for n, inv in enumerate(ws.implicit_inverses(dt)):
        sl = ws.basis.level_slices[n]
        out[:, sl] = rhs[:, sl] @ inv  # inv is symmetric
    new = PhaseState(state.config, out, state.time + dt)
    if guard_norm is not None and h_r_norm(new) > 2.0 * guard_norm:
        raise SolverDivergenceError(
            f"weighted norm doubled at t = {new.time:.6g}; the datum left the "
            "perturbative regime"
        )
    return new


def triple_norm(state: PhaseState) -> float:
    """Dissipation seminorm: per mode
    2 sum_j (|d_j g|^2 + |v_j g|^2 / 4) + (1/2) sum_{j!=k} |L_{k,j} g|^2,
    weighted by <eta>^(2r) and summed over modes, square-rooted.

    For states of degree <= N-1 this satisfies
    triple_norm^2 = Re(L1 g, g) + 3 ||g||^2 per mode.
    """
    ws = state.workspace
    total = np.zeros(ws.n_modes)
    for ax in range(3):
        total += 2.0 * np.sum(np.abs(_sparse_right(state.c, ws.D[ax])) ** 2, axis=1)
        total += 0.5 * np.sum(np.abs(_sparse_right(state.c, ws.V[ax])) ** 2, axis=1)
    for A in ws.rot_pairs:
        total += 0.5 * np.sum(np.abs(_sparse_right(state.c, A)) ** 2, axis=1)
    return math.sqrt(float(np.sum(ws.h_weight * total)))


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------


def _hermitize(ws: _Workspace, c: np.ndarray) -> np.ndarray:
    """Project onto the real-field symmetry c(-eta) = conj(c(eta))."""
    return 0.5 * (c + np.conj(c[ws.neg_index]))


def build_initial_state(config: SolverConfig) -> PhaseState:
    """Initial datum from the configured recipe, seeded, normalized to
    g0_norm in the weighted norm (except the zero recipe).

    rough     algebraic coefficient decay across Hermite levels, white across
              spatial modes, random phases, real field
    gaussian  exponentially decaying smooth datum, real field
    kernel    collision invariants on the eta = 0 mode only
    zero      zeros
    """
    ws = _Workspace.for_config(config)
    rng = np.random.default_rng(config.seed)
    c = np.zeros((ws.n_modes, ws.basis.size), dtype=np.complex128)
    if config.recipe == "zero":
        return PhaseState(config, c, 0.0)
    if config.recipe == "kernel":
        zero_mode = ws.mode_index[tuple([0] * config.d_x)] if config.d_x else 0
        ix = ws.basis.index_of
        c[zero_mode, ix[(0, 0, 0)]] = 1.0
        for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
            c[zero_mode, ix[e]] = 0.5
        for e in ((2, 0, 0), (0, 2, 0), (0, 0, 2)):
            c[zero_mode, ix[e]] = 0.3
    else:
        levels = ws.basis.levels
        noise = rng.standard_normal(c.shape) + 1j * rng.standard_normal(c.shape)
        if config.recipe == "rough":
            # algebraic coefficient decay across Hermite levels, white across
            # the spatial modes: rough in both variables
            level_fac = (1.0 + levels) ** -1.0
            mode_fac = np.ones(ws.n_modes)
        else:  # gaussian
            level_fac = np.exp(-0.5 * levels)
            mode_fac = np.exp(-0.25 * ws.eta_sq)
        c = noise * level_fac[None, :] * mode_fac[:, None]
        c = _hermitize(ws, c)
    state = PhaseState(config, c, 0.0)
    norm = h_r_norm(state)
    if norm > 0:
        state.c *= config.g0_norm / norm
    return state


# ---------------------------------------------------------------------------
# marches
# ---------------------------------------------------------------------------


@dataclass
class EnergyLedger:
    """Per-step records of the weighted norm, dissipation seminorm, and the
    running dissipation integral."""

    t: list = field(default_factory=list)
    h_r_norm: list = field(default_factory=list)
    triple_norm: list = field(default_factory=list)
    dissipation_integral: list = field(default_factory=list)

    def append(self, t: float, norm: float, triple: float, dissipation: float):
        if self.t and t <= self.t[-1]:
            raise ValueError("ledger times must be strictly increasing")
        if not all(map(math.isfinite, (t, norm, triple, dissipation))):
            raise ValueError("ledger entries must be finite")
        self.t.append(t)
        self.h_r_norm.append(norm)
        self.triple_norm.append(triple)
        self.dissipation_integral.append(dissipation)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,h_r_norm,triple_norm,dissipation_integral\n")
        for row in zip(self.t, self.h_r_norm, self.triple_norm, self.dissipation_integral):
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return buf.getvalue()

    def energy_constant(self) -> float:
        """Empirical C in sup ||g||^2 + (1/2) int |||g|||^2 ds <= C ||g0||^2."""
        sup_sq = max(n**2 for n in self.h_r_norm)
        total = sup_sq + 0.5 * self.dissipation_integral[-1]
        return total / self.h_r_norm[0] ** 2


@dataclass
class RunResult:
    ledger: EnergyLedger
    snapshots: list  # (t, PhaseState) at record_every cadence
    energy_constant: float


def run(config: SolverConfig, initial: PhaseState | None = None, gamma_on: bool = True) -> RunResult:
    """March the configured scheme from the recipe (or a provided datum) to
    time T, recording the energy ledger every step and state snapshots at the
    record_every cadence."""
    state = initial.copy() if initial is not None else build_initial_state(config)
    guard = h_r_norm(state)
    guard = guard if guard > 0 else None
    n_steps = int(round(config.T / config.dt))
    ledger = EnergyLedger()
    tn = triple_norm(state)
    ledger.append(state.time, h_r_norm(state), tn, 0.0)
    snapshots = [(state.time, state.copy())]
    dissipation = 0.0
    for k in range(1, n_steps + 1):
        dissipation += config.dt * tn**2
        state = step_imex(state, config.dt, gamma_on=gamma_on, guard_norm=guard)
        tn = triple_norm(state)
        ledger.append(state.time, h_r_norm(state), tn, dissipation)
        if config.record_every and (k % config.record_every == 0 or k == n_steps):
            snapshots.append((state.time, state.copy()))
    return RunResult(ledger, snapshots, ledger.energy_constant())


@dataclass
class PicardReport:
    distances: list
    lambdas: list
    converged: bool
    non_contraction: bool
    failed_iterate: int | None
    iterations: int
    reason: str | None = None  # "lambda" | "smallness" | "divergence"
    c0_estimate: float = math.nan
    smallness_product: float = math.nan

    @property
    def contraction_factor(self) -> float:
        finite = [x for x in self.lambdas if math.isfinite(x)]
        return max(finite) if finite else math.inf


def _march_linear(
    config: SolverConfig,
    g0: PhaseState,
    n_steps: int,
    frozen: np.ndarray | None,
    guard: float | None,
) -> np.ndarray:
    """March the linear equation with a frozen bilinear argument; returns the
    whole trajectory stacked as (n_steps+1, n_modes, M)."""
    ws = g0.workspace
    traj = np.empty((n_steps + 1,) + g0.c.shape, dtype=np.complex128)
    traj[0] = g0.c
    state = g0.copy()
    for k in range(1, n_steps + 1):
        fmf = None if frozen is None else frozen[k - 1]
        state = step_imex(
            state,
            config.dt,
            gamma_on=frozen is not None,
            frozen_moment_fields=fmf,
            guard_norm=guard,
        )
        traj[k] = state.c
    return traj


def picard_solve(
    g0: PhaseState,
    T: float | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
) -> tuple[list[PhaseState], PicardReport]:
    """Linearization sequence: iterate n+1 solves the linear equation whose
    bilinear term freezes the first argument on iterate n; the seed iterate
    is the free linear flow of the datum.

    Returns the final iterate's trajectory (states at every step) and a
    contraction report with the sup-in-time distances of successive
    iterates.  The non-contraction guard fires (data too large) when

    * an observed distance ratio reaches 1, or
    * the smallness condition 16 * sup_t ||iterate|| * C0 < 1 is violated,
      with C0 the workspace's measured trilinear constant (the contraction
      argument carries no warrant beyond it), or
    * an iterate trips the norm-doubling divergence guard.
    """
    config = g0.config
    T = config.T if T is None else T
    tol = config.picard_tol if tol is None else tol
    max_iter = config.picard_max_iter if max_iter is None else max_iter
    n_steps = int(round(T / config.dt))
    ws = g0.workspace
    guard = h_r_norm(g0)
    guard = guard if guard > 0 else None
    weights = np.sqrt(ws.h_weight)
    c0_hat = ws.trilinear_constant()

    def sup_distance(a: np.ndarray, b: np.ndarray) -> float:
        diff = np.abs(a - b) * weights[None, :, None]
        return float(np.max(np.sqrt(np.sum(diff**2, axis=(1, 2)))))

    def sup_norm(traj: np.ndarray) -> float:
        amp = np.abs(traj) ** 2 * ws.h_weight[None, :, None]
        return float(np.max(np.sqrt(np.sum(amp, axis=(1, 2)))))

    prev = _march_linear(config, g0, n_steps, frozen=None, guard=guard)
    distances: list = []
    lambdas: list = []
    converged = False
    non_contraction = False
    failed_iterate = None
    reason = None
    smallness = 16.0 * sup_norm(prev) * c0_hat
    iterations = 0
    for it in range(1, max_iter + 1):
        iterations = it
        smallness = max(smallness, 16.0 * sup_norm(prev) * c0_hat)
        if smallness >= 1.0:
            non_contraction = True
            failed_iterate = it
            reason = "smallness"
            break
        frozen = prev[:, :, ws.ops.moment_slots]
        try:
            cur = _march_linear(config, g0, n_steps, frozen=frozen, guard=guard)
        except SolverDivergenceError:
            non_contraction = True
            failed_iterate = it
            reason = "divergence"
            lambdas.append(math.inf)
            break
        d = sup_distance(cur, prev)
        distances.append(d)
        if len(distances) >= 2 and distances[-2] > 0:
            lam = distances[-1] / distances[-2]
            lambdas.append(lam)
            if lam >= 1.0:
                non_contraction = True
                failed_iterate = it
                reason = "lambda"
                prev = cur
                break
        prev = cur
        if d <= tol:
            converged = True
            break
    trajectory = [
        PhaseState(config, prev[k], g0.time + k * config.dt)
        for k in range(n_steps + 1)
    ]
    report = PicardReport(
        distances,
        lambdas,
        converged,
        non_contraction,
        failed_iterate,
        iterations,
        reason=reason,
        c0_estimate=c0_hat,
        smallness_product=smallness,
    )
    return trajectory, report


# ---------------------------------------------------------------------------
# snapshot format
# ---------------------------------------------------------------------------

_MAGIC = b"LNSP"
_VERSION = 1


def write_snapshot(path, state: PhaseState) -> None:
    """Binary snapshot: magic "LNSP", then little-endian uint32 version, d_x,
    K, N, float64 r and time, then the coefficient tensor as interleaved
    float64 (re, im) pairs in (eta-lexicographic, alpha-canonical) order."""
    cfg = state.config
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIII", _VERSION, cfg.d_x, cfg.K, cfg.N))
        fh.write(struct.pack("<dd", cfg.r, state.time))
        inter = np.empty(state.c.size * 2, dtype="<f8")
        flat = state.c.reshape(-1)
        inter[0::2] = flat.real
        inter[1::2] = flat.imag
        fh.write(inter.tobytes())


def read_snapshot(path, config: SolverConfig | None = None) -> PhaseState:
    """Read a snapshot; a config is rebuilt from the header when none is
    supplied (march parameters take their defaults)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError("not a LNSP snapshot")
        version, d_x, K, N = struct.unpack("<IIII", fh.read(16))
        if version != _VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        r, time = struct.unpack("<dd", fh.read(16))
        if config is None:
            config = SolverConfig(N=N, K=K, d_x=d_x, r=r)
        elif (config.N, config.K, config.d_x) != (N, K, d_x):
            raise ValueError("snapshot header does not match the given config")
        ws = _Workspace.for_config(config)
        raw = np.frombuffer(fh.read(), dtype="<f8")
        expected = ws.n_modes * ws.basis.size * 2
        if raw.size != expected:
            raise ValueError("snapshot payload truncated")
        c = (raw[0::2] + 1j * raw[1::2]).reshape(ws.n_modes, ws.basis.size)
        return PhaseState(config, c, time)
