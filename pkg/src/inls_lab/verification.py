"""Acceptance suite: every primary claim checked at desk scale.

One registry defines what "verified" means for this package; the CLI
verify subcommand and tests/test_acceptance.py both run it.  Each
criterion function returns CheckResult rows carrying the measured
number, the bound it must meet, and a short diagnostic detail.

The fixtures are frozen here: three intercritical parameter sets for
the stationary identities, a mass-critical and a subcritical set for
the flow checks, and the negative-K collapse fixture.  The collapse
fixture is solved on the default graded mesh but marched on a uniform
mesh: with a singular nonlinearity weight (c < 0) the graded mesh
places its first node at r ~ 1e-5 where the nonlinear phase rotation
outruns the dispersive coupling and a spurious origin spike poisons
the gradient; the uniform mesh keeps the first node at r ~ 1e-2 where
the splitting stays accurate through the trigger.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .classify import classify_intercritical, optimal_frequency, classify_sets
from .evolve import EvolutionConfig, EvolutionTrace, evolve, step, virial_check
from .functionals import evaluate_all, k_functional, scale_alpha_beta
from .grid import RadialField, RadialGrid, build_grid, gradient_norm_sq
from .groundstate import gn_ratio, petviashvili_solve, shooting_solve
from .params import ProblemParams
from .potential import PotentialSpec, check_assumptions

SEED = 20260817

F1 = ProblemParams(3, 0.0, 0.0, 2.0, 1.0)
F2 = ProblemParams(3, -0.5, -0.5, 2.0, 1.0)
F3 = ProblemParams(4, -1.0, -1.0, 2.5, 1.0)
STATIONARY_FIXTURES = (("fx1", F1), ("fx2", F2), ("fx3", F3))

MASS_CRITICAL = ProblemParams(3, 0.0, 0.0, 4.0 / 3.0, 1.0)
STANDING = ProblemParams(3, 0.0, 0.0, 1.0, 1.0)
NMINUS = ProblemParams(3, -0.5, -0.6, 1.5, 1.0)

_ZERO = PotentialSpec.zero()


@dataclass(frozen=True)
class CheckResult:
    """One measured quantity against its acceptance bound."""

    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ""


@lru_cache(maxsize=None)
def _grid(n: int, b: float, N: int, grading: float = 2.0) -> RadialGrid:
    return build_grid(n, b, r_max=30.0, N=N, grading=grading)


@lru_cache(maxsize=None)
def _solve(params: ProblemParams, N: int):
    return petviashvili_solve(params, grid=_grid(params.n, params.b, N))


def _scaled(gs, a: float) -> RadialField:
    return RadialField(gs.profile.grid, a * gs.profile.values)


def _gaussian(grid: RadialGrid, amplitude: float = 1.0, width: float = 1.0) -> RadialField:
    return RadialField(grid, amplitude * np.exp(-((grid.nodes / width) ** 2)))


def _mass_drift(trace: EvolutionTrace) -> float:
    m = np.asarray(trace.mass)
    return float(np.max(np.abs(m - m[0])) / m[0])


def _bump_sum(rng: np.random.Generator, grid: RadialGrid, complex_phase: bool) -> np.ndarray:
    r = grid.nodes
    vals = np.zeros(grid.N, dtype=complex)
    for _ in range(3):
        a = rng.uniform(0.3, 1.0)
        center = rng.uniform(0.0, 6.0)
        width = rng.uniform(0.8, 2.5)
        phase = rng.uniform(0.0, 2 * np.pi) if complex_phase else 0.0
        vals += a * np.exp(1j * phase) * np.exp(-(((r - center) / width) ** 2))
    return vals


def check_pohozaev() -> list[CheckResult]:
    """Stationary identities at N = 4096 plus the refinement factor."""
    rows = []
    for tag, params in STATIONARY_FIXTURES:
        t0 = time.perf_counter()
        gs = petviashvili_solve(params, grid=_grid(params.n, params.b, 4096))
        elapsed = time.perf_counter() - t0
        res = max(gs.pohozaev_res)
        rows.append(
            CheckResult(
                f"pohozaev_residual_{tag}",
                res < 1e-4 and elapsed < 10.0,
                res,
                1e-4,
                f"params {params.n},{params.b},{params.c},{params.p}; solve {elapsed:.2f}s (< 10s)",
            )
        )
        gs2 = _solve(params, 8192)
        ratio = min(
            gs.pohozaev_res[0] / gs2.pohozaev_res[0],
            gs.pohozaev_res[1] / gs2.pohozaev_res[1],
        )
        rows.append(
            CheckResult(
                f"pohozaev_refinement_{tag}",
                ratio >= 3.5,
                ratio,
                3.5,
                "residual shrink factor on N doubling (must be >= bound)",
            )
        )
    return rows


def check_oracle_equivalence() -> list[CheckResult]:
    """Fixed-point versus shooting profiles in relative sup norm."""
    rows = []
    for tag, params in STATIONARY_FIXTURES:
        gs = _solve(params, 4096)
        shot = shooting_solve(params, grid=gs.profile.grid)
        rel = float(
            np.max(np.abs(gs.profile.values.real - shot.values.real))
            / np.max(gs.profile.values.real)
        )
        rows.append(
            CheckResult(f"oracle_agreement_{tag}", rel < 1e-3, rel, 1e-3)
        )
    return rows


def check_k_annihilation() -> list[CheckResult]:
    """K^{alpha,beta} vanishes at the ground state, relative to L."""
    rows = []
    for tag, params in STATIONARY_FIXTURES:
        gs = _solve(params, 4096)
        rep = evaluate_all(gs.profile, params, _ZERO)
        worst = 0.0
        for alpha, beta in ((1.0, 0.0), (float(params.n), 2.0), (2.0, 1.0), (3.0, 1.0)):
            k = k_functional(gs.profile, alpha, beta, params, _ZERO)
            worst = max(worst, abs(k) / rep.L)
        rows.append(
            CheckResult(f"k_annihilation_{tag}", worst < 1e-4, worst, 1e-4,
                        "max |K|/L over the four index pairs")
        )
    return rows


def check_k_derivative() -> list[CheckResult]:
    """Finite difference of the action along scalings vs the closed form."""
    params = F2
    grid = _grid(params.n, params.b, 4096)
    spec = PotentialSpec.smooth_bump(0.5, 1.0)
    rng = np.random.default_rng(SEED)
    pairs = ((1.0, 0.0), (float(params.n), 2.0), (2.0, 1.0), (3.0, 1.0))
    h = 1e-3
    worst = 0.0
    for _ in range(20):
        vals = _bump_sum(rng, grid, complex_phase=True)
        u = RadialField(grid, vals)
        rep = evaluate_all(u, params, spec)
        # Normalize so the nonlinear term sits at a fixed fraction of the
        # quadratic part; otherwise the h^2 truncation of the stencil can
        # dwarf a small K and break the relative comparison.
        t = (0.2 * (gradient_norm_sq(u) + rep.mass) / rep.nonlinear_term) ** (1.0 / params.p)
        u = RadialField(grid, t * vals)
        for alpha, beta in pairs:

            def s_at(lam: float) -> float:
                return evaluate_all(scale_alpha_beta(u, alpha, beta, lam), params, spec).action

            # Fourth-order central stencil: the action is smooth in the
            # scaling parameter but its third derivative can dwarf K on
            # random data, so the plain second-order stencil stalls near
            # 1e-4 relative.
            fd = (8 * (s_at(h) - s_at(-h)) - (s_at(2 * h) - s_at(-2 * h))) / (12 * h)
            k = k_functional(u, alpha, beta, params, spec)
            worst = max(worst, abs(fd - k) / abs(k))
    return [
        CheckResult(
            "k_derivative_fd",
            worst < 1e-5,
            worst,
            1e-5,
            "20 random fields x 4 index pairs, central difference h = 1e-3",
        )
    ]


def _gn_pair(params: ProblemParams, N: int) -> tuple[float, float]:
    """Measured interpolation ratio at Q and its closed form, one grid."""
    gs = _solve(params, N)
    b, p, pc = params.b, params.p, params.p_c
    mass_norm = gs.thresholds["mass_threshold"]
    closed = (pc / ((2 - b) * (p + 2) - pc)) ** (1 - pc / (2 * (2 - b))) * (
        (2 - b) * (p + 2) / (pc * mass_norm**p)
    )
    return gn_ratio(gs.profile, params), closed


def check_gn_sharpness() -> list[CheckResult]:
    """The interpolation ratio peaks at Q and equals the closed form."""
    rows = []
    rng = np.random.default_rng(SEED)
    for tag, params in STATIONARY_FIXTURES:
        # The ratio/closed-form gap is first order in the grid defect,
        # which shrinks 4.0x per N doubling (measured by the
        # refinement check), so both sides are Richardson-extrapolated
        # to the continuum from the two finest grids.  The
        # perturbation scan below is defect-insensitive and runs on
        # the standard grid.
        (r4, c4), (r8, c8) = (_gn_pair(params, N) for N in (4096, 8192))
        r_ext = r8 + (r8 - r4) / 3.0
        c_ext = c8 + (c8 - c4) / 3.0
        rel = abs(r_ext - c_ext) / c_ext
        rows.append(
            CheckResult(f"gn_constant_{tag}", rel < 1e-6, rel, 1e-6,
                        f"ratio at Q {r_ext:.9g} vs closed form {c_ext:.9g}, "
                        "second order in 1/N from N = 4096, 8192")
        )
        gs = _solve(params, 4096)
        q = gs.profile
        r_q = gn_ratio(q, params)
        peak = np.max(np.abs(q.values))
        worst = -np.inf
        for _ in range(100):
            g = _bump_sum(rng, q.grid, complex_phase=False).real
            eps = 0.01 * peak / np.max(np.abs(g))
            u = RadialField(q.grid, q.values.real + eps * g)
            worst = max(worst, gn_ratio(u, params) / r_q)
        rows.append(
            CheckResult(
                f"gn_maximality_{tag}",
                worst <= 1 + 1e-6,
                worst,
                1 + 1e-6,
                "max R(Q + eps g)/R(Q) over 100 perturbations",
            )
        )
    return rows


def check_conservation() -> list[CheckResult]:
    """Mass is scheme-exact; energy drifts at second order in dt.

    Runs on the unweighted fixture: with a singular nonlinearity
    weight the graded mesh's innermost node takes an O(1) kick phase
    per step, which pollutes the drift-order measurement without
    touching mass exactness.
    """
    params = F1
    grid = _grid(params.n, params.b, 2048)
    u0 = _gaussian(grid)
    drifts = {}
    mass_worst = 0.0
    for dt in (1e-3, 5e-4):
        cfg = EvolutionConfig(dt0=dt, t_end=1.0, sample_every=10, adaptivity=False)
        tr = evolve(u0, cfg, params, _ZERO)
        e = np.asarray(tr.energy)
        drifts[dt] = float(np.max(np.abs(e - e[0])) / abs(e[0]))
        mass_worst = max(mass_worst, _mass_drift(tr))
    ratio = drifts[1e-3] / drifts[5e-4]
    return [
        CheckResult("mass_conservation", mass_worst < 1e-12, mass_worst, 1e-12,
                    "relative drift, both step sizes"),
        CheckResult("energy_drift", drifts[1e-3] < 1e-6, drifts[1e-3], 1e-6,
                    "relative drift over t in [0,1] at dt = 1e-3"),
        CheckResult("energy_drift_order", 3.5 <= ratio <= 4.5, ratio, 4.5,
                    "drift ratio under dt halving, expected in [3.5, 4.5]"),
    ]


def check_virial_identity() -> list[CheckResult]:
    """Second derivative of the weighted variance against the virial."""
    rows = []
    for tag, params, tol in (
        ("b0", ProblemParams(3, 0.0, 0.0, 2.0, 1.0), 1e-2),
        ("bneg", F2, 2e-2),
    ):
        grid = _grid(params.n, params.b, 2048)
        u0 = _gaussian(grid)
        cfg = EvolutionConfig(dt0=1e-3, t_end=0.5, sample_every=5, adaptivity=False)
        tr = evolve(u0, cfg, params, _ZERO)
        defect = virial_check(tr, params)
        rows.append(CheckResult(f"virial_defect_{tag}", defect < tol, defect, tol,
                                f"mass drift {_mass_drift(tr):.2e}"))
    return rows


def check_standing_wave() -> list[CheckResult]:
    """The ground state evolves as a pure phase rotation."""
    params = STANDING
    gs = _solve(params, 2048)
    q = gs.profile.values.real
    peak = float(np.max(q))
    grad_sq = gradient_norm_sq(gs.profile)
    dt = 1e-3
    u = gs.profile.copy()
    mass0 = evaluate_all(u, params, _ZERO).mass
    dev = p_worst = mass_worst = 0.0
    for k in range(1000):
        u = step(u, dt, params, _ZERO)
        if (k + 1) % 10 == 0:
            rep = evaluate_all(u, params, _ZERO)
            dev = max(dev, float(np.max(np.abs(np.abs(u.values) - q)) / peak))
            p_worst = max(p_worst, abs(rep.virial))
            mass_worst = max(mass_worst, abs(rep.mass - mass0) / mass0)
    return [
        CheckResult("standing_wave_modulus", dev < 1e-3, dev, 1e-3,
                    "sup over t in [0,1] of relative modulus deviation"),
        CheckResult("standing_wave_virial", p_worst < 1e-3 * grad_sq, p_worst,
                    1e-3 * grad_sq, "sup |P(u(t))| vs 1e-3 grad norm sq"),
        CheckResult("standing_wave_mass", mass_worst < 1e-12, mass_worst, 1e-12),
    ]


def _trailing_concavity(trace: EvolutionTrace) -> float:
    """Largest second difference of the variance over the trailing samples."""
    t = np.asarray(trace.times)[-10:]
    v = np.asarray(trace.variance)[-10:]
    worst = -np.inf
    for i in range(1, len(t) - 1):
        h01 = t[i] - t[i - 1]
        h12 = t[i + 1] - t[i]
        dd = 2 * (
            v[i - 1] / (h01 * (h01 + h12))
            - v[i] / (h01 * h12)
            + v[i + 1] / (h12 * (h01 + h12))
        )
        worst = max(worst, dd)
    return float(worst)


def check_dichotomy() -> list[CheckResult]:
    """Sub/super-threshold data complete or trigger as the theorems say."""
    rows = []
    gsM = _solve(MASS_CRITICAL, 4096)
    cfg = EvolutionConfig(dt0=1e-3, t_end=5.0, sample_every=10)
    tr = evolve(_scaled(gsM, 0.9), cfg, MASS_CRITICAL, _ZERO)
    growth = tr.grad_norm[-1] / tr.grad_norm[0]
    rows.append(
        CheckResult(
            "mass_critical_global",
            tr.events[-1][0] == "Completed" and growth < 2.0 and _mass_drift(tr) < 1e-12,
            growth,
            2.0,
            f"event {tr.events[-1][0]}, gradient growth over t in [0,5], "
            f"mass drift {_mass_drift(tr):.2e}",
        )
    )
    tr = evolve(_scaled(gsM, 1.2), cfg, MASS_CRITICAL, _ZERO)
    concave = _trailing_concavity(tr)
    rows.append(
        CheckResult(
            "mass_critical_blowup",
            tr.events[-1][0] == "BlowupTriggered" and concave < 0.0,
            concave,
            0.0,
            f"event {tr.events[-1][0]} at t = {tr.events[-1][1]:.4f}; "
            "largest trailing variance second difference (must be < 0)",
        )
    )

    gs1 = _solve(F1, 4096)
    cfg2 = EvolutionConfig(dt0=1e-3, t_end=2.0, sample_every=10)
    for a, want_verdict, want_event in (
        (0.5, "GlobalCandidate", "Completed"),
        (1.5, "BlowupCandidate", "BlowupTriggered"),
    ):
        u0 = _scaled(gs1, a)
        entry = classify_intercritical(u0, F1, _ZERO, gs1)
        tr = evolve(u0, cfg2, F1, _ZERO)
        growth = tr.grad_norm[-1] / tr.grad_norm[0]
        flow_ok = tr.events[-1][0] == want_event and _mass_drift(tr) < 1e-12
        if want_event == "Completed":
            flow_ok = flow_ok and growth < 2.0
        rows.append(
            CheckResult(
                f"intercritical_{str(a).replace('.', '')}Q",
                entry.verdict == want_verdict and flow_ok,
                growth,
                2.0,
                f"verdict {entry.verdict}, event {tr.events[-1][0]}, "
                f"mass drift {_mass_drift(tr):.2e}",
            )
        )
    return rows


def check_frequency_scaling() -> list[CheckResult]:
    """Action scaling in omega, stationarity of f, gate equivalence."""
    rows = []
    gs1 = _solve(F1, 4096)
    b, p, pc = F1.b, F1.p, F1.p_c
    kappa = ((2 - b) * (p + 2) - pc) / ((2 - b) * p)
    worst = 0.0
    for w in (0.5, 2.0):
        gsw = _solve(F1.with_omega(w), 4096)
        want = w**kappa * gs1.m_omega
        worst = max(worst, abs(gsw.m_omega - want) / want)
    rows.append(
        CheckResult("action_frequency_scaling", worst < 1e-3, worst, 1e-3,
                    "minimal action vs omega^kappa law at omega in {0.5, 2}")
    )

    u0 = _scaled(gs1, 0.5)
    fr = optimal_frequency(u0, F1, gs1)
    rep = evaluate_all(u0, F1, _ZERO)

    def f(w: float) -> float:
        return w**kappa * gs1.m_omega - (rep.energy + 0.5 * w * rep.mass)

    h = 1e-4 * fr.omega0
    fd = abs(f(fr.omega0 + h) - f(fr.omega0 - h)) / (2 * h)
    tol = 1e-6 * abs(fr.f_omega0) / fr.omega0
    rows.append(CheckResult("frequency_stationarity", fd < tol, fd, tol))

    rng = np.random.default_rng(SEED)
    r = gs1.profile.grid.nodes
    band_cases = 0
    agreements = 0
    for i in range(20):
        if i % 2 == 0:
            u = _scaled(gs1, rng.uniform(0.2, 0.95))
        else:
            amp = rng.uniform(0.3, 0.6)
            u = RadialField(
                gs1.profile.grid,
                gs1.profile.values * (1.0 + amp * np.cos(40.0 * r)),
            )
        fr_i = optimal_frequency(u, F1, gs1)  # raises if directions disagree
        if not fr_i.near_boundary:
            agreements += 1
        else:
            band_cases += 1
    rows.append(
        CheckResult(
            "frequency_gate_equivalence",
            agreements == 20,
            float(agreements),
            20.0,
            f"20 constructed data sets, {band_cases} inside the dead band",
        )
    )
    return rows


def check_assumption_checker() -> list[CheckResult]:
    """The three potential verdict patterns the checker must produce."""
    params = F2
    rows = []
    rep = check_assumptions(_ZERO, params)
    all_hold = all(v.holds for v in rep.verdicts().values())
    rows.append(
        CheckResult(
            "assumptions_zero",
            all_hold and rep.omega1 == 0.0,
            rep.omega1,
            0.0,
            "(I)-(IV) must all hold with omega1 = 0",
        )
    )
    rep = check_assumptions(PotentialSpec.inverse_power(1.0, 2 - params.b), params)
    rows.append(
        CheckResult(
            "assumptions_inverse_power",
            rep.holds_II.status == "Fails" and rep.holds_II.witness is not None,
            0.0 if rep.holds_II.status == "Fails" else 1.0,
            0.0,
            f"(II) {rep.holds_II.status}: {rep.holds_II.note}",
        )
    )
    rep = check_assumptions(PotentialSpec.const_plus_gaussian(1.0), params)
    w = rep.holds_IV.witness
    ok = rep.holds_IV.status == "Fails" and w is not None and w**2 > 2 - params.b / 2
    rows.append(
        CheckResult(
            "assumptions_const_gaussian",
            ok,
            float(w**2) if w is not None else -1.0,
            2 - params.b / 2,
            "(IV) witness radius squared must exceed 2 - b/2",
        )
    )
    return rows


def check_nminus_flow() -> list[CheckResult]:
    """The negative-K set is preserved along the flow until the trigger.

    The datum is built from the graded-mesh ground state resampled on
    a uniform mesh (see the module docstring for why the march uses a
    uniform mesh).
    """
    gs = _solve(NMINUS, 4096)
    ugrid = build_grid(NMINUS.n, NMINUS.b, r_max=30.0, N=2048, grading=1.0)
    spline = CubicSpline(
        gs.profile.grid.nodes, gs.profile.values.real, extrapolate=True
    )
    u0 = RadialField(ugrid, 1.3 * np.clip(spline(ugrid.nodes), 0.0, None))

    entry = classify_sets(u0, NMINUS, _ZERO, gs, 1.0)
    gap = {e.name: e for e in entry.evidence}["k_gap_bound"]
    rows = [
        CheckResult(
            "nminus_membership",
            entry.verdict == "BlowupCandidate" and gap.lhs <= gap.rhs,
            gap.lhs - gap.rhs,
            0.0,
            f"verdict {entry.verdict}; gap bound K - bound must be <= 0",
        )
    ]

    cfg = EvolutionConfig(dt0=1e-3, t_end=3.0, sample_every=20, blowup_factor=10.0)
    tr = evolve(u0, cfg, NMINUS, _ZERO)
    k = np.asarray(tr.k_n2)
    triggered = tr.events[-1][0] == "BlowupTriggered"
    rows.append(
        CheckResult(
            "nminus_flow_invariance",
            triggered and bool((k < 0).all()) and _mass_drift(tr) < 1e-12,
            float(k.max()),
            0.0,
            f"event {tr.events[-1][0]} at t = {tr.events[-1][1]:.4f}, "
            f"{len(k)} samples, max K^{{n,2}} (must stay < 0), "
            f"mass drift {_mass_drift(tr):.2e}",
        )
    )
    return rows


CRITERIA: tuple[tuple[str, object], ...] = (
    ("pohozaev", check_pohozaev),
    ("oracle_equivalence", check_oracle_equivalence),
    ("k_annihilation", check_k_annihilation),
    ("k_derivative", check_k_derivative),
    ("gn_sharpness", check_gn_sharpness),
    ("conservation", check_conservation),
    ("virial_identity", check_virial_identity),
    ("standing_wave", check_standing_wave),
    ("dichotomy", check_dichotomy),
    ("frequency_scaling", check_frequency_scaling),
    ("assumption_checker", check_assumption_checker),
    ("nminus_flow", check_nminus_flow),
)


def run_all() -> list[CheckResult]:
    """Every criterion; an exception inside one becomes a failed row."""
    out: list[CheckResult] = []
    for name, fn in CRITERIA:
        try:
            out.extend(fn())
        except Exception as e:  # a crashed check must fail, not abort the suite
            out.append(
                CheckResult(name, False, float("nan"), 0.0, f"{type(e).__name__}: {e}")
            )
    return out
