"""Scenario execution: sweeps over coupling strength or alpha, checks against oracles, report bundles."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import meter
from .conditioning import amplification_bound, cond_quasi_expectation
from .errors import QJPLabError
from .geometry import (
    OperatorInnerProduct,
    function_of,
    inner_product,
    orthogonality_residual,
    project_onto_algebra,
    pythagorean_residual,
    quantum_covariance,
)
from .measurement import (
    cm_conditional_expectation,
    cm_weak_derivative_check,
    convolution_oracle,
    evolve_composite,
    gaussian_cm_analytic,
    gaussian_cm_closed_form,
    um_expectation,
    um_outcome_density,
    weak_um_moments,
)
from .meter import MOMENTUM, POSITION, Grid, gaussian_state
from .operators import as_decomposition, expectation, spectral_moment
from .qjp import (
    ADDITIVE,
    CONVOLUTIVE,
    KD,
    QuasiProbTable,
    born_marginal_errors,
    char_function,
    conjugate,
    marginals_and_moments,
    qjp_additive,
    qjp_table,
    table_distance,
    transform_alpha,
)
from .report import PlotSpec, ReportBundle, Series, Table, check_le, check_true, sweep_table
from .scenario import (
    AcceptanceScenario,
    CMScenario,
    GaussianScenario,
    GeometryScenario,
    QJPScenario,
    UMScenario,
    build_operator,
    build_state,
)

DEFAULT_SEED = 42

TOL_UM = 1e-8
TOL_CM = 1e-6
TOL_EXACT = 1e-10
TOL_DERIV = 1e-5


def _map(fn, items, jobs: int):
    """Ordered map, threaded when ``jobs > 1``."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def gaussian_density(center: float, h: float):
    def rho(x):
        return np.exp(-((x - center) ** 2) / h**2) / (math.sqrt(math.pi) * h)

    return rho


def rank_one_projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def alpha_label(alpha: complex) -> str:
    alpha = complex(alpha)
    return f"re{alpha.real + 0.0:g}_im{alpha.imag + 0.0:g}"


# sweeps shared with the acceptance suite


def um_sweep(name, A, phi, psi, gs, jobs=1):
    """E[Q], E[P] and the branch-convolution L1 distance along a g sweep."""
    decomp = as_decomposition(A)
    mean_a = expectation(decomp.matrix(), phi)
    q0 = meter.expectation(psi, POSITION)
    p0 = meter.expectation(psi, MOMENTUM)
    center, h = meter.profile(psi)
    rho = gaussian_density(center, h)

    def point(g):
        cs = evolve_composite(decomp, phi, psi, g, MOMENTUM)
        eq = um_expectation(cs, POSITION)
        ep = um_expectation(cs, MOMENTUM)
        dens = um_outcome_density(cs, POSITION)
        oracle = convolution_oracle(decomp, phi, dens.coords, rho, g)
        l1 = float(np.sum(np.abs(dens.values - oracle)) * dens.spacing)
        target_q = q0 + g * mean_a
        return [
            (g, "E_Q", eq, target_q, abs(eq - target_q)),
            (g, "E_P", ep, p0, abs(ep - p0)),
            (g, "L1_convolution", l1, 0.0, l1),
        ]

    table = sweep_table(name)
    for rows in _map(point, gs, jobs):
        for r in rows:
            table.add(*r)
    return table


def max_error(table: Table, quantity: str) -> float:
    qi = table.header.index("quantity")
    ei = table.header.index("abs_error")
    vals = [float(r[ei]) for r in table.rows if r[qi] == quantity]
    return max(vals) if vals else float("nan")


def cm_sweep(name, A, B, b, phi, psi, gs, X, jobs=1):
    """Simulated conditional expectation of X vs the exact Gaussian-overlap closed form, plus the amplification bound."""
    decomp_a = as_decomposition(A)
    center, h = meter.profile(psi)

    def point(g):
        cs = evolve_composite(decomp_a, phi, psi, g, MOMENTUM)
        sim = cm_conditional_expectation(cs, B, b, X)
        ref = gaussian_cm_closed_form(decomp_a, B, b, phi, g, h, X, center)
        bound = amplification_bound(cs, X)
        return [
            (g, f"E_{X}", sim, ref, abs(sim - ref)),
            (g, f"bound_{X}", bound, abs(sim), max(0.0, abs(sim) - bound)),
        ]

    table = sweep_table(name)
    for rows in _map(point, gs, jobs):
        for r in rows:
            table.add(*r)
    return table


def gaussian_sweep(name, A, phi_i, phi_f, psi, gs, jobs=1):
    """Post-selected Gaussian meter: simulated E[x], E[p] against the full-order analytic shifts."""
    decomp = as_decomposition(A)
    vi = np.asarray(phi_i, dtype=complex)
    vf = np.asarray(phi_f, dtype=complex)
    B = rank_one_projector(vf)
    center, h = meter.profile(psi)
    cs_n = [np.vdot(vf, p @ vi) for p in decomp.projectors]
    dichotomic = len(decomp) == 2

    def point(g):
        cs = evolve_composite(decomp, vi, psi, g, MOMENTUM)
        ex = cm_conditional_expectation(cs, B, 1.0, POSITION)
        ep = cm_conditional_expectation(cs, B, 1.0, MOMENTUM)
        if dichotomic:
            ax, ap = gaussian_cm_analytic(decomp.eigenvalues[0], decomp.eigenvalues[1], cs_n[0], cs_n[1], g, h)
            ax += center
        else:
            ax = gaussian_cm_closed_form(decomp, B, 1.0, vi, g, h, POSITION, center)
            ap = gaussian_cm_closed_form(decomp, B, 1.0, vi, g, h, MOMENTUM, center)
        return [(g, "E_x", ex, ax, abs(ex - ax)), (g, "E_p", ep, ap, abs(ep - ap))]

    table = sweep_table(name)
    for rows in _map(point, gs, jobs):
        for r in rows:
            table.add(*r)
    return table


def qjp_table_rows(name: str, table: QuasiProbTable) -> Table:
    out = Table(name, ["re_a", "im_a", "b", "re_w", "im_w"])
    for a, b, w in zip(table.a, table.b, table.w):
        out.add(float(a.real), float(a.imag), float(b), float(w.real), float(w.imag))
    return out


def random_frequencies(rng, family: str, count: int):
    out = []
    for _ in range(count):
        s = rng.uniform(-4, 4)
        if family == CONVOLUTIVE:
            s = complex(s, rng.uniform(-4, 4))
        out.append((s, float(rng.uniform(-4, 4))))
    return out


def fourier_error(table: QuasiProbTable, family, alpha, A, B, phi, freqs) -> float:
    return max(abs(table.fourier(s, t) - char_function(family, alpha, A, B, phi, s, t)) for s, t in freqs)


def conjugation_error(family, alpha, A, B, phi) -> float:
    table = qjp_table(family, alpha, A, B, phi)
    if family == ADDITIVE:
        partner = qjp_additive(-np.conj(alpha), A, B, phi)
    elif family == CONVOLUTIVE:
        partner = qjp_table(CONVOLUTIVE, -alpha, A, B, phi)
    else:
        partner = qjp_additive(-1.0, A, B, phi)
    return table_distance(conjugate(table), partner)


def random_polynomial_values(rng, points, degree: int = 3) -> np.ndarray:
    coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    pts = np.asarray(points, dtype=float)
    return sum(c * pts**k for k, c in enumerate(coeffs))


def sesquilinear_table_error(alpha, A, B, psi, rng) -> float:
    """``<<g(B), f(A)>>`` evaluated on operators vs as a sum against the additive table."""
    da = as_decomposition(A)
    db = as_decomposition(B)
    fa = random_polynomial_values(rng, da.eigenvalues)
    gb = random_polynomial_values(rng, db.eigenvalues)
    ip = OperatorInnerProduct(psi, alpha)
    lhs = inner_product(ip, function_of(db, gb), function_of(da, fa))
    table = qjp_additive(alpha, da, db, psi)
    ia = [int(np.argmin(np.abs(da.eigenvalues - a.real))) for a in table.a]
    ib = [int(np.argmin(np.abs(db.eigenvalues - b))) for b in table.b]
    rhs = np.sum(np.conj(gb[ib]) * fa[ia] * table.w)
    return abs(lhs - rhs)


def covariance_table_error(alpha, A, B, psi) -> float:
    """``quantum_covariance(alpha, A, B)`` against the centred (1,1) moment of the additive table of (B, A)."""
    mm = marginals_and_moments(qjp_additive(alpha, B, A, psi), max_order=1)
    centred = mm.moments[(1, 1)] - mm.moments[(1, 0)] * mm.moments[(0, 1)]
    return abs(quantum_covariance(alpha, A, B, psi) - centred)


# per-kind runners


def _meter_state(spec):
    return gaussian_state(Grid(spec.n_points, spec.dx), spec.center, spec.h)


def _run_um(sc: UMScenario, bundle: ReportBundle, rng, jobs):
    A = build_operator(sc.system.A, rng)
    phi = build_state(sc.system.phi, rng)
    psi = _meter_state(sc.meter)
    table = um_sweep("um_sweep", A, phi, psi, sc.sweep.g_values(), jobs)
    bundle.tables.append(table)
    bundle.checks += [
        check_le("um.E_Q", max_error(table, "E_Q"), TOL_UM),
        check_le("um.E_P", max_error(table, "E_P"), TOL_UM),
        check_le("um.L1_convolution", max_error(table, "L1_convolution"), TOL_UM),
    ]
    bundle.plots.append(
        PlotSpec(
            "um_expectation",
            "Meter position mean after coupling",
            "g",
            "E[Q]",
            [
                Series("simulated", "um_sweep", quantity="E_Q", style="points"),
                Series("E[Q;psi] + g E[A;phi]", "um_sweep", y="analytic_value", quantity="E_Q"),
            ],
        )
    )
    if sc.weak_moments is not None:
        moments = weak_um_moments(A, phi, psi, sc.weak_moments)
        mt = Table("um_weak_moments", ["n", "recovered", "exact", "abs_error"])
        for n, est in enumerate(moments):
            exact = spectral_moment(A, phi, n)
            mt.add(n, float(est), exact, abs(est - exact))
        bundle.tables.append(mt)
        bundle.checks.append(check_le("um.weak_moments", max(r[3] for r in mt.rows), 1e-4))


def _conditioning(sc, rng, dim):
    if sc.system.B is not None:
        return build_operator(sc.system.B, rng), sc.conditioning.b
    return rank_one_projector(build_state(sc.system.phi_f, rng).amplitudes), 1.0


def _run_cm(sc: CMScenario, bundle: ReportBundle, rng, jobs):
    A = build_operator(sc.system.A, rng)
    phi = build_state(sc.system.phi, rng)
    B, b = _conditioning(sc, rng, A.shape[0])
    psi = _meter_state(sc.meter)
    X = sc.conditioning.X
    table = cm_sweep("cm_sweep", A, B, b, phi, psi, sc.sweep.g_values(), X, jobs)
    deriv = cm_weak_derivative_check(A, B, phi, psi, b, X)
    table.add(0.0, f"dE_{X}/dg", deriv["numeric"], deriv["analytic"], abs(deriv["numeric"] - deriv["analytic"]))
    bundle.tables.append(table)
    bundle.checks += [
        check_le(f"cm.E_{X}", max_error(table, f"E_{X}"), TOL_CM),
        check_le(f"cm.amplification_bound_{X}", max_error(table, f"bound_{X}"), 1e-9),
        check_le(f"cm.weak_derivative_{X}", abs(deriv["numeric"] - deriv["analytic"]), TOL_DERIV),
    ]
    bundle.plots.append(
        PlotSpec(
            "cm_expectation",
            f"Conditioned meter mean of {X}",
            "g",
            f"E[{X} | b]",
            [
                Series("simulated", "cm_sweep", quantity=f"E_{X}", style="points"),
                Series("closed form", "cm_sweep", y="analytic_value", quantity=f"E_{X}"),
                Series("amplification bound", "cm_sweep", quantity=f"bound_{X}"),
            ],
        )
    )


def _run_gaussian(sc: GaussianScenario, bundle: ReportBundle, rng, jobs):
    A = build_operator(sc.system.A, rng)
    phi_i = build_state(sc.system.phi, rng).amplitudes
    phi_f = build_state(sc.system.phi_f, rng).amplitudes
    psi = _meter_state(sc.meter)
    table = gaussian_sweep("gaussian_sweep", A, phi_i, phi_f, psi, sc.sweep.g_values(), jobs)
    bundle.tables.append(table)
    bundle.checks += [
        check_le("gaussian.E_x", max_error(table, "E_x"), TOL_CM),
        check_le("gaussian.E_p", max_error(table, "E_p"), TOL_CM),
    ]
    bundle.plots.append(
        PlotSpec(
            "gaussian_shifts",
            "Post-selected Gaussian meter",
            "g",
            "conditional mean",
            [
                Series("E[x] simulated", "gaussian_sweep", quantity="E_x", style="points"),
                Series("E[x] analytic", "gaussian_sweep", y="analytic_value", quantity="E_x"),
                Series("E[p] simulated", "gaussian_sweep", quantity="E_p", style="points"),
                Series("E[p] analytic", "gaussian_sweep", y="analytic_value", quantity="E_p"),
            ],
        )
    )


def _run_qjp(sc: QJPScenario, bundle: ReportBundle, rng, jobs):
    A = build_operator(sc.system.A, rng)
    B = build_operator(sc.system.B, rng)
    phi = build_state(sc.system.phi, rng)
    alphas = sc.sweep.alpha_values()
    jobs_list = []
    for family in sc.families:
        for alpha in [1.0] if family == KD else alphas:
            jobs_list.append((family, alpha, random_frequencies(rng, family, sc.n_frequencies)))

    def one(job):
        family, alpha, freqs = job
        table = qjp_table(family, alpha, A, B, phi)
        return table, born_marginal_errors(table, A, B, phi), fourier_error(table, family, alpha, A, B, phi, freqs)

    def guarded(job):
        try:
            return one(job), None
        except QJPLabError as exc:
            return None, exc

    for (family, alpha, _), (res, exc) in zip(jobs_list, _map(guarded, jobs_list, jobs)):
        tag = f"qjp.{family}.{alpha_label(alpha)}"
        if exc is not None:
            bundle.add_error(tag, exc)
            continue
        table, marg, ferr = res
        name = f"qjp_{family}_{alpha_label(alpha)}"
        bundle.tables.append(qjp_table_rows(name, table))
        bundle.extras[name + ".json"] = table.to_json() + "\n"
        bundle.checks += [
            check_le(tag + ".marginal_a", marg["a"], TOL_EXACT),
            check_le(tag + ".marginal_b", marg["b"], TOL_EXACT),
            check_le(tag + ".total", marg["total"], TOL_EXACT),
            check_le(tag + ".fourier", ferr, TOL_EXACT),
            check_le(tag + ".conjugation", conjugation_error(family, alpha, A, B, phi), TOL_EXACT),
        ]
        if family != KD and alpha == 0:
            bundle.checks.append(check_le(tag + ".real_at_alpha_0", float(np.max(np.abs(table.w.imag))), 1e-12))
        if family == CONVOLUTIVE and complex(alpha).imag != 0:
            for target in alphas:
                if target == alpha:
                    continue
                moved = transform_alpha(table, target)
                direct = qjp_table(CONVOLUTIVE, target, A, B, phi)
                bundle.checks.append(
                    check_le(f"{tag}.transform_to_{alpha_label(target)}", table_distance(moved, direct), TOL_EXACT)
                )


def _run_geometry(sc: GeometryScenario, bundle: ReportBundle, rng, jobs):
    A = build_operator(sc.system.A, rng)
    B = build_operator(sc.system.B, rng)
    psi = build_state(sc.system.phi, rng)
    db = as_decomposition(B)
    table = Table("geometry", ["alpha", "quantity", "value", "reference_value", "abs_error"])
    for alpha in sc.sweep.alpha_values():
        alpha = alpha.real
        proj = project_onto_algebra(alpha, A, B, psi)
        cqe = cond_quasi_expectation(alpha, A, B, psi)
        coeff_err = float(np.max(np.abs(proj.values - cqe.values)))
        orth = max(
            orthogonality_residual(alpha, A, B, psi, random_polynomial_values(rng, db.eigenvalues))
            for _ in range(sc.n_tests)
        )
        gaps = [pythagorean_residual(alpha, A, B, psi, random_polynomial_values(rng, db.eigenvalues)) for _ in range(sc.n_tests)]
        pyth = max(r.gap for r in gaps)
        optimal = all(r.projection_error <= r.proxy_error + 1e-12 for r in gaps)
        stat = max(sesquilinear_table_error(alpha, A, B, psi, rng) for _ in range(sc.n_tests))
        cov = covariance_table_error(alpha, A, B, psi)
        for b, v, ok in zip(proj.b, proj.values, proj.defined):
            if ok:
                ref = cqe(b)
                table.add(alpha, f"re_coeff_b={b:.6g}", float(v.real), float(ref.real), abs(v.real - ref.real))
                table.add(alpha, f"im_coeff_b={b:.6g}", float(v.imag), float(ref.imag), abs(v.imag - ref.imag))
        table.add(alpha, "orthogonality", orth, 0.0, orth)
        table.add(alpha, "pythagorean_gap", pyth, 0.0, pyth)
        table.add(alpha, "statistical_representation", stat, 0.0, stat)
        table.add(alpha, "covariance_vs_moment", cov, 0.0, cov)
        tag = f"geometry.{alpha_label(alpha)}"
        bundle.checks += [
            check_le(tag + ".projection_equals_conditional", coeff_err, TOL_EXACT),
            check_le(tag + ".orthogonality", orth, TOL_EXACT),
            check_le(tag + ".pythagorean_gap", pyth, TOL_EXACT),
            check_true(tag + ".optimal_approximation", optimal),
            check_le(tag + ".statistical_representation", stat, TOL_EXACT),
            check_le(tag + ".covariance_vs_moment", cov, TOL_EXACT),
        ]
    bundle.tables.append(table)
    # conditional function of the first alpha, for reference
    first = sc.sweep.alpha_values()[0].real
    cf = cond_quasi_expectation(first, A, B, psi)
    ct = Table("conditional_expectation", ["b", "re", "im", "defined"])
    for b, v, ok in zip(cf.b, cf.values, cf.defined):
        ct.add(float(b), float(v.real), float(v.imag), int(ok))
    bundle.tables.append(ct)


RUNNERS = {
    UMScenario: _run_um,
    CMScenario: _run_cm,
    GaussianScenario: _run_gaussian,
    QJPScenario: _run_qjp,
    GeometryScenario: _run_geometry,
}


def resolve_seed(scenario, seed: int | None) -> int:
    if seed is not None:
        return int(seed)
    if getattr(scenario, "seed", None) is not None:
        return int(scenario.seed)
    return DEFAULT_SEED


def run_scenario(scenario, seed: int | None = None, jobs: int = 1) -> ReportBundle:
    """Execute a validated scenario; domain errors end up in the bundle, not as exceptions."""
    seed = resolve_seed(scenario, seed)
    if isinstance(scenario, AcceptanceScenario):
        from .acceptance import run_acceptance

        bundle = run_acceptance(seed=seed, jobs=jobs)
        bundle.name = scenario.name
        return bundle
    bundle = ReportBundle(scenario.name, scenario.kind, seed)
    rng = np.random.default_rng(seed)
    try:
        RUNNERS[type(scenario)](scenario, bundle, rng, max(1, int(jobs)))
    except (QJPLabError, ArithmeticError, np.linalg.LinAlgError) as exc:
        bundle.add_error(scenario.kind, exc)
    finalize(bundle)
    return bundle


def finalize(bundle: ReportBundle):
    bad = sum(t.nonfinite_count() for t in bundle.tables)
    bundle.checks.append(check_le("outputs.finite", bad, 0, "count of NaN/Inf cells in emitted tables"))
