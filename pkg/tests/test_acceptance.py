"""End-to-end acceptance checks, one test per criterion, each printing a verdict line."""
import math
import time

import numpy as np
import pytest
from scipy import stats

from stochheat import cli
from stochheat import experiments as ex
from stochheat.green_kernel import check_bound, mild_step_oracle
from stochheat.grid_spectral import GridSpec, build_basis
from stochheat.noise import NoisePlan, coarse_ticks, coarsen, coupled_stream, sample_block
from stochheat.problem import get_problem, heat_only
from stochheat.schemes import SchemeKind, SolverState, integrate, step_explicit_euler, step_sexp

pytestmark = pytest.mark.slow


def _phi1(x):
    return np.sqrt(2.0) * np.sin(np.pi * np.asarray(x))


def test_strong_temporal_order(verdict):
    t0 = time.perf_counter()
    rep = ex.strong_error_study(ex.StrongStudyConfig())["sexp"]
    dt_run = time.perf_counter() - t0
    ok = 0.35 <= rep.fitted_slope <= 0.65 and dt_run <= 600
    assert verdict(1, "strong order", ok,
                   f"slope {rep.fitted_slope:.3f} +- {rep.slope_stderr:.3f} (target [0.35, 0.65]), "
                   f"window {rep.fit_window}, {dt_run:.0f}s")


def test_linear_exactness_without_cfl(verdict):
    M, dt, N = 256, 0.1, 10
    g = GridSpec(M, N, N * dt)
    lam1 = build_basis(M).lambdas[0]
    phi = _phi1(g.x_interior)
    states = integrate(SchemeKind.SEXP, heat_only(_phi1), g, None)
    dev = max(float(np.max(np.abs(s.U - np.exp(lam1 * s.t) * phi))) for s in states)
    s = SolverState(0, phi, 0.0)
    blew_up_at = None
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, 11):
            s = step_explicit_euler(s, heat_only(_phi1), np.zeros(M - 1), M, dt)
            if not np.linalg.norm(s.U) <= 1e6:
                blew_up_at = n
                break
    ok = dev < 1e-11 and blew_up_at is not None
    assert verdict(2, "no-CFL linear exactness", ok,
                   f"max deviation {dev:.2e} (< 1e-11), dt*M^2 = {dt * M * M:.1f}, "
                   f"explicit Euler norm > 1e6 at step {blew_up_at}")


def test_mild_form_oracle(verdict):
    p = get_problem("strong_test")
    rng = np.random.default_rng(2024)
    worst = 0.0
    for M in (4, 8, 16):
        b = build_basis(M)
        for _ in range(100):
            dt = float(rng.uniform(1e-4, 0.1))
            U = rng.standard_normal(M - 1)
            dW = rng.standard_normal(M - 1) * math.sqrt(dt)
            a = mild_step_oracle(U, p, dt, dW, b)
            c = step_sexp(SolverState(0, U, 0.0), p, dW, b, dt).U
            worst = max(worst, float(np.max(np.abs(a - c))))
    assert verdict(3, "mild-form oracle", worst < 1e-10, f"max discrepancy {worst:.2e} over 300 pairs (< 1e-10)")


def test_noise_coupling_identities(verdict):
    p = NoisePlan(77, 9, 64, 1.0, 5)
    fine = [sample_block(p, n) for n in range(64)]
    mid = [coarsen(fine[i:i + 2]) for i in range(0, 64, 2)]
    coarse_two_stage = [coarsen(mid[i:i + 4]) for i in range(0, 32, 4)]
    coarse_direct = [coarsen(fine[i:i + 8]) for i in range(0, 64, 8)]
    streamed = list(coupled_stream(p, 8))
    exact = all(np.array_equal(a.ticks, b.ticks) and np.array_equal(a.ticks, c.ticks)
                for a, b, c in zip(coarse_two_stage, coarse_direct, streamed))

    plans = [NoisePlan(31, 17, 1024, 1.0, s) for s in range(7)]
    x = (coarse_ticks(plans, 1024) * plans[0].tick).ravel()[:100_000]
    dt = 1.0 / 1024
    se = dt * math.sqrt(2.0 / (len(x) - 1))
    var_ok = abs(x.var() - dt) < 3 * se
    ks = stats.kstest(x / math.sqrt(dt), "norm").pvalue
    ok = exact and var_ok and ks > 0.01
    assert verdict(5, "noise coupling", ok,
                   f"three-level coarsening bit-exact={exact}, variance {x.var() / dt:.4f} dt "
                   f"({abs(x.var() - dt) / se:.2f} SE), KS p={ks:.3f}")


def test_deterministic_scheme_orders(verdict):
    M, T = 64, 0.5
    b = build_basis(M)
    u0 = lambda x: np.sin(np.pi * np.asarray(x)) ** 3
    x = np.arange(1, M) / M
    exact = ((u0(x) @ b.phi) / M * np.exp(b.lambdas * T)) @ b.phi
    slopes = {}
    for scheme in (SchemeKind.SEM, SchemeKind.CNM):
        pts = []
        for k in range(6, 11):
            g = GridSpec(M, round(T * 2**k), T)
            U = integrate(scheme, heat_only(u0), g, None, record=[g.N])[-1].U
            pts.append((g.dt, float(np.max(np.abs(U - exact)))))
        slopes[scheme.value], _ = ex.fit_order(pts)
    ok = abs(slopes["sem"] - 1.0) <= 0.1 and abs(slopes["cnm"] - 2.0) <= 0.2
    assert verdict(4, "deterministic orders", ok,
                   f"SEM {slopes['sem']:.3f} (1 +- 0.1), CNM {slopes['cnm']:.3f} (2 +- 0.2)")


def test_kernel_bounds(verdict):
    t0 = time.perf_counter()
    fits = {b: check_bound(b) for b in ("I", "II", "III")}
    dt_run = time.perf_counter() - t0
    ok = all(f.passed for f in fits.values()) and dt_run <= 60
    detail = ", ".join(f"{b}: C={f.fitted_C:.3f} refined={f.refined_C:.3f} "
                       f"per-M spread {max(f.per_M.values()) / min(f.per_M.values()):.2f}"
                       for b, f in fits.items())
    assert verdict(6, "kernel bounds", ok, f"{detail}; {dt_run:.0f}s")


def test_moment_boundedness(verdict):
    t0 = time.perf_counter()
    out = ex.moment_bound_check(ex.MomentConfig())
    dt_run = time.perf_counter() - t0
    ok = out["passed"] and dt_run <= 120
    ratios = ", ".join(f"{k} {v:.2f}" for k, v in out["ratios"].items())
    assert verdict(7, "moment boundedness", ok, f"max/min across M {ratios} (< 3); {dt_run:.0f}s")


def test_holder_increments(verdict):
    t0 = time.perf_counter()
    rep = ex.holder_increment_check(ex.HolderConfig())
    dt_run = time.perf_counter() - t0
    ok = abs(rep.time_exponent - 0.5) <= 0.15 and abs(rep.space_exponent - 1.0) <= 0.3 and dt_run <= 300
    assert verdict(8, "Hölder increments", ok,
                   f"time {rep.time_exponent:.3f} (0.5 +- 0.15), space {rep.space_exponent:.3f} (1 +- 0.3); "
                   f"{dt_run:.0f}s")


def test_pathwise_convergence(verdict):
    t0 = time.perf_counter()
    fractions = []
    for seed in range(1, 6):
        res = ex.as_convergence_profiles(ex.ASConfig(seed=seed))
        fractions.append(ex.decreasing_fraction(res.sup_distance))
    dt_run = time.perf_counter() - t0
    ok = min(fractions) >= 0.8 and dt_run <= 300
    assert verdict(9, "pathwise convergence", ok,
                   f"decreasing fractions {fractions} (each >= 0.8); {dt_run:.0f}s")


def test_work_precision_ordering(verdict, tmp_path):
    cfg = ex.WorkPrecisionConfig(dt_levels=ex.dyadic(3, 9), dt_ref=2.0**-12, repetitions=5)
    rows = ex.work_precision_study(cfg)
    table = [{"scheme": r.scheme, "dt": r.dt, "wall_time_total_s": r.wall_time_total_s,
              "avg_final_error": r.avg_final_error} for r in rows]
    cli.write_csv(table, tmp_path / "work_precision.csv")
    wt = {(r.scheme, r.dt): r.wall_time_total_s for r in rows}
    bad = [dt for dt in cfg.dt_levels if wt[("sexp", dt)] > wt[("cnm", dt)]]
    ratio = float(np.median([wt[("cnm", dt)] / wt[("sexp", dt)] for dt in cfg.dt_levels]))
    assert verdict(10, "work-precision ordering", not bad,
                   f"median SEXP <= CNM at every dt (violations at {bad}); median CNM/SEXP time ratio {ratio:.1f}")


def test_nonlipschitz_demo(verdict):
    errors, aborted, total = [], 0, 0
    for seed in range(1, 6):
        cfg = ex.StrongStudyConfig(problem="nonlip_demo", M=32, T=0.25, dt_levels=ex.dyadic(4, 10),
                                   dt_ref=2.0**-12, samples=200, seed=seed)
        rep = ex.strong_error_study(cfg)["sexp"]
        errors.append([lv.sup_msq_error for lv in rep.levels])
        aborted += rep.levels[0].aborted_samples
        total += cfg.samples
    med = np.median(np.array(errors), axis=0)
    nonincreasing = bool(np.all(np.diff(med) <= 0))
    ok = aborted < 0.05 * total and nonincreasing
    assert verdict(11, "non-Lipschitz demo", ok,
                   f"aborted {aborted}/{total}, median errors {np.array2string(med, precision=2)}")
