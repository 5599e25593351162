import math

import numpy as np
import pytest

from stochheat import experiments as ex
from stochheat.grid_spectral import GridSpec
from stochheat.noise import NoisePlan, coupled_stream
from stochheat.problem import Problem, get_problem, heat_only
from stochheat.schemes import NumericalAbort, SchemeKind, integrate


def _phi1(x):
    return np.sqrt(2.0) * np.sin(np.pi * np.asarray(x))


def test_fit_order_exact_power_laws():
    dts = [2.0**-k for k in range(2, 9)]
    slope, err = ex.fit_order([(dt, 3 * dt) for dt in dts])
    assert slope == pytest.approx(1.0, abs=1e-12) and err < 1e-6
    slope, _ = ex.fit_order([(dt, 0.2 * dt**0.5) for dt in dts])
    assert slope == pytest.approx(0.5, abs=1e-12)


def test_fit_order_noisy_synthetic():
    rng = np.random.default_rng(0)
    dts = [2.0**-k for k in range(4, 13)]
    pts = [(dt, 0.8 * dt**0.5 * (1 + 0.05 * rng.standard_normal())) for dt in dts]
    slope, _ = ex.fit_order(pts)
    assert abs(slope - 0.5) < 0.05


def test_fit_order_rejects_bad_input():
    with pytest.raises(ValueError):
        ex.fit_order([(0.5, 1.0), (0.25, 0.5)])
    with pytest.raises(ValueError):
        ex.fit_order([(0.5, 1.0), (0.25, 0.0), (0.125, 0.1)])
    with pytest.raises(ValueError):
        ex.fit_order([(0.5, 1.0), (0.5, 0.5), (0.125, 0.1)])


def test_config_validation_names_key():
    with pytest.raises(ValueError, match="dt_ref"):
        ex.StrongStudyConfig(dt_ref=3e-5).validate()
    with pytest.raises(ValueError, match="samples"):
        ex.StrongStudyConfig(samples=1).validate()
    with pytest.raises(ValueError, match="schemes"):
        ex.StrongStudyConfig(schemes=("rk4",)).validate()
    with pytest.raises(ValueError, match="repetitions"):
        ex.WorkPrecisionConfig(repetitions=0).validate()


def test_default_fit_window():
    assert ex.default_fit_window(ex.dyadic(4, 12), 2.0**-14) == (2.0**-11, 2.0**-6)
    assert ex.default_fit_window(ex.dyadic(4, 5), 2.0**-14) is None


def test_coupled_engine_matches_integrate():
    M, T, N_ref, N = 16, 0.25, 64, 16
    p = get_problem("strong_test")
    plans = [NoisePlan(4, M, N_ref, T, s) for s in range(3)]
    res = ex.run_coupled(p, M, T, N_ref, [ex.RunnerSpec(SchemeKind.CNM, N)], plans, max_chunk=8)
    for s, plan in enumerate(plans):
        U = integrate(SchemeKind.CNM, p, GridSpec(M, N, T), coupled_stream(plan, N), record=[N])[-1].U
        assert np.array_equal(res.final[0][s], U)


def test_coupled_engine_rejects_bad_references():
    p = get_problem("strong_test")
    plans = [NoisePlan(1, 8, 16, 1.0)]
    with pytest.raises(ValueError):
        ex.run_coupled(p, 8, 1.0, 16, [ex.RunnerSpec(SchemeKind.SEXP, 4, ref=1),
                                       ex.RunnerSpec(SchemeKind.SEXP, 16)], plans)
    with pytest.raises(ValueError):
        ex.run_coupled(p, 8, 1.0, 16, [ex.RunnerSpec(SchemeKind.SEXP, 3)], plans)


def _small_strong(**kw):
    args = dict(M=16, T=0.25, dt_levels=ex.dyadic(3, 8), dt_ref=2.0**-8, samples=40,
                batch_size=20, schemes=("sexp", "sem"))
    args.update(kw)
    return ex.StrongStudyConfig(**args)


def test_reference_level_has_zero_error():
    rep = ex.strong_error_study(_small_strong())
    finest = rep["sexp"].levels[-1]
    assert finest.dt == 2.0**-8 and finest.sup_msq_error == 0.0
    assert rep["sem"].levels[-1].sup_msq_error > 0
    assert all(lv.samples_used == 40 and lv.aborted_samples == 0 for lv in rep["sexp"].levels)


def test_strong_study_is_batch_independent():
    a = ex.strong_error_study(_small_strong(batch_size=40, schemes=("sexp",)))["sexp"]
    b = ex.strong_error_study(_small_strong(batch_size=7, schemes=("sexp",)))["sexp"]
    for x, y in zip(a.levels, b.levels):
        assert x.sup_msq_error == pytest.approx(y.sup_msq_error, rel=1e-12)


@pytest.mark.slow
def test_more_samples_stay_within_monte_carlo_error():
    a = ex.strong_error_study(_small_strong(samples=100, seed=1, schemes=("sexp",)))["sexp"]
    b = ex.strong_error_study(_small_strong(samples=200, seed=2, schemes=("sexp",)))["sexp"]
    for x, y in zip(a.levels[:-1], b.levels[:-1]):
        se = math.hypot(x.sup_msq_stderr, y.sup_msq_stderr)
        assert abs(x.sup_msq_error - y.sup_msq_error) < 3 * se


def test_work_precision_reference_row():
    cfg = ex.WorkPrecisionConfig(M=16, T=0.25, dt_levels=ex.dyadic(3, 6), dt_ref=2.0**-6, samples=10,
                                 repetitions=2, batch_size=10)
    rows = ex.work_precision_study(cfg)
    assert {r.scheme for r in rows} == {"sexp", "sem", "cnm"}
    for r in rows:
        assert r.wall_time_total_s > 0 and len(r.wall_times) == 2
        if r.dt == cfg.dt_ref:
            assert r.avg_final_error == 0.0
        else:
            assert r.avg_final_error > 0


@pytest.mark.slow
def test_work_scales_linearly_in_steps():
    cfg = ex.WorkPrecisionConfig(dt_levels=ex.dyadic(5, 10), dt_ref=2.0**-10, samples=100,
                                 schemes=("sem",), repetitions=5)
    rows = sorted(ex.work_precision_study(cfg), key=lambda r: -r.dt)
    ratios = [b.wall_time_total_s / a.wall_time_total_s for a, b in zip(rows, rows[1:])]
    assert 1.6 <= float(np.median(ratios)) <= 2.6


def test_as_profiles_small():
    cfg = ex.ASConfig(M=16, T=0.25, dt_levels=(2.0**-3, 2.0**-5, 2.0**-8), dt_ref=2.0**-8)
    res = ex.as_convergence_profiles(cfg)
    assert res.sup_distance[-1] == 0.0
    assert res.reference[0] == 0.0 and res.reference[-1] == 0.0
    other = ex.as_convergence_profiles(ex.ASConfig(**{**cfg.__dict__, "sample_index": 1}))
    assert other.sup_distance[:2] != res.sup_distance[:2]


def test_decreasing_fraction():
    assert ex.decreasing_fraction([4, 3, 2, 1]) == 1.0
    assert ex.decreasing_fraction([4, 5, 2, 1]) == pytest.approx(2 / 3)
    assert ex.decreasing_fraction([1.0]) == 1.0


def test_moments_deterministic_decay():
    p = heat_only(_phi1)
    out = ex.moment_bound_check(ex.MomentConfig(problem=p, M_set=(16,), dt=2.0**-6, samples=4, batch_size=4))
    assert out["sup_m2"][0] <= 2.0 + 1e-12
    assert out["late_sup_m2"][0] < out["sup_m2"][0]


def test_moments_scale_quadratically_without_noise():
    lin = dict(f=lambda t, x, u: -0.5 * u, sigma=lambda t, x, u: 0 * u)
    p1 = Problem(u0=_phi1, **lin)
    p2 = Problem(u0=lambda x: 2 * _phi1(x), **lin)
    kw = dict(M_set=(16,), dt=2.0**-6, samples=4, batch_size=4)
    a = ex.moment_bound_check(ex.MomentConfig(problem=p1, **kw))
    b = ex.moment_bound_check(ex.MomentConfig(problem=p2, **kw))
    assert b["late_sup_m2"][0] == pytest.approx(4 * a["late_sup_m2"][0], rel=1e-12)
    assert b["late_sup_m4"][0] == pytest.approx(16 * a["late_sup_m4"][0], rel=1e-12)


def test_holder_config_checks():
    with pytest.raises(ValueError):
        ex.holder_increment_check(ex.HolderConfig(s0=0.01))
    with pytest.raises(ValueError):
        ex.holder_increment_check(ex.HolderConfig(s0=0.45, time_lags=(0.125,)))


class _FakeRun:
    def __init__(self, aborted):
        self.aborted = np.asarray(aborted)
        self.elapsed = [1.0]


def test_batches_rerun_survivors():
    calls = []

    def run_batch(idx, acc):
        calls.append(list(idx))
        return _FakeRun([i == 2 for i in idx])

    accs, aborted, _ = ex._run_batches(6, 3, list, run_batch, False, "t")
    assert aborted == 1
    assert calls == [[0, 1, 2], [0, 1], [3, 4, 5]]
    assert [n for n, _ in accs] == [2, 3]


def test_batches_abort_budget():
    def run_batch(idx, acc):
        return _FakeRun([i < 2 for i in idx])

    with pytest.raises(NumericalAbort):
        ex._run_batches(10, 5, list, run_batch, True, "t")
    _, aborted, _ = ex._run_batches(10, 5, list, run_batch, False, "t")
    assert aborted == 2
