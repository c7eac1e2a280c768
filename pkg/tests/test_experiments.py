import math

import numpy as np
import pytest

from src.experiments import (
    ConvergenceReport,
    GridMismatchError,
    fit_rate,
    fit_window,
    l2_error,
    ridge_locus,
    run_figure,
    snap_dts,
    sweep,
)
from src.integrator import Trajectory
from src.problems import TestProblem

PARESCHI = TestProblem.of("pareschi", "equilibrium")
REF_DT = 1.25e-3


def make_trajectory(times, states, dt):
    n = len(times) - 1
    return Trajectory(times=times, states=np.asarray(states, dtype=float), newton_iters=[0] * n, max_stage_iters=[0] * n, dt=dt)


def synthetic_report(errors, eps, dts, design_order=2):
    errors = np.asarray(errors, dtype=float)
    shape = errors.shape[:2]
    return ConvergenceReport(
        scheme="synthetic",
        design_order=design_order,
        problem="pareschi/equilibrium",
        t_end=1.0,
        ref_dt=1e-5,
        eps=np.asarray(eps, dtype=float),
        dts=np.asarray(dts, dtype=float),
        errors=errors,
        newton_fail=np.zeros(shape, dtype=bool),
        max_stage_iters=np.zeros(shape, dtype=np.int64),
        error_floor=1e-11,
        r2_threshold=0.98,
    )


def test_l2_error_uses_step_widths():
    reference = make_trajectory([0.0, 0.25, 0.5, 0.75, 1.0], np.zeros((5, 2)), 0.25)
    coarse = make_trajectory([0.0, 0.5, 1.0], [[0, 0], [1, 0], [2, 0]], 0.5)
    err = l2_error(coarse, reference)
    assert err[0] == pytest.approx(math.sqrt(0.5 * 1 + 0.5 * 4))
    assert err[1] == 0.0


def test_l2_error_shortened_last_step():
    reference = make_trajectory([0.0, 0.1, 0.2, 0.3, 0.4, 0.5], np.zeros((6, 2)), 0.1)
    coarse = make_trajectory([0.0, 0.2, 0.4, 0.5], [[0, 0], [1, 1], [1, 1], [1, 1]], 0.2)
    err = l2_error(coarse, reference)
    assert err == pytest.approx([math.sqrt(0.2 + 0.2 + 0.1)] * 2)


def test_l2_error_grid_mismatch():
    reference = make_trajectory([0.0, 0.25, 0.5, 0.75, 1.0], np.zeros((5, 2)), 0.25)
    coarse = make_trajectory([0.0, 0.3, 1.0], np.zeros((3, 2)), 0.3)
    with pytest.raises(GridMismatchError):
        l2_error(coarse, reference)


def test_snap_dts_to_reference_multiples():
    dts, multiples = snap_dts([0.0105, 0.02, 0.0199], 0.01)
    assert multiples.tolist() == [1, 2]
    assert dts == pytest.approx([0.01, 0.02])
    # never below one reference step
    assert snap_dts([1e-9], 0.01)[1].tolist() == [1]


def test_fit_window_depends_on_order():
    assert fit_window(2) == (1e-4, 1.0)
    assert fit_window(3) == (1e-3, 1.0)


def test_fit_rate_recovers_power_law():
    dts = np.logspace(-3, -1, 7)
    rate, r2, ok = fit_rate(dts, 3.0 * dts**2, (1e-4, 1.0), 1e-11, 0.98)
    assert rate == pytest.approx(2.0)
    assert r2 == pytest.approx(1.0)
    assert ok


def test_fit_rate_needs_three_points_above_floor():
    dts = np.array([1e-3, 1e-2, 1e-1])
    errors = np.array([1e-13, 1e-6, 1e-4])
    rate, r2, ok = fit_rate(dts, errors, (1e-4, 1.0), 1e-11, 0.98)
    assert math.isnan(rate) and math.isnan(r2)
    assert not ok


def test_fit_rate_ignores_points_outside_window():
    dts = np.array([1e-5, 1e-3, 1e-2, 1e-1])
    errors = np.array([1.0, 1e-6, 1e-4, 1e-2])
    rate, _, ok = fit_rate(dts, errors, (1e-4, 1.0), 1e-11, 0.98)
    assert ok
    assert rate == pytest.approx(2.0)


def test_report_fits_rates_and_writes_csv(tmp_path):
    dts = np.array([1e-3, 1e-2, 1e-1])
    errors = np.stack([np.stack([dts**2, dts**3], axis=-1), np.stack([dts, dts], axis=-1)])
    report = synthetic_report(errors, [0.0, 1.0], dts)
    assert report.rates[0] == pytest.approx([2.0, 3.0])
    assert report.rates[1] == pytest.approx([1.0, 1.0])
    assert report.well_defined.all()

    surface = report.write_surface_csv(tmp_path / "surface.csv").read_text().splitlines()
    assert surface[0] == "eps,dt,err_x,err_y,newton_fail"
    assert len(surface) == 1 + 2 * 3
    rates = report.write_rates_csv(tmp_path / "rates.csv").read_text().splitlines()
    assert rates[0] == "eps,rate_x,rate_y,r2_x,r2_y,well_defined_x,well_defined_y"
    assert report.to_dict()["fit_window"] == [1e-4, 1.0]


def test_ridge_locus_finds_peak():
    eps = [0.0, 1e-4, 1e-3, 1e-2, 1.0]
    dts = np.logspace(-5, -1, 5)
    errors = np.zeros((5, 5, 2))
    errors[0] = 1e-6
    for i, e in enumerate(eps[1:], start=1):
        # peak at Δt = ε, clipped to the grid
        errors[i, :, :] = (1.0 / (1.0 + np.abs(np.log10(dts) - math.log10(e))))[:, None]
    ridge = ridge_locus(synthetic_report(errors, eps, dts))
    assert ridge.eps.tolist() == eps[1:]
    assert ridge.dt_star[:3, 1] == pytest.approx([1e-4, 1e-3, 1e-2])
    assert ridge.interior[:3, 1].all()
    assert not ridge.interior[3, 1]
    assert ridge.in_band.tolist() == [True, True, True, False]
    assert ridge.median_distance() == pytest.approx(0.0)


def test_ridge_locus_flags_flat_rows():
    dts = np.logspace(-4, -1, 4)
    errors = np.full((2, 4, 2), 1e-3)
    ridge = ridge_locus(synthetic_report(errors, [1e-3, 1e-2], dts))
    assert ridge.flat.all()
    assert math.isnan(ridge.median_distance())


@pytest.mark.slow
def test_sweep_small_grid(asi432, cache):
    report = sweep(
        asi432, PARESCHI, eps_grid="0,1e-2,1", dt_grid="0.1,0.05,0.025,0.0125",
        t_end=1.0, ref_dt=REF_DT, workers=1, cache=cache,
    )
    assert report.errors.shape == (3, 4, 2)
    assert report.dts == pytest.approx([0.0125, 0.025, 0.05, 0.1])
    assert not report.newton_fail.any()
    assert report.failures == []
    assert np.all(np.isfinite(report.errors))
    # nonstiff row converges at the design order
    assert 1.6 < report.rates[2, 0] < 2.4
    assert report.well_defined[2, 0]


def test_sweep_zero_eps_row_matches_tiny_eps_row(asi432, cache):
    report = sweep(
        asi432, PARESCHI, eps_grid="0,1e-12", dt_grid="0.1,0.05,0.025",
        t_end=1.0, ref_dt=REF_DT, workers=1, cache=cache,
    )
    assert report.eps.tolist() == [0.0, 1e-12]
    np.testing.assert_allclose(report.errors[0], report.errors[1], rtol=0, atol=1e-8)
    assert not report.newton_fail.any()


def test_sweep_reuses_cached_references(asi432, cache):
    kwargs = dict(eps_grid="0,1", dt_grid="0.1,0.05", t_end=0.5, ref_dt=REF_DT, workers=1, cache=cache)
    first = sweep(asi432, PARESCHI, **kwargs)
    hits = cache.get_stats()["hits"]
    cache.memory_cache.clear()
    second = sweep(asi432, PARESCHI, **kwargs)
    stats = cache.get_stats()
    assert stats["hits"] == hits + 2
    assert stats["disk_hits"] >= 2
    np.testing.assert_array_equal(first.errors, second.errors)


def test_sweep_drops_steps_longer_than_horizon(asi432, cache):
    report = sweep(asi432, PARESCHI, eps_grid="1", dt_grid="0.1,0.25,2", t_end=0.5, ref_dt=0.05, cache=cache)
    assert report.dts == pytest.approx([0.1, 0.25])


def test_sweep_rejects_bad_arguments(asi432):
    with pytest.raises(ValueError):
        sweep(asi432, PARESCHI, eps_grid="1", dt_grid="0.1", t_end=0.0)
    with pytest.raises(ValueError):
        sweep(asi432, PARESCHI, eps_grid="1", dt_grid="0.1", t_end=1.0, ref_dt=-1.0)


@pytest.mark.slow
def test_run_figure_writes_files(tmp_path):
    files = run_figure(
        "fig3", tmp_path, schemes=["ASI-SSP(4,3,2)"], eps_grid="0,1e-1,1",
        dt_grid="0.1,0.05,0.025", t_end=0.5, ref_dt=5e-3, workers=1,
    )
    names = {p.name for p in files}
    assert {
        "fig3_ASI_SSP_4_3_2_surface.csv",
        "fig3_ASI_SSP_4_3_2_rates.csv",
        "fig3_ASI_SSP_4_3_2_report.json",
        "fig3_ASI_SSP_4_3_2_rates.svg",
        "fig3_ASI_SSP_4_3_2_errors_x.svg",
        "fig3_ASI_SSP_4_3_2_errors_y.svg",
    } == names
    assert all(p.exists() for p in files)


@pytest.mark.slow
def test_run_figure_surface_plots(tmp_path):
    files = run_figure(
        "fig2", tmp_path, schemes=["ASI-SSP(4,3,2)"], eps_grid="0,1e-1,1",
        dt_grid="0.1,0.05", t_end=0.2, ref_dt=1e-2, workers=1,
    )
    assert sorted(p.suffix for p in files) == [".csv", ".csv", ".json", ".svg", ".svg"]


def test_run_figure_unknown_figure(tmp_path):
    with pytest.raises(ValueError):
        run_figure("fig9", tmp_path)
