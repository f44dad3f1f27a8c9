import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from oracles import nullspace_qp, random_spd
from skewbl import (
    DimensionError,
    MarketPrior,
    ViewSet,
    bl_predictive,
    compare_reports,
    run_bl_frontier,
    run_skbl_surface,
    simaan_from_snt,
    skbl_predictive,
)
from skewbl.frontier import LONG_COLUMNS, FrontierReport

MONTHLY_M_GRID = [0.0042, 0.0083, 0.0125, 0.0167]
SURFACE_M_GRID = [0.0021, 0.0042, 0.0063, 0.0083, 0.0104, 0.0125, 0.0146, 0.0167]
SURFACE_N_GRID = [0.0, 0.01, 0.02, 0.03, 0.04, 0.05]


@pytest.fixture(scope="module")
def setup():
    rng = np.random.default_rng(31)
    sigma = random_spd(rng, 4, scale=0.004)
    prior = MarketPrior([0.4, 0.3, 0.2, 0.1], sigma)
    views = ViewSet([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, -1.0, 0.0]], [0.015, 0.01], [1e-4, 1e-4])
    return prior, views, np.array([1.0, -0.5, 0.8, 0.3])


@pytest.fixture(scope="module")
def surface(setup):
    prior, views, lambda1 = setup
    return run_skbl_surface(prior, views, lambda1, SURFACE_M_GRID, SURFACE_N_GRID)


def test_bl_frontier_three_asset_matches_qp():
    rng = np.random.default_rng(30)
    prior = MarketPrior([0.5, 0.3, 0.2], random_spd(rng, 3, scale=0.004))
    views = ViewSet([[1.0, 0.0, -1.0]], [0.01], [1e-4])
    report = run_bl_frontier(prior, views, MONTHLY_M_GRID)
    mean, cov = bl_predictive(prior, views)
    assert [r.M for r in report.rows] == MONTHLY_M_GRID
    for row in report.rows:
        oracle = nullspace_qp(cov, np.vstack([np.ones(3), mean]), np.array([1.0, row.M]))
        assert_allclose(row.weights, oracle, atol=1e-6)
        assert row.volatility == pytest.approx(np.sqrt(row.weights @ cov @ row.weights), rel=1e-14)
        assert row.sharpe == pytest.approx(row.M / row.volatility, rel=1e-14)


def test_bl_volatility_grows_away_from_minimum(setup):
    prior, views, _ = setup
    grid = np.linspace(-0.02, 0.04, 25)
    report = run_bl_frontier(prior, views, grid)
    vols = np.array([r.volatility for r in report.rows])
    i = int(np.argmin(vols))
    assert np.all(np.diff(vols[i:]) >= 0)
    assert np.all(np.diff(vols[: i + 1]) <= 0)


def test_surface_layout(surface):
    assert len(surface.rows) == 48
    keys = [(r.M, r.N) for r in surface.rows]
    assert keys == sorted(keys)
    assert keys[:2] == [(0.0021, 0.0), (0.0021, 0.01)]
    assert surface.model_tag == "skBL"


def test_surface_row_invariants(setup, surface):
    prior, views, lambda1 = setup
    pred = skbl_predictive(prior, views, lambda1)
    rep = simaan_from_snt(pred.params)
    for row in surface.rows:
        assert row.ok
        w = row.weights
        assert abs(w.sum() - 1) < 1e-10
        assert abs(w @ pred.location - row.M) < 1e-10
        assert abs(w @ rep.b - row.N) < 1e-10
        vol_scale_form = np.sqrt(w @ pred.scale @ w - (2 / np.pi) * row.N**2)
        vol_split_form = np.sqrt(row.spherical + row.non_spherical)
        assert abs(vol_scale_form - vol_split_form) < 1e-12
        assert abs(row.volatility - vol_scale_form) < 1e-12
        if abs(row.skewness) > 1e-12:
            assert np.sign(row.skewness) == np.sign(row.tau1_w)


def test_variance_quadratic_in_M(setup):
    prior, views, lambda1 = setup
    grid = [0.0, 0.005, 0.01, 0.02]
    report = run_skbl_surface(prior, views, lambda1, grid, [0.01])
    var = [r.variance for r in report.rows]
    coef = np.polyfit(grid[:3], var[:3], 2)
    assert abs(np.polyval(coef, grid[3]) - var[3]) < 1e-8


def test_surface_continuity(setup):
    prior, views, lambda1 = setup
    M = np.linspace(0.0, 0.02, 11)
    N = np.linspace(0.0, 0.05, 11)
    report = run_skbl_surface(prior, views, lambda1, M, N)
    vol = np.array([r.volatility for r in report.rows]).reshape(11, 11)
    dM, dN = np.abs(np.diff(vol, axis=0)), np.abs(np.diff(vol, axis=1))
    # neighbouring steps should be of comparable size
    assert dM.max() < 10 * np.median(dM) + 1e-12
    assert dN.max() < 10 * np.median(dN) + 1e-12


def test_normal_reduction(setup):
    prior, views, _ = setup
    grid = np.linspace(0.0, 0.02, 9)
    bl = run_bl_frontier(prior, views, grid)
    sk = run_skbl_surface(prior, views, np.zeros(prior.k), grid, [0.0])
    for a, b in zip(bl.rows, sk.rows):
        assert a.M == b.M
        assert_allclose(b.weights, a.weights, atol=1e-8)
        assert abs(a.volatility - b.volatility) < 1e-8
        assert abs(a.sharpe - b.sharpe) < 1e-8
        assert b.tau1_w == 0.0


def test_nonzero_N_without_skew_is_reported_not_raised(setup):
    prior, views, _ = setup
    report = run_skbl_surface(prior, views, np.zeros(prior.k), [0.01], [0.0, 0.02])
    assert [r.ok for r in report.rows] == [True, False]
    assert np.isnan(report.rows[1].volatility)


def test_metadata(setup, surface):
    prior, views, lambda1 = setup
    bl = run_bl_frontier(prior, views, MONTHLY_M_GRID, r_f=0.001, metadata={"dataset_hash": "abc"})
    assert bl.metadata["tau"] == 0.025
    assert bl.metadata["gamma"] == 2.5
    assert bl.metadata["r_f"] == 0.001
    assert bl.metadata["dataset_hash"] == "abc"
    assert surface.metadata["N_grid"] == SURFACE_N_GRID
    assert bl.rows[0].sharpe == pytest.approx((0.0042 - 0.001) / bl.rows[0].volatility)


def test_long_table_and_round_trip(surface):
    table = surface.long_table()
    assert list(table.columns) == LONG_COLUMNS
    frame = surface.to_frame()
    again = FrontierReport.from_frame(frame)
    assert again.model_tag == "skBL"
    for a, b in zip(surface.rows, again.rows):
        assert_allclose(a.weights, b.weights)
        assert a.volatility == b.volatility


class TestCompare:
    def test_identical_reports(self, setup):
        prior, views, _ = setup
        bl = run_bl_frontier(prior, views, MONTHLY_M_GRID)
        cmp = compare_reports(bl, bl)
        assert np.all(cmp.table["volatility_diff"] == 0)
        assert np.all(cmp.table["sharpe_diff"] == 0)

    def test_antisymmetric(self, setup):
        prior, views, lambda1 = setup
        bl = run_bl_frontier(prior, views, MONTHLY_M_GRID)
        sk = run_skbl_surface(prior, views, lambda1, MONTHLY_M_GRID, [0.0, 0.01])
        ab = compare_reports(bl, sk).table
        ba = compare_reports(sk, bl).table.sort_values(["M", "N_a"]).reset_index(drop=True)
        ab = ab.sort_values(["M", "N_b"]).reset_index(drop=True)
        assert_allclose(ab["volatility_diff"], -ba["volatility_diff"], atol=0)
        assert_allclose(ab["sharpe_diff"], -ba["sharpe_diff"], atol=0)

    def test_wide_layout(self, setup):
        prior, views, lambda1 = setup
        bl = run_bl_frontier(prior, views, MONTHLY_M_GRID)
        sk = run_skbl_surface(prior, views, lambda1, MONTHLY_M_GRID, SURFACE_N_GRID)
        wide = compare_reports(bl, sk).wide()
        assert list(wide.index) == MONTHLY_M_GRID
        assert list(wide.columns) == ["BL"] + [f"skBL[N={n:.12g}]" for n in SURFACE_N_GRID]
        assert wide["BL"].tolist() == [r.volatility for r in bl.rows]
        assert isinstance(wide, pd.DataFrame)

    def test_mismatched_grids(self, setup):
        prior, views, lambda1 = setup
        bl = run_bl_frontier(prior, views, MONTHLY_M_GRID)
        sk = run_skbl_surface(prior, views, lambda1, MONTHLY_M_GRID[:3], [0.0])
        with pytest.raises(DimensionError):
            compare_reports(bl, sk)


def test_empty_M_grid(setup):
    prior, views, _ = setup
    with pytest.raises(DimensionError):
        run_bl_frontier(prior, views, [])
