import numpy as np
import pytest

from szegolab.errors import (
    InequalityViolated,
    InsufficientSamples,
    OrderingViolated,
)
from szegolab.experiments import (
    classify,
    fit_exp_rate,
    fit_power_law,
    kappa_check,
    stationary_norms_sq,
    stationary_residual,
    stationary_rho_solver,
    stationary_search,
    sweep,
    sweep_to_csv,
)
from szegolab.modes import Params
from szegolab.rank_one import RankOneState


def test_fit_power_law_exact():
    t = np.linspace(1, 100, 200)
    fit = fit_power_law(t, 3.5 * t**2)
    assert fit.exponent == pytest.approx(2.0, abs=1e-8)
    assert fit.amplitude == pytest.approx(3.5, abs=1e-8)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_power_law_noisy_window():
    t = np.linspace(100, 1000, 500)
    y = 2 * t * (1 + 0.01 * np.sin(t))
    fit = fit_power_law(t, y, window=(100, 1000))
    assert fit.exponent == pytest.approx(1.0, abs=0.01)
    assert fit.amplitude == pytest.approx(2.0, rel=0.02)


def test_fit_exp_rate_exact():
    t = np.linspace(0, 5, 100)
    fit = fit_exp_rate(t, 4.0 * np.exp(-3.0 * t))
    assert fit.exponent == pytest.approx(3.0, abs=1e-10)
    assert fit.amplitude == pytest.approx(4.0, rel=1e-10)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_fit_insufficient_samples():
    t = np.linspace(1, 2, 5)
    with pytest.raises(InsufficientSamples):
        fit_power_law(t, t)


def test_kappa_check_generic_start_invariance():
    t1, tg1 = kappa_check(1, 0, 0, 1, eta0=0.3, t_end=2000.0)
    t2, tg2 = kappa_check(1, 0, 0, 1, eta0=0.05, q0=0.3, t_end=2000.0)
    assert tg1[-1] == pytest.approx(tg2[-1], rel=0.02)
    assert tg1[-1] == pytest.approx(1.0, rel=0.05)


def test_stationary_rho_solver_reference():
    r1, r2, r3 = stationary_rho_solver(1.0, 0.5, 0.01)
    # the quoted references are first-order in eps; the P-residual check
    # below is the exact certificate
    assert r1 == pytest.approx(1.00665, abs=1e-3)
    assert r2 == pytest.approx(0.52634, abs=1e-3)
    assert r3 == pytest.approx(0.04006, abs=1e-3)
    assert r1**2 + r2**2 + r3**2 < 2.0
    # oracle: P(rho_i) hits the targets
    def P(x):
        return x * (x**2 - 1.0) * (x**2 - 0.25)

    assert abs(P(r1) - 0.01) < 1e-12
    assert abs(P(r2) + 0.01) < 1e-12
    assert abs(P(r3) - 0.01) < 1e-12


def test_stationary_rho_limits():
    r1, r2, r3 = stationary_rho_solver(1.0, 0.5, 1e-9)
    assert r1 == pytest.approx(1.0, abs=1e-8)
    assert r2 == pytest.approx(0.5, abs=1e-8)
    assert abs(r3) < 1e-2


def test_stationary_balance_identities():
    sigma1, sigma2 = 1.0, 0.5
    rhos = stationary_rho_solver(sigma1, sigma2, 0.01)
    n1, n2, n3 = stationary_norms_sq(rhos, sigma1, sigma2)
    r1, r2, r3 = rhos
    assert abs(r2 * n2 - (r1 * n1 + r3 * n3)) < 1e-10
    assert abs(n2 / r2 - (n1 / r1 + n3 / r3)) < 1e-10


def test_stationary_rho_errors():
    with pytest.raises((OrderingViolated, InequalityViolated)):
        stationary_rho_solver(1.0, 0.5, 0.2)


def test_stationary_search_candidate():
    cand = stationary_search(5, seed=0)
    assert cand.residual_mean < 1e-10
    assert cand.residual_cubic < 1e-10
    assert cand.omega == "InOmega"
    # stationarity holds for the full vector field at beta = 1, any (nu, alpha)
    assert stationary_residual(cand.u, 1.0, 0.0) < 1e-8
    assert stationary_residual(cand.u, 2.0, 0.7) < 1e-8


def test_classify_periodic():
    p = Params(nu=1.0)
    assert classify(RankOneState(0, 1.3, 0), p).verdict == "Periodic"


def test_classify_blowup():
    p = Params(nu=1.0, rel_tol=1e-11, abs_tol=1e-13)
    res = classify(RankOneState(0, 1, 0.5), p, horizon=2000.0)
    assert res.verdict == "BlowUp"
    assert res.kappa_hat == pytest.approx(1.1701, rel=0.05)
    assert res.fit is not None
    assert res.fit.exponent == pytest.approx(1.0, abs=0.05)


def test_classify_scatter():
    from szegolab.asymptotics import AsymptoticCharge, construct_sigma_point

    s0 = construct_sigma_point(AsymptoticCharge(1.0), 1.0, 0.0, 0.0, 1.0, T=10.0,
                               verify=False)
    p = Params(nu=1.0, rel_tol=1e-12, abs_tol=1e-15)
    res = classify(s0, p, horizon=40.0)
    assert res.verdict == "Scatter"
    assert res.fit is not None
    assert res.fit.exponent == pytest.approx(1.3002, rel=0.05)


def test_classify_determinism():
    p = Params(nu=1.0, rel_tol=1e-11, abs_tol=1e-13)
    a = classify(RankOneState(0, 1, 0.5), p, horizon=500.0)
    b = classify(RankOneState(0, 1, 0.5), p, horizon=500.0)
    assert a == b


def test_sweep_rows_and_errors(tmp_path):
    cells = [
        {"nu": 1.0, "beta": 0.0, "b": 0.0, "c": 1.0, "p": 0.5, "horizon": 500.0},
        {"nu": 1.0, "beta": 0.0, "b": 0.0, "c": 1.0, "p": 0.0},
        {"nu": -1.0, "beta": 0.0, "b": 0.0, "c": 1.0, "p": 0.5},  # invalid nu
    ]
    rows = sweep(cells)
    assert rows[0]["verdict"] == "BlowUp"
    assert rows[1]["verdict"] == "Periodic"
    assert rows[2]["error"] != ""
    path = tmp_path / "sweep.csv"
    sweep_to_csv(rows, str(path))
    header = open(path).readline().strip().split(",")
    assert header == ["nu", "alpha", "beta", "M", "family", "verdict",
                      "rate", "kappa", "a_sq", "sigma", "r_squared", "error"]


def test_sweep_parallel_matches_serial():
    cells = [
        {"nu": nu, "beta": beta, "b": 0.0, "c": 1.0, "p": 0.4, "horizon": 300.0}
        for nu in (0.5, 1.0)
        for beta in (0.0, 0.5)
    ]
    serial = sweep(cells, jobs=1)
    parallel = sweep(cells, jobs=2)
    assert serial == parallel
