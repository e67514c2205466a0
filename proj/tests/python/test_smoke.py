"""End-to-end checks of the Python bindings against known closed forms."""

import math

import pytest

import mobsim


LATENT = {"model": "latent_factor", "params": {"rho": 0.8, "lambda": 0.7}}
ASSORTATIVE = {
    "model": "assortative",
    "params": {"rho": 0.8, "lambda": 0.7, "m": 0.8},
}


def test_version_matches_package():
    assert mobsim.__version__ == "0.1.0"


def test_analytic_moments_values():
    m = mobsim.analytic_moments(LATENT, max_k=3)
    assert m["beta_k"]["1"] == pytest.approx(0.448, abs=1e-15)
    assert m["beta_k"]["2"] == pytest.approx(0.3136, abs=1e-15)
    assert m["beta_k"]["3"] == pytest.approx(0.21952, abs=1e-15)
    assert m["sibling"] == pytest.approx(0.64 * 0.49, abs=1e-15)
    assert m["cousin"] == pytest.approx(0.64 * 0.7**4, abs=1e-15)


def test_iterated_prediction_undershoots():
    assert mobsim.iterated_prediction(0.448, 3) == pytest.approx(0.448**3)
    assert mobsim.iterated_prediction(0.448, 3) < 0.21952


def test_duality_identity():
    beta1, beta2 = 0.448, 0.3136
    expected = (beta2 - beta1**2) / (1 - beta1**2)
    assert mobsim.duality_gp_coefficient(beta1, beta2) == pytest.approx(
        expected, abs=1e-15
    )


def test_simulate_shape_and_determinism():
    panel = mobsim.simulate(LATENT, dynasties=200, generations=3, seed=9)
    assert len(panel) == 200 * 3
    assert panel.model == "latent_factor"
    assert panel.topology["generations"] == 3
    again = mobsim.simulate(LATENT, dynasties=200, generations=3, seed=9)
    assert panel.column("y") == again.column("y")
    threaded = mobsim.simulate(
        LATENT, dynasties=200, generations=3, seed=9, threads=4
    )
    assert panel.column("y") == threaded.column("y")


def test_founders_have_no_father():
    panel = mobsim.simulate(LATENT, dynasties=50, generations=2, seed=1)
    fathers = panel.column("father_id")
    gens = panel.column("generation")
    for f, g in zip(fathers, gens):
        assert (f is None) == (g == 0)


def test_estimates_track_closed_form():
    panel = mobsim.simulate(LATENT, dynasties=20000, generations=3, seed=4)
    fit = mobsim.beta_k_estimate(panel, k=1)
    assert fit["coefficients"]["lag1"] == pytest.approx(0.448, abs=0.02)
    multi = mobsim.multigen_regression(panel, lags=[1, 2])
    assert multi["coefficients"]["lag2"] == pytest.approx(
        mobsim.duality_gp_coefficient(0.448, 0.3136), abs=0.03
    )


def test_fit_latent_factor_exact_inverse():
    fit = mobsim.fit_latent_factor({1: 0.448, 2: 0.3136})
    assert fit["rho_sq"] == pytest.approx(0.64, abs=1e-12)
    assert fit["lambda"] == pytest.approx(0.7, abs=1e-12)


def test_panel_round_trip(tmp_path):
    panel = mobsim.simulate(LATENT, dynasties=30, generations=3, seed=5)
    path = tmp_path / "panel.csv"
    panel.save(str(path))
    loaded = mobsim.load_panel(str(path))
    assert loaded.column("y") == panel.column("y")
    assert mobsim.beta_k_estimate(loaded, k=1) == mobsim.beta_k_estimate(panel, k=1)


def test_csv_export_has_versioned_header(tmp_path):
    panel = mobsim.simulate(LATENT, dynasties=5, generations=2, seed=6)
    path = tmp_path / "panel.csv"
    panel.save(str(path))
    text = path.read_text()
    assert text.startswith("# mobsim-panel-v1")
    assert text.splitlines()[1].startswith("person_id,dynasty_id,generation")


def test_validate_model_reports_violations():
    issues = mobsim.validate_model(
        {"model": "latent_factor", "params": {"rho": 1.5, "lambda": 0.7}}
    )
    assert any(v["severity"] == "error" for v in issues)
    assert mobsim.validate_model(LATENT) == []
    # A trap whose below-threshold slope is weaker than the above-threshold
    # slope is legal but suspicious, so it warns rather than errors.
    odd = mobsim.validate_model(
        {
            "model": "poverty_trap",
            "params": {"gamma_low": 0.2, "gamma_high": 0.9, "threshold_ybar": -0.3},
        }
    )
    assert odd and all(v["severity"] == "warning" for v in odd)


def test_invalid_inputs_raise_value_error():
    with pytest.raises(ValueError):
        mobsim.simulate({"model": "nonsense"}, dynasties=10, generations=3, seed=0)
    with pytest.raises(ValueError):
        mobsim.simulate(
            {"model": "latent_factor", "params": {"rho": 1.5, "lambda": 0.7}},
            dynasties=10,
            generations=3,
            seed=0,
        )
    with pytest.raises(ValueError):
        mobsim.analytic_moments(
            {
                "model": "poverty_trap",
                "params": {"gamma_low": 0.9, "gamma_high": 0.2, "threshold_ybar": -0.3},
            }
        )


def test_infeasible_fit_raises_arithmetic_error():
    with pytest.raises(ArithmeticError):
        mobsim.fit_latent_factor({1: 0.3, 2: 0.5})


def test_missing_file_raises_os_error():
    with pytest.raises(OSError):
        mobsim.load_panel("/nonexistent/panel.csv")


def test_replicate_runs_and_passes():
    report = mobsim.replicate("fig1a")
    assert report["pass"] is True
    assert report["experiment_id"] == "fig1a"
    assert math.isfinite(report["max_abs_deviation"])


def test_two_parent_controls():
    panel = mobsim.simulate(ASSORTATIVE, dynasties=5000, generations=3, seed=7)
    plain = mobsim.multigen_regression(panel, lags=[1, 2])
    controlled = mobsim.multigen_regression(panel, lags=[1, 2], controls=["mother_y"])
    assert controlled["coefficients"]["lag2"] < plain["coefficients"]["lag2"]
