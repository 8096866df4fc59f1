import numpy as np
import pytest

from rydbeat import least_squares
from rydbeat.errors import DegenerateFitError, InvalidInputError
from rydbeat.fitting.models import contrast_decay_profile, emg_profile, fringe_profile


def gaussian_model(x, p):
    return p["amp"] * np.exp(-((x - p["mu"]) ** 2) / (2 * p["width"] ** 2))


def test_exact_data_at_init_converges_immediately():
    x = np.linspace(-5, 5, 60)
    truth = {"amp": 2.0, "mu": 0.3, "width": 1.1}
    y = gaussian_model(x, truth)
    result = least_squares(gaussian_model, x, y, dict(truth))
    assert result.converged
    assert result.iterations == 0
    assert result.chi2_reduced == 0.0
    assert result.params == pytest.approx(truth)


def test_fewer_points_than_parameters_rejected():
    with pytest.raises(DegenerateFitError):
        least_squares(gaussian_model, np.array([0.0, 1.0, 2.0]),
                      np.array([1.0, 2.0, 1.0]),
                      {"amp": 1.0, "mu": 0.0, "width": 1.0})


def test_init_outside_bounds_rejected():
    x = np.linspace(0, 10, 30)
    y = np.exp(-x)
    with pytest.raises(InvalidInputError):
        least_squares(lambda t, p: p["a"] * np.exp(-t), x, y, {"a": -1.0},
                      bounds={"a": (0.0, None)})


def test_fixed_parameters_stay_fixed():
    x = np.linspace(-4, 4, 80)
    truth = {"amp": 2.0, "mu": 0.5, "width": 1.3}
    y = gaussian_model(x, truth)
    result = least_squares(gaussian_model, x, y,
                           {"amp": 1.0, "mu": 0.5, "width": 1.0}, fixed=["mu"])
    assert result.params["mu"] == 0.5
    assert result.sigmas["mu"] == 0.0
    assert result.params["amp"] == pytest.approx(2.0, rel=1e-6)


def test_final_cost_never_exceeds_initial():
    rng = np.random.default_rng(5)
    x = np.linspace(0, 30, 120)
    for _ in range(10):
        truth = {"t0": 5.0, "sigma": 1.2, "tau": rng.uniform(2, 15),
                 "amp": rng.uniform(10, 100), "baseline": rng.uniform(0, 2)}
        y = emg_profile(x, **truth) + rng.normal(0, 0.3, x.size)
        init = {k: v * rng.uniform(0.7, 1.3) for k, v in truth.items()}
        init["baseline"] = truth["baseline"] + rng.uniform(-0.2, 0.2)
        r0 = emg_profile(x, **init) - y
        result = least_squares(
            lambda t, p: emg_profile(t, p["t0"], p["sigma"], p["tau"], p["amp"],
                                     p["baseline"]),
            x, y, init,
            bounds={"sigma": (1e-3, None), "tau": (1e-3, None), "amp": (0, None)},
        )
        dof = x.size - 5
        assert result.chi2_reduced * dof <= float(r0 @ r0) + 1e-12


@pytest.mark.parametrize("seed", range(6))
def test_emg_round_trip_from_perturbed_inits(seed):
    rng = np.random.default_rng(seed)
    x = np.arange(0.0, 80.0, 0.2)
    truth = {"t0": rng.uniform(5, 15), "sigma": rng.uniform(0.5, 2.0),
             "tau": rng.uniform(1, 20), "amp": rng.uniform(5, 500),
             "baseline": rng.uniform(0.5, 5)}
    y = emg_profile(x, **truth)
    init = {k: v * rng.uniform(0.7, 1.3) for k, v in truth.items()}
    result = least_squares(
        lambda t, p: emg_profile(t, p["t0"], p["sigma"], p["tau"], p["amp"],
                                 p["baseline"]),
        x, y, init,
        bounds={"sigma": (1e-3, None), "tau": (1e-3, None), "amp": (0, None)},
    )
    assert result.converged
    for name, value in truth.items():
        assert result.params[name] == pytest.approx(value, rel=1e-6), name


@pytest.mark.parametrize("seed", range(6))
def test_fringe_round_trip_from_perturbed_inits(seed):
    rng = np.random.default_rng(100 + seed)
    x = np.arange(400.0)
    truth = {"A": rng.uniform(50, 500), "x0": rng.uniform(150, 250),
             "sigma": rng.uniform(60, 120), "C": rng.uniform(0.2, 0.9),
             "k": rng.uniform(0.3, 0.8), "phi": rng.uniform(-2, 2)}
    y = fringe_profile(x, **truth)
    init = {k: v * rng.uniform(0.7, 1.3) for k, v in truth.items()}
    # the wavenumber landscape is periodic: a 30% error lands in another
    # fringe order, so its init stays within half a basin (1/sigma_x)
    init["k"] = truth["k"] + rng.uniform(-0.5, 0.5) / truth["sigma"]
    init["phi"] = truth["phi"] + rng.uniform(-0.3, 0.3) * np.pi
    init["C"] = float(np.clip(init["C"], 0.05, 0.95))
    result = least_squares(
        lambda t, p: fringe_profile(t, p["A"], p["x0"], p["sigma"], p["C"],
                                    p["k"], p["phi"]),
        x, y, init,
        bounds={"A": (0, None), "sigma": (0.5, None), "C": (0.0, 1.0),
                "k": (1e-3, np.pi)},
    )
    assert result.converged
    for name, value in truth.items():
        assert result.params[name] == pytest.approx(value, rel=1e-6), name


@pytest.mark.parametrize("seed", range(6))
def test_contrast_decay_round_trip_from_perturbed_inits(seed):
    rng = np.random.default_rng(200 + seed)
    x = np.arange(0.0, 20.0, 1.0)
    truth = {"C0": rng.uniform(0.5, 0.95), "T2": rng.uniform(3, 12),
             "floor": rng.uniform(0.01, 0.2)}
    y = contrast_decay_profile(x, **truth)
    init = {k: v * rng.uniform(0.7, 1.3) for k, v in truth.items()}
    init["C0"] = float(np.clip(init["C0"], 0.05, 0.99))
    result = least_squares(
        lambda t, p: contrast_decay_profile(t, p["C0"], p["T2"], p["floor"]),
        x, y, init,
        bounds={"C0": (0, 1), "T2": (1e-3, None), "floor": (0, 1)},
    )
    assert result.converged
    for name, value in truth.items():
        assert result.params[name] == pytest.approx(value, rel=1e-6), name


def test_sigma_scaling_with_noise_level():
    # doubling the noise doubles the reported parameter uncertainties
    rng = np.random.default_rng(42)
    x = np.linspace(0.0, 20.0, 80)
    truth = {"C0": 0.9, "T2": 6.0, "floor": 0.05}
    clean = contrast_decay_profile(x, **truth)

    def fitted_sigmas(noise_sigma, seed):
        y = clean + np.random.default_rng(seed).normal(0, noise_sigma, x.size)
        result = least_squares(
            lambda t, p: contrast_decay_profile(t, p["C0"], p["T2"], p["floor"]),
            x, y, dict(truth),
            bounds={"C0": (0, 1), "T2": (1e-3, None), "floor": (0, 1)},
        )
        return np.array([result.sigmas[k] for k in ("C0", "T2", "floor")])

    lo = np.mean([fitted_sigmas(0.01, s) for s in range(50)], axis=0)
    hi = np.mean([fitted_sigmas(0.02, 1000 + s) for s in range(50)], axis=0)
    ratios = hi / lo
    assert np.all(ratios > 1.6) and np.all(ratios < 2.4)


def test_covariance_shape_and_symmetry():
    x = np.linspace(0, 10, 50)
    rng = np.random.default_rng(1)
    y = 3.0 * np.exp(-x / 2.5) + rng.normal(0, 0.05, x.size)
    result = least_squares(
        lambda t, p: p["a"] * np.exp(-t / p["tau"]), x, y,
        {"a": 2.5, "tau": 3.0}, bounds={"a": (0, None), "tau": (1e-3, None)},
    )
    cov = result.covariance
    assert cov.shape == (2, 2)
    assert np.allclose(cov, cov.T)
    assert np.all(np.diag(cov) >= 0)
    assert result.sigmas["a"] == pytest.approx(np.sqrt(cov[0, 0]))


def test_result_json_contract():
    x = np.linspace(0, 10, 40)
    y = 2.0 * np.exp(-x / 3.0)
    result = least_squares(lambda t, p: p["a"] * np.exp(-t / p["tau"]), x, y,
                           {"a": 1.5, "tau": 2.0}, model="expdecay")
    obj = result.to_json_obj()
    assert set(obj) == {"model", "params", "sigmas", "chi2_reduced",
                       "converged", "flags"}
    assert obj["model"] == "expdecay"
    assert obj["converged"] is True
    assert isinstance(obj["flags"], list)
    assert set(obj["params"]) == {"a", "tau"}


def test_max_iteration_cap_flags_not_raises():
    rng = np.random.default_rng(3)
    x = np.linspace(0, 10, 60)
    y = np.sin(3 * x) + rng.normal(0, 0.1, x.size)
    result = least_squares(
        lambda t, p: p["a"] * np.sin(p["w"] * t + p["c"]), x, y,
        {"a": 0.5, "w": 2.0, "c": 0.1}, max_iter=2,
    )
    assert not result.converged
    assert "max-iterations" in result.flags
