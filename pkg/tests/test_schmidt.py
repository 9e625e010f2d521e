import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmsource.joint_spectrum import FrequencyGrid, JointSpectrum
from qpmsource.schmidt import (
    TRUNCATION,
    coincidence_error_ratio,
    g2_from_jsa,
    indistinguishability,
    make_pump,
    optimize_pump_bandwidth,
    schmidt_decompose,
    sfg_error_probability,
)

import oracles


def double_gaussian(a, b, n):
    half = 7.0 / np.sqrt(min(a, b))
    x = np.linspace(-half, half, n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    u, v = (X + Y) / np.sqrt(2), (X - Y) / np.sqrt(2)
    return np.exp(-a * u * u - b * v * v)


@pytest.mark.parametrize("ratio", [0.25, 1.0, 4.0])
def test_double_gaussian_purity(ratio):
    a, b = 1.0, ratio
    expected = oracles.double_gaussian_purity(a, b)
    p512 = schmidt_decompose(double_gaussian(a, b, 512)).purity
    p256 = schmidt_decompose(double_gaussian(a, b, 256)).purity
    assert p512 == pytest.approx(expected, abs=1e-3)
    # resolution doubling does not move the answer
    assert abs(p512 - p256) < 1e-6


def test_separable_spectrum_has_single_mode():
    x = np.linspace(-3, 3, 200)
    f = np.outer(np.exp(-x ** 2), np.exp(-2 * (x - 0.3) ** 2))
    res = schmidt_decompose(f)
    assert res.coefficients[0] == pytest.approx(1.0, abs=1e-10)
    assert res.purity == pytest.approx(1.0, abs=1e-10)
    assert res.retained_modes == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_identities_on_random_matrices(seed):
    rng = np.random.default_rng(seed)
    f = rng.normal(size=(12, 9)) + 1j * rng.normal(size=(12, 9))
    res = schmidt_decompose(f)
    full = np.linalg.svd(f, compute_uv=False)
    lam = full / np.linalg.norm(full)
    assert np.sum(lam ** 2) == pytest.approx(1.0, abs=1e-12)
    assert 0 < res.purity <= 1 + 1e-12
    assert res.schmidt_number * res.purity == pytest.approx(1.0, abs=1e-10)
    assert g2_from_jsa(f) - 1 == pytest.approx(indistinguishability(f), abs=1e-12)
    assert np.all(np.diff(res.coefficients) <= 0)
    assert np.all(res.coefficients >= TRUNCATION)
    assert res.n_modes == 9


def test_decomposition_invariant_under_scale_and_transpose():
    f = double_gaussian(1.0, 3.0, 128)
    p = schmidt_decompose(f).purity
    assert schmidt_decompose(7.5 * f).purity == pytest.approx(p, rel=1e-12)
    assert schmidt_decompose(f.T).purity == pytest.approx(p, rel=1e-12)
    js = JointSpectrum(np.arange(128.0), np.arange(128.0), 0.0, 0.0, f.astype(complex))
    assert schmidt_decompose(js).purity == pytest.approx(p, rel=1e-12)


def test_all_zero_spectrum_rejected():
    with pytest.raises(ValueError):
        schmidt_decompose(np.zeros((4, 4)))


def test_as_dict_reports_g2():
    d = schmidt_decompose(double_gaussian(1.0, 2.0, 64)).as_dict()
    assert d["g2"] == pytest.approx(1 + d["purity"])
    assert d["indistinguishability"] == d["purity"]


def test_make_pump_shapes():
    assert make_pump("gaussian", 1.0, 2.0).sigma == 2.0
    assert make_pump("rectangular", 1.0, 2.0).width == 2.0
    with pytest.raises(ValueError):
        make_pump("lorentzian", 1.0, 2.0)


def test_optimize_pump_bandwidth_has_interior_maximum(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=10.0, n=128)
    res = optimize_pump_bandwidth(fitted, None, "gaussian", (0.02, 5.0), grid, n_coarse=13)
    assert 0.02 < res.best_bandwidth_nm < 5.0
    assert res.best_indistinguishability >= res.indistinguishability.max()
    assert res.pump_center_nm == pytest.approx(790.0, abs=1e-9)
    assert res.evaluations > 13
    # the curve falls off on both sides of the optimum
    assert res.indistinguishability[0] < res.best_indistinguishability
    assert res.indistinguishability[-1] < res.best_indistinguishability


def test_optimize_pump_degenerate_range_and_validation(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=10.0, n=64)
    res = optimize_pump_bandwidth(fitted, None, "rectangular", (0.5, 0.5), grid)
    assert res.bandwidth_nm.tolist() == [0.5]
    assert res.best_bandwidth_nm == 0.5
    with pytest.raises(ValueError):
        optimize_pump_bandwidth(fitted, None, "gaussian", (1.0, 0.5), grid)
    with pytest.raises(ValueError):
        optimize_pump_bandwidth(fitted, None, "gaussian", (0.1, 1.0), grid, n_coarse=4)


def test_optimize_pump_threads_match_serial(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=10.0, n=64)
    a = optimize_pump_bandwidth(fitted, None, "gaussian", (0.05, 3.0), grid, n_coarse=9)
    b = optimize_pump_bandwidth(fitted, None, "gaussian", (0.05, 3.0), grid, n_coarse=9, workers=4)
    assert a.as_dict() == b.as_dict()


def test_error_model():
    assert coincidence_error_ratio(0.01, 0.01) == pytest.approx(1.0)
    assert coincidence_error_ratio(0.1, 0.01) == pytest.approx(0.1)
    assert sfg_error_probability(0.01) == pytest.approx(1e-4)
    with pytest.raises(ValueError):
        coincidence_error_ratio(0.0, 0.01)
    with pytest.raises(ValueError):
        sfg_error_probability(1.5)
