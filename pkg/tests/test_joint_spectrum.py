import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qpmsource.dispersion import bandwidth_nm_to_omega, material_mismatch, nm_to_omega, omega_to_nm
from qpmsource.joint_spectrum import (
    DomainPoling,
    FrequencyGrid,
    GaussianPump,
    JointSpectrum,
    RectangularPump,
    TabulatedPhaseMatching,
    TabulatedPump,
    UniformPoling,
    build_jsa,
    jsi,
    phase_matching_on_grid,
    pm_amplitude_domains,
    pm_amplitude_uniform,
    pump_amplitude,
    spdc_rate,
)
from qpmsource.scan import qpm_fourier_coefficient

import oracles


# ---------------------------------------------------------------------------
# pump envelopes
# ---------------------------------------------------------------------------

def test_gaussian_pump_width_convention():
    p = GaussianPump(2.0e15, 1.0e12)
    vals = pump_amplitude(p, np.array([2.0e15, 2.0e15 + 1.0e12, 2.0e15 - 2.0e12]))
    assert vals == pytest.approx([1.0, np.exp(-1.0), np.exp(-4.0)], rel=1e-12)


def test_rectangular_pump_is_closed_interval():
    p = RectangularPump(0.0, 2.0)
    assert list(pump_amplitude(p, np.array([-1.0, 1.0, 0.0, 1.0 + 1e-12, -1.5]))) == [1, 1, 1, 0, 0]


def test_tabulated_pump_peak_normalised_and_zero_outside():
    p = TabulatedPump(np.array([1.0, 2.0, 3.0]), np.array([0.0, 4.0, 2.0]))
    assert p.center == 2.0
    assert pump_amplitude(p, np.array([2.0, 2.5, 0.5, 3.5])) == pytest.approx([1.0, 0.75, 0.0, 0.0])
    with pytest.raises(ValueError):
        TabulatedPump(np.array([1.0, 1.0]), np.array([1.0, 1.0]))


def test_pump_validation():
    with pytest.raises(ValueError):
        GaussianPump(1.0, 0.0)
    with pytest.raises(ValueError):
        RectangularPump(1.0, -1.0)
    with pytest.raises(TypeError):
        pump_amplitude(object(), 1.0)


# ---------------------------------------------------------------------------
# phase matching
# ---------------------------------------------------------------------------

def test_uniform_sinc_peak_and_zeros():
    L = 0.03
    n = np.arange(1, 6)
    assert pm_amplitude_uniform(0.0, L) == 1.0
    assert np.allclose(pm_amplitude_uniform(2 * np.pi * n / L, L), 0.0, atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(dk=st.floats(-1e5, 1e5), L=st.floats(1e-3, 0.05))
def test_uniform_sinc_bounded_and_phase_preserves_magnitude(dk, L):
    real = pm_amplitude_uniform(dk, L)
    cplx = pm_amplitude_uniform(dk, L, include_phase=True)
    assert abs(real) <= 1.0
    assert abs(cplx) == pytest.approx(abs(real), abs=1e-15)
    assert np.isrealobj(real)


def _dk_near_grating(crystal, offsets):
    # material mismatch values around the first-order grating component
    return crystal.grating_sign * 2 * np.pi / crystal.period_m + np.asarray(offsets) / crystal.length_m


@pytest.mark.parametrize("duty", [0.5, 0.45])
def test_domain_integral_matches_quadrature(sellmeier, duty):
    from qpmsource.dispersion import CrystalSpec
    c = CrystalSpec(46.125, 3.0, duty, 1, sellmeier=sellmeier, grating_sign=-1)
    dom = DomainPoling.from_crystal(c)
    dks = _dk_near_grating(c, [0.0, 1.7, -4.0, 9.3])
    got = pm_amplitude_domains(dks, dom)
    for dk, g in zip(dks, got):
        ref = oracles.domain_phi_quad(dk, dom.boundaries, dom.signs)
        assert abs(g - ref) < 1e-6


def test_domain_integral_reduces_to_fourier_weighted_sinc(fitted):
    dom = DomainPoling.from_crystal(fitted)
    x = np.linspace(-12, 12, 49)
    dks = _dk_near_grating(fitted, 2 * x)
    got = np.abs(pm_amplitude_domains(dks, dom))
    ideal = qpm_fourier_coefficient(1, 0.5) * np.abs(np.sinc(x / np.pi))
    assert np.max(np.abs(got - ideal)) < 2e-3


def test_domain_small_dk_series_is_continuous():
    dom = DomainPoling.periodic(1e-5, 1e-3, duty=0.3)
    eps = 1e-4  # dk L = 1e-7, series branch
    near = pm_amplitude_domains(np.array([eps, 1e-2]), dom)
    assert near[0] == pytest.approx(near[1], abs=1e-5)
    assert near[0].real == pytest.approx(np.sum(dom.signs * np.diff(dom.boundaries)) / 1e-3, rel=1e-9)


def test_domain_walls_validation():
    with pytest.raises(ValueError):
        DomainPoling(np.array([0.0, 2.0, 1.0]))
    with pytest.raises(ValueError):
        DomainPoling(np.array([0.1, 1.0]))
    d = DomainPoling.periodic(2.0, 5.0, duty=0.5)
    assert list(d.boundaries) == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    assert list(d.signs) == [1, -1, 1, -1, 1]


def test_jitter_is_reproducible_and_keeps_length(fitted):
    a = DomainPoling.from_crystal(fitted, 0.05, np.random.default_rng(3))
    b = DomainPoling.from_crystal(fitted, 0.05, np.random.default_rng(3))
    assert np.array_equal(a.boundaries, b.boundaries)
    assert a.length_m == pytest.approx(fitted.length_m)
    assert np.all(np.diff(a.boundaries) > 0)


def _lobe_contrast(curve):
    """Depth of the first minimum beside the main peak, relative to the adjacent side lobe."""
    j = int(np.argmax(curve))
    k = j
    while k + 1 < curve.size and curve[k + 1] <= curve[k]:
        k += 1
    m = k
    while m + 1 < curve.size and curve[m + 1] >= curve[m]:
        m += 1
    return (curve[m] - curve[k]) / (curve[m] + curve[k])


def test_jitter_fills_in_sinc_zeros_through_tabulated_import(fitted):
    """Synthetic 'measured' data from jittered domains, imported as a tabulated |phi|."""
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=6.0, n=161)
    ws, wi = grid.mesh()
    ideal = np.abs(phase_matching_on_grid(fitted, DomainPoling.from_crystal(fitted), ws, wi)) ** 2
    contrasts = []
    for jitter in (0.0, 0.3):
        dom = DomainPoling.from_crystal(fitted, jitter, np.random.default_rng(11))
        inten = np.abs(phase_matching_on_grid(fitted, dom, ws, wi)) ** 2
        tab = TabulatedPhaseMatching.from_intensity(omega_to_nm(grid.signal_omega),
                                                    omega_to_nm(grid.idler_omega),
                                                    inten, "jittered domains")
        assert tab.metadata["amplitude"] == "sqrt(intensity)"
        diag = np.fliplr(tab.evaluate(ws, wi)).diagonal() ** 2
        contrasts.append(_lobe_contrast(diag))
    ideal_contrast = _lobe_contrast(np.fliplr(ideal).diagonal() / ideal.max())
    assert contrasts[0] == pytest.approx(ideal_contrast, abs=1e-3)
    assert contrasts[1] < contrasts[0]


def test_tabulated_phase_matching_import():
    sig = np.array([1581.0, 1580.0, 1579.0])
    idl = np.array([1579.0, 1580.0, 1581.0])
    inten = np.array([[0.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 0.0]])
    tab = TabulatedPhaseMatching.from_intensity(sig, idl, inten, "unit test")
    assert tab.magnitude.max() == 1.0
    center = tab.evaluate(nm_to_omega(1580.0), nm_to_omega(1580.0))
    assert float(center) == pytest.approx(1.0)
    assert float(tab.evaluate(nm_to_omega(1590.0), nm_to_omega(1580.0))) == 0.0
    assert tab.metadata["source"] == "unit test"


# ---------------------------------------------------------------------------
# grid and JSA
# ---------------------------------------------------------------------------

def test_frequency_grid_uniform_in_omega():
    g = FrequencyGrid.from_wavelengths(1580.0, span_nm=10.0, n=101)
    d = np.diff(g.signal_omega)
    assert np.allclose(d, d[0], rtol=1e-9)
    assert g.pump_center == pytest.approx(2 * nm_to_omega(1580.0))
    with pytest.raises(ValueError):
        FrequencyGrid.from_wavelengths(1580.0, n=2000)


def test_joint_spectrum_rejects_nonuniform_axes():
    with pytest.raises(ValueError):
        JointSpectrum(np.array([0.0, 1.0, 3.0]), np.array([0.0, 1.0]), 1.0, 1.0, np.ones((3, 2)))
    with pytest.raises(ValueError):
        JointSpectrum(np.array([0.0, 1.0]), np.array([0.0, 1.0]), 1.0, 1.0, np.ones((3, 2)))


def test_build_jsa_normalisation_and_transpose(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=8.0, n=128)
    pump = GaussianPump(grid.pump_center, bandwidth_nm_to_omega(0.3, 790.0))
    js = build_jsa(pump, fitted, None, grid, normalize=True)
    assert np.sum(jsi(js)) * js.cell_area == pytest.approx(1.0, rel=1e-12)
    t = js.transpose()
    assert np.array_equal(t.amplitude, js.amplitude.T)
    assert np.array_equal(t.signal_omega, js.idler_omega)
    with pytest.raises(ValueError):
        JointSpectrum(js.signal_detuning, js.idler_detuning, 0.0, 0.0, np.zeros((128, 128))).normalize()


def test_build_jsa_is_product_of_pump_and_phase_matching(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=8.0, n=64)
    pump = GaussianPump(grid.pump_center, bandwidth_nm_to_omega(0.5, 790.0))
    js = build_jsa(pump, fitted, UniformPoling.from_crystal(fitted), grid)
    ws, wi = grid.mesh()
    dk = material_mismatch(ws, wi, fitted) + 2 * np.pi / fitted.period_m
    ref = np.exp(-((ws + wi - grid.pump_center) / pump.sigma) ** 2) * np.sinc(dk * fitted.length_m / 2 / np.pi)
    assert np.allclose(js.amplitude.real, ref, atol=1e-12)
    phased = build_jsa(pump, fitted, None, grid, include_phase=True)
    assert np.allclose(np.abs(phased.amplitude), np.abs(js.amplitude), atol=1e-14)
    assert phased.metadata["include_phase"] is True


def test_spdc_rate_scales_jsi(fitted):
    grid = FrequencyGrid.from_wavelengths(1580.0, span_nm=4.0, n=16)
    js = build_jsa(GaussianPump(grid.pump_center, 1e11), fitted, None, grid)
    assert np.allclose(spdc_rate(js, 3.0), 3.0 * jsi(js))
    assert np.allclose(spdc_rate(js, lambda w: np.full_like(w, 2.0)), 2.0 * jsi(js))
