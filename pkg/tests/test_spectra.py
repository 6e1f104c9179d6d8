"""Signal-analysis checks: FFT line estimation against known tones,
classification logic on hand-built peak sets, and the bundled catalog's
internal arithmetic."""

import numpy as np
import pytest

from rabichain.rabi_dynamics import SystemConfig
from rabichain.spectra import (
    CatalogEntry,
    CatalogLine,
    DegenerateFitError,
    NonUniformGridError,
    Peak,
    PeakNotFoundError,
    catalog_diagnostics,
    classify_revival,
    compare_catalog,
    detect_peaks,
    fit_linear_response,
    linearity_scan,
    load_catalog,
    measure_principal_frequency,
    principal_peak,
    spectrum_of,
)


def tone(omega, amp, t):
    return amp * np.cos(omega * t)


class TestSpectrumEstimation:
    T = np.arange(512) * 0.05

    def test_single_tone_position_and_height(self):
        w0, amp = 1.3, 0.7
        spec = spectrum_of(self.T, tone(w0, amp, self.T), pad_factor=4)
        pk = principal_peak(spec)
        assert abs(pk.omega - w0) < spec.domega
        assert pk.height == pytest.approx(amp, rel=0.02)

    def test_two_tones_resolved(self):
        y = tone(1.0, 1.0, self.T) + tone(1.6, 0.5, self.T)
        spec = spectrum_of(self.T, y, pad_factor=4)
        peaks = detect_peaks(spec, prominence_frac=0.1)
        assert len(peaks) == 2
        assert abs(peaks[0].omega - 1.0) < spec.domega
        assert abs(peaks[1].omega - 1.6) < spec.domega
        assert peaks[0].height > peaks[1].height

    def test_min_separation_keeps_tallest(self):
        y = tone(1.0, 1.0, self.T) + tone(1.6, 0.5, self.T)
        spec = spectrum_of(self.T, y, pad_factor=4)
        peaks = detect_peaks(spec, prominence_frac=0.1, min_separation=1.0)
        assert len(peaks) == 1
        assert abs(peaks[0].omega - 1.0) < spec.domega

    def test_prominence_floor_hides_weak_tone(self):
        y = tone(1.0, 1.0, self.T) + tone(1.6, 0.03, self.T)
        spec = spectrum_of(self.T, y, pad_factor=4)
        assert len(detect_peaks(spec, prominence_frac=0.1)) == 1
        assert len(detect_peaks(spec, prominence_frac=0.01)) == 2

    def test_refinement_beats_bin_quantization(self):
        # land the tone deliberately between bins
        spec0 = spectrum_of(self.T, tone(1.0, 1.0, self.T), pad_factor=4)
        w0 = 1.0 + 0.4 * spec0.domega
        spec = spectrum_of(self.T, tone(w0, 1.0, self.T), pad_factor=4)
        refined = detect_peaks(spec)[0].omega
        raw = detect_peaks(spec, refine=False)[0].omega
        assert abs(refined - w0) < abs(raw - w0)
        assert abs(refined - w0) < 0.2 * spec.domega

    def test_input_validation(self):
        with pytest.raises(ValueError, match="at least"):
            spectrum_of(self.T[:32], np.ones(32))
        ragged = np.concatenate([self.T[:300], self.T[300:] + 0.01])
        with pytest.raises(NonUniformGridError):
            spectrum_of(ragged, np.ones_like(ragged))
        with pytest.raises(ValueError, match="window"):
            spectrum_of(self.T, np.ones_like(self.T), window="hamming")
        with pytest.raises(ValueError, match="pad_factor"):
            spectrum_of(self.T, np.ones_like(self.T), pad_factor=0)
        with pytest.raises(TypeError):
            spectrum_of(object())
        with pytest.raises(PeakNotFoundError):
            principal_peak(spectrum_of(self.T, np.zeros_like(self.T)))


def mkpeak(omega, height):
    return Peak(omega=omega, height=height, fwhm=0.01, prominence=height)


class TestRevivalClassification:
    PEAKS = (mkpeak(0.2, 1.0), mkpeak(0.31, 0.2), mkpeak(0.05, 0.1))

    def test_principal_and_revival_split(self):
        rep = classify_revival(self.PEAKS, fundamental=0.2)
        assert rep.found
        assert rep.principal.omega == 0.2
        assert [p.omega for p in rep.revivals] == [0.31]
        assert [p.omega for p in rep.others] == [0.05]
        assert rep.revival_found

    def test_tallest_in_window_wins(self):
        peaks = (mkpeak(0.19, 0.5), mkpeak(0.22, 0.9))
        rep = classify_revival(peaks, fundamental=0.2)
        assert rep.principal.omega == 0.22

    def test_missing_principal_reported_not_raised(self):
        rep = classify_revival(self.PEAKS, fundamental=1.0)
        assert not rep.found
        assert rep.principal is None
        assert "no line within" in rep.message

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            classify_revival(self.PEAKS, fundamental=0.0)
        with pytest.raises(ValueError):
            classify_revival(self.PEAKS, fundamental=0.2, window_frac=1.5)


class TestCatalog:
    def test_load_shape(self):
        cat = load_catalog()
        assert cat.units == "cm^-1"
        assert len(cat["cu_unimplanted_side"].lines) == 6
        assert cat["cu_unimplanted_side"].broad_line.center == 1160.0
        assert cat["boron_implanted"].diamond_line.uncertainty == 0.1

    def test_quoted_ratios_reproduced(self):
        d = catalog_diagnostics()
        assert d.computed_ratios == pytest.approx((2022.3 / 1757.0, 1779.5 / 1569.0))
        for comp, quoted in zip(d.computed_ratios, d.quoted_ratios):
            assert abs(comp - quoted) <= d.ratio_uncertainty

    def test_quoted_splittings_reproduced(self):
        d = catalog_diagnostics()
        assert d.computed_splittings == pytest.approx((335.3, 287.2), abs=1e-9)
        assert d.computed_average_splitting == pytest.approx(
            d.quoted_average_splitting, abs=0.0501)

    def test_quoted_shifts_within_pair_uncertainty(self):
        d = catalog_diagnostics()
        assert d.computed_shifts == pytest.approx((2.7, 7.0, 11.3), abs=1e-9)
        assert len(d.quoted_shifts) == 3
        for comp, quoted, tol in zip(d.computed_shifts, d.quoted_shifts,
                                     d.shift_tolerances):
            assert abs(comp - quoted) <= tol

    def test_compare_catalog_matches_all_when_exact(self):
        entry = load_catalog()["cu_unimplanted_side"]
        peaks = tuple(mkpeak(l.center, 1.0) for l in entry.lines)
        rep = compare_catalog(peaks, entry)
        assert rep.match_fraction() == 1.0
        assert rep.unmatched_peaks == ()
        assert all(m.delta == 0.0 for m in rep.matched)

    def test_compare_catalog_leftovers(self):
        entry = load_catalog()["cu_unimplanted_side"]
        peaks = tuple(mkpeak(l.center, 1.0) for l in entry.lines[:-1])
        peaks += (mkpeak(5000.0, 1.0),)
        rep = compare_catalog(peaks, entry)
        assert [l.center for l in rep.unmatched_lines] == [1757.0]
        assert rep.unmatched_peaks == (5000.0,)

    def test_compare_catalog_tie_goes_low(self):
        entry = CatalogEntry(name="synthetic",
                             lines=(CatalogLine(99.0, 2.0), CatalogLine(101.0, 2.0)))
        rep = compare_catalog((mkpeak(100.0, 1.0),), entry)
        assert len(rep.matched) == 1
        assert rep.matched[0].line.center == 99.0

    def test_compare_catalog_scale_validation(self):
        entry = load_catalog()["cu_implanted_side"]
        with pytest.raises(ValueError):
            compare_catalog((), entry, scale=0.0)


class TestLinearResponse:
    def test_exact_line_fit(self):
        fit = fit_linear_response([1, 2, 3, 4], [2.5, 4.5, 6.5, 8.5])
        assert fit.slope == pytest.approx(2.0)
        assert fit.intercept == pytest.approx(0.5)
        assert fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_fits_raise(self):
        with pytest.raises(DegenerateFitError):
            fit_linear_response([1.0], [2.0])
        with pytest.raises(DegenerateFitError):
            fit_linear_response([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
        with pytest.raises(DegenerateFitError):
            fit_linear_response([1.0, 2.0, 3.0], [5.0, 5.0, 5.0])

    def test_scan_with_partial_failures(self):
        def measure(g):
            if g == 0.3:
                raise PeakNotFoundError("lost it")
            return 2.0 * g + 0.05

        report = linearity_scan([0.1, 0.2, 0.3, 0.4, 0.5], measure)
        assert report.failures == ((0.3, "lost it"),)
        assert np.isnan(report.omegas[2])
        assert report.fit.slope == pytest.approx(2.0)
        assert report.fit.r_squared == pytest.approx(1.0, abs=1e-12)

    def test_scan_validation(self):
        with pytest.raises(ValueError, match="at least 4"):
            linearity_scan([0.1, 0.2], lambda g: g)

        def always_fails(g):
            raise PeakNotFoundError("nope")

        with pytest.raises(DegenerateFitError):
            linearity_scan([0.1, 0.2, 0.3, 0.4], always_fails)

    def test_measured_frequency_tracks_coupling(self):
        cfg = SystemConfig(n_chains=1, n_sites=1, omega0=1.0, omega=1.0, g=0.5,
                           lam=0.0, l_photons=0, k_wave=0.0, a=1.0,
                           xi1=(0.0,), xi2=(0.0,))
        kwargs = dict(sigma=1.0, k0=0.0, t_end=10 * 2 * np.pi, dt=0.01,
                      record_every=4)
        w1 = measure_principal_frequency(cfg, **kwargs)
        assert w1 == pytest.approx(2 * 0.5, rel=1e-3)
        w2 = measure_principal_frequency(cfg, 0.4, **kwargs)
        assert w2 == pytest.approx(2 * 0.4, rel=1e-3)
