"""End-to-end acceptance checks.

Each test is one numbered criterion with a pinned tolerance and a wall-time
budget, and prints a single verdict line even when pytest captures output.
The checks run the real public surfaces (library calls and the command-line
entry point), never internal shortcuts.
"""

import json
import time

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from rabichain.cli import main
from rabichain.hypercomplex import CirculantMatrix, ProjectorBasis
from rabichain.rabi_dynamics import (
    AmplitudeField,
    SystemConfig,
    evolve_continuum,
    evolve_lattice,
    rabi_frequency,
)
from rabichain.spectra import (
    catalog_diagnostics,
    classify_revival,
    detect_peaks,
    fit_linear_response,
    linearity_scan,
    measure_principal_frequency,
    principal_peak,
    spectrum_of,
)
from rabichain.ssh_band import (
    BranchSelector,
    SSHParams,
    coherence_factors,
    find_dimerization_minima,
    ground_state_energy_elliptic,
    ground_state_energy_integral,
    ground_state_energy_smallz,
    u_from_ratio,
)


class criterion:
    """Times a criterion body, prints one [PASS]/[FAIL] line, enforces the budget."""

    def __init__(self, number, label, budget_s, capsys):
        self.number = number
        self.label = label
        self.budget_s = budget_s
        self.capsys = capsys

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        over = exc_type is None and elapsed > self.budget_s
        verdict = "PASS" if exc_type is None and not over else "FAIL"
        with self.capsys.disabled():
            print(f"[{verdict}] criterion {self.number}: {self.label} "
                  f"({elapsed:.2f}s, budget {self.budget_s:g}s)")
        if over:
            raise RuntimeError(
                f"criterion {self.number} exceeded its wall-time budget: "
                f"{elapsed:.2f}s > {self.budget_s:g}s")
        return False


BAND = SSHParams(t0=2.0, alpha=1.0, K=2.0, a=1.0, N=1)


def test_criterion_1_branch_normalization(capsys):
    with criterion(1, "branch coherence factors stay normalized to 1e-14", 1, capsys):
        rng = np.random.default_rng(20240811)
        k = np.linspace(-np.pi / 2, np.pi / 2, 1001)
        worst = 0.0
        for _ in range(20):
            params = SSHParams(t0=rng.uniform(0.5, 3.0),
                               alpha=rng.uniform(0.2, 2.0),
                               K=rng.uniform(0.5, 5.0))
            ratio = rng.choice([-1, 1]) * rng.uniform(0.05, 0.9)
            u = u_from_ratio(params, ratio)
            kk = k / params.a
            for branch in BranchSelector:
                alpha_k, beta_k = coherence_factors(params, kk, u, branch)
                worst = max(worst, float(np.max(np.abs(alpha_k**2 + beta_k**2 - 1.0))))
        assert worst < 1e-14


def test_criterion_2_groundstate_evaluators_agree(capsys):
    with criterion(2, "closed-form band energy matches quadrature and its "
                      "small-dimerization expansion converges", 5, capsys):
        for ratio in (0.1, 0.3, 0.5, 0.8):
            u = u_from_ratio(BAND, ratio)
            exact = ground_state_energy_elliptic(BAND, u)
            quad = ground_state_energy_integral(BAND, u)
            assert abs(exact - quad) / abs(quad) < 1e-6
        deviations = []
        for ratio in (1e-1, 1e-2, 1e-3):
            u = u_from_ratio(BAND, ratio)
            deviations.append(abs(ground_state_energy_smallz(BAND, u)
                                  - ground_state_energy_elliptic(BAND, u)))
        assert deviations[0] > deviations[1] > deviations[2] > 0.0


def test_criterion_3_double_well(capsys):
    with criterion(3, "soft lattice dimerizes into a symmetric double well, "
                      "stiff lattice does not", 5, capsys):
        res = find_dimerization_minima(BAND, u_max=0.45)
        assert res.dimerized
        assert res.u_plus > 0
        assert res.u_minus == -res.u_plus
        assert res.energy < ground_state_energy_elliptic(BAND, 0.0)
        # independent oracle: dense scan of the same energy surface
        grid = np.linspace(0.0, 0.45, 2001)
        energies = [ground_state_energy_elliptic(BAND, u) for u in grid]
        i_min = int(np.argmin(energies))
        assert abs(res.u_plus - grid[i_min]) <= grid[1] - grid[0]
        stiff = SSHParams(t0=2.0, alpha=1.0, K=1e6)
        assert not find_dimerization_minima(stiff, u_max=0.45).dimerized


def test_criterion_4_circulant_components(capsys):
    with criterion(4, "circulant spectra match dense eigensolves and the "
                      "projector family resolves the identity", 5, capsys):
        rng = np.random.default_rng(99)
        for _ in range(100):
            n = int(rng.integers(1, 9))
            row = rng.normal(size=n) + 1j * rng.normal(size=n)
            circ = CirculantMatrix(row)
            mine = circ.eigenvalues()
            dense = np.linalg.eigvals(circ.dense())
            cost = np.abs(mine[:, None] - dense[None, :])
            ri, ci = linear_sum_assignment(cost)
            assert cost[ri, ci].max() < 1e-10
        for n in range(1, 9):
            basis = ProjectorBasis(n)
            total = np.zeros((n, n), dtype=complex)
            for i in range(n):
                p = basis[i].to_circulant().dense()
                assert np.max(np.abs(p @ p - p)) < 1e-14
                for j in range(i + 1, n):
                    q = basis[j].to_circulant().dense()
                    assert np.max(np.abs(p @ q)) < 1e-14
                total += p
            assert np.max(np.abs(total - np.eye(n))) < 1e-14


def test_criterion_5_single_site_lines(capsys):
    with criterion(5, "single-site spectra sit at 2g*sqrt(l+1) and scale with "
                      "the square root of the photon number", 30, capsys):
        g = 0.1
        measured = {}
        for l in range(9):
            cfg = SystemConfig(n_chains=1, n_sites=1, omega0=1.0, omega=1.0,
                               g=g, lam=0.0, l_photons=l, k_wave=0.0, a=1.0,
                               xi1=(0.0,), xi2=(0.0,))
            omega_r = rabi_frequency(cfg)
            res = evolve_lattice(cfg, AmplitudeField(a=[[1.0]], b=[[0.0]]),
                                 t_end=20 * 2 * np.pi / omega_r, dt=0.05,
                                 record_every=4)
            spec = spectrum_of(res.trace, pad_factor=8)
            measured[l] = principal_peak(spec, prominence_frac=0.1).omega
        for l in (0, 1, 4):
            expected = 2 * g * np.sqrt(l + 1.0)
            assert abs(measured[l] - expected) / expected < 1e-3
        fit = fit_linear_response(np.log(np.arange(9) + 1.0),
                                  np.log([measured[l] for l in range(9)]))
        assert abs(fit.slope - 0.5) < 0.01


NORM_XI1 = (0.05, 0.02, 0.02)
NORM_XI2 = (0.03, 0.01, 0.01)


def test_criterion_6_norm_and_decay(capsys):
    with criterion(6, "three-chain norm is conserved to 1e-8 over twenty "
                      "cycles and damping follows exp(-lambda t)", 60, capsys):
        cfg = SystemConfig(n_chains=3, n_sites=64, omega0=1.0, omega=1.0,
                           g=0.1, lam=0.0, l_photons=0, k_wave=0.05, a=1.0,
                           xi1=NORM_XI1, xi2=NORM_XI2)
        init = AmplitudeField.gaussian_packet(cfg, sigma=4.0)
        horizon = 20 * 2 * np.pi / rabi_frequency(cfg)
        res = evolve_lattice(cfg, init, t_end=horizon, dt=0.01, record_every=50)
        assert abs(res.final.norm() - 1.0) < 1e-8

        lam, t_end = 0.01, 200.0
        damped = SystemConfig(n_chains=3, n_sites=64, omega0=1.0, omega=1.0,
                              g=0.1, lam=lam, l_photons=0, k_wave=0.05, a=1.0,
                              xi1=NORM_XI1, xi2=NORM_XI2)
        resd = evolve_lattice(damped, init, t_end=t_end, dt=0.01, record_every=50)
        expected = np.exp(-lam * t_end)
        assert abs(resd.final.norm() - expected) / expected < 1e-8


def test_criterion_7_lattice_continuum_agreement(capsys):
    with criterion(7, "lattice integration reproduces the analytic continuum "
                      "fields to L2 1e-2", 120, capsys):
        cfg1 = SystemConfig(n_chains=1, n_sites=512, omega0=1.0, omega=1.0,
                            g=0.1, lam=0.0, l_photons=0, k_wave=0.05, a=1.0,
                            xi1=(0.1,), xi2=(0.05,))
        init1 = AmplitudeField.gaussian_packet(cfg1, sigma=12.0)
        period = 2 * np.pi / rabi_frequency(cfg1)
        for cfg, init in [
            (cfg1, init1),
            (SystemConfig(n_chains=3, n_sites=128, omega0=1.0, omega=1.0,
                          g=0.1, lam=0.0, l_photons=0, k_wave=0.05, a=1.0,
                          xi1=(0.1, 0.03, 0.03), xi2=(0.05, 0.0, 0.0)), None),
        ]:
            if init is None:
                init = AmplitudeField.gaussian_packet(cfg, sigma=8.0, chain=1)
            lat = evolve_lattice(cfg, init, t_end=period, dt=0.01)
            con = evolve_continuum(cfg, init, [period])
            l2 = np.sqrt(np.sum(np.abs(lat.final.a - con.a[0]) ** 2
                                + np.abs(lat.final.b - con.b[0]) ** 2))
            assert l2 < 1e-2


def test_criterion_8_revival_and_linear_response(capsys):
    with criterion(8, "narrow packets grow a revival line above the principal "
                      "line, whose frequency is linear in g", 120, capsys):
        cfg = SystemConfig(n_chains=3, n_sites=64, omega0=1.0, omega=1.0,
                           g=0.1, lam=0.0, l_photons=0, k_wave=0.05, a=1.0,
                           xi1=(0.22, 0.03, 0.03), xi2=(0.02, 0.0, 0.0))
        init = AmplitudeField.gaussian_packet(cfg, sigma=1.5, k0=np.pi / 2)
        res = evolve_lattice(cfg, init, t_end=800.0, dt=0.02, record_every=4)
        spec = spectrum_of(res.trace, pad_factor=8)
        peaks = detect_peaks(spec, prominence_frac=0.02, min_separation=0.02)
        report = classify_revival(peaks, rabi_frequency(cfg), window_frac=0.2)
        assert report.found
        assert abs(report.principal.omega / report.fundamental - 1.0) <= 0.2
        assert len(report.revivals) >= 1

        from functools import partial
        sweep_cfg = SystemConfig(n_chains=1, n_sites=128, omega0=1.0,
                                 omega=1.0, g=0.1, lam=0.0, l_photons=0,
                                 k_wave=0.05, a=1.0, xi1=(0.22,), xi2=(0.02,))
        measure = partial(measure_principal_frequency, sweep_cfg, sigma=1.5,
                          k0=np.pi / 2, t_end=600.0, dt=0.02, record_every=2,
                          pad_factor=8, prominence_frac=0.1)
        sweep = linearity_scan((0.08, 0.10, 0.12, 0.14, 0.16), measure)
        assert sweep.failures == ()
        assert sweep.fit.r_squared > 0.999
        assert abs(sweep.fit.slope - 2.0) < 0.02


def test_criterion_9_catalog_arithmetic(capsys):
    with criterion(9, "bundled catalog ratios, splittings and shifts are "
                      "arithmetically consistent as quoted", 1, capsys):
        d = catalog_diagnostics()
        assert len(d.computed_ratios) == 2
        for comp, quoted in zip(d.computed_ratios, d.quoted_ratios):
            assert abs(comp - quoted) <= d.ratio_uncertainty
        assert d.computed_splittings == pytest.approx((335.3, 287.2), abs=1e-9)
        assert abs(d.computed_average_splitting
                   - d.quoted_average_splitting) <= 0.05 + 1e-9
        assert len(d.computed_shifts) == 3
        for comp, quoted, tol in zip(d.computed_shifts, d.quoted_shifts,
                                     d.shift_tolerances):
            assert abs(comp - quoted) <= tol


def test_criterion_10_deterministic_output(capsys, tmp_path):
    with criterion(10, "repeated command-line runs write byte-identical "
                       "delimited output", 30, capsys):
        band_args = ["band", "--t0", "2", "--alpha", "1", "--stiffness", "2",
                     "--u", "0.2", "--num-k", "128"]
        b1, b2 = tmp_path / "b1.csv", tmp_path / "b2.csv"
        assert main(band_args + ["--output", str(b1)]) == 0
        assert main(band_args + ["--output", str(b2)]) == 0
        assert b1.read_bytes() == b2.read_bytes()

        cfg = {"system": {"n_chains": 2, "n_sites": 16, "omega0": 1.0,
                          "omega": 1.0, "g": 0.2, "lambda": 0.0,
                          "l_photons": 0, "k_wave": 0.0,
                          "xi1": [0.1, 0.02], "xi2": [0.05, 0.01]},
               "initial": {"sigma": 2.0},
               "analysis": {"t_end": 40.0, "dt": 0.05}}
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps(cfg))
        t1, t2 = tmp_path / "t1.csv", tmp_path / "t2.csv"
        assert main(["evolve", "--config", str(cfg_path), "--output", str(t1)]) == 0
        assert main(["evolve", "--config", str(cfg_path), "--output", str(t2)]) == 0
        assert t1.read_bytes() == t2.read_bytes()

        s1, s2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        for out in (s1, s2):
            assert main(["spectrum", "--input", str(t1), "--prominence", "0.1",
                         "--output", str(out)]) == 0
        assert s1.read_bytes() == s2.read_bytes()
