import math

import numpy as np
import pytest
from scipy import stats

from irs_sense.detection import (DelaySpectrum, DetectorConfig, delay_spectrum,
                                 detect, dsp_statistic, far_threshold,
                                 rss_statistic)

RNG = np.random.default_rng(23)


def make_target_row(n, tau, delta_f, amp, symbols, tau_0=0.0):
    phase = np.exp(-2j * np.pi * np.arange(n) * delta_f * (tau_0 + tau))
    return amp * phase * symbols


def test_peak_on_grid_target():
    n = n_q = 64
    delta_f = 120e3
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    k = 9
    tau = k / (n_q * delta_f)
    amp = 2.0  # sqrt(p) * alpha
    row = make_target_row(n, tau, delta_f, amp, symbols)
    spec = delay_spectrum(row, symbols, 0.0, delta_f, n_q)
    peak, idx = dsp_statistic(spec)
    assert idx == k
    assert peak == pytest.approx(n * amp ** 2, rel=1e-9)


def test_tau0_compensation():
    n = n_q = 32
    delta_f = 120e3
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    tau_0 = 1.7e-7
    k = 5
    tau = k / (n_q * delta_f)
    row = make_target_row(n, tau, delta_f, 1.0, symbols, tau_0=tau_0)
    spec = delay_spectrum(row, symbols, tau_0, delta_f, n_q)
    _, idx = dsp_statistic(spec)
    assert idx == k


def test_all_zero_input():
    n = 16
    spec = delay_spectrum(np.zeros(n), np.ones(n), 0.0, 120e3, 16)
    assert np.all(spec.values == 0.0)


def test_noise_bins_are_exponential():
    # each cell ~ Exp(mean sigma0^2) under noise; KS test on one fixed cell
    n, n_q = 64, 64
    delta_f = 120e3
    sigma2 = 1.3
    draws = np.empty(2000)
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    for t in range(draws.size):
        z = math.sqrt(sigma2 / 2) * (RNG.standard_normal(n)
                                     + 1j * RNG.standard_normal(n))
        spec = delay_spectrum(z, symbols, 0.0, delta_f, n_q)
        draws[t] = spec.values[17]
    assert stats.kstest(draws, "expon", args=(0, sigma2)).pvalue > 0.01
    assert np.mean(draws) == pytest.approx(sigma2, rel=0.1)


def test_noise_bin_moments():
    # moment matching across all cells: mean within 3%, variance within 10%
    n, n_q = 64, 64
    delta_f = 120e3
    sigma2 = 1.0
    vals = []
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    for t in range(1600):
        z = math.sqrt(sigma2 / 2) * (RNG.standard_normal(n)
                                     + 1j * RNG.standard_normal(n))
        spec = delay_spectrum(z, symbols, 0.0, delta_f, n_q)
        vals.append(spec.values)
    vals = np.concatenate(vals)
    assert np.mean(vals) == pytest.approx(sigma2, rel=0.03)
    assert np.var(vals) == pytest.approx(sigma2 ** 2, rel=0.10)


def test_dsp_statistic_tie_break():
    spec = DelaySpectrum(np.array([1.0, 3.0, 2.0]), np.arange(3.0), np.zeros(3, bool))
    assert dsp_statistic(spec) == (3.0, 1)
    flat = DelaySpectrum(np.ones(4), np.arange(4.0), np.zeros(4, bool))
    assert dsp_statistic(flat)[1] == 0


def test_dsp_invariant_to_global_phase():
    n = n_q = 32
    delta_f = 120e3
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    row = make_target_row(n, 2e-7, delta_f, 1.0, symbols) \
        + 0.1 * (RNG.standard_normal(n) + 1j * RNG.standard_normal(n))
    s1 = delay_spectrum(row, symbols, 0.0, delta_f, n_q).values
    s2 = delay_spectrum(row * np.exp(1j * 1.234), symbols, 0.0, delta_f, n_q).values
    assert np.allclose(s1, s2)


def test_rss_values():
    assert rss_statistic(np.ones(4)) == pytest.approx(4.0)
    n = 32
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    row = make_target_row(n, 1e-7, 120e3, 3.0, symbols)
    assert rss_statistic(row) == pytest.approx(n * 9.0, rel=1e-12)


def test_rss_noise_mean():
    n = 64
    sigma2 = 2.0
    vals = [rss_statistic(math.sqrt(sigma2 / 2) * (RNG.standard_normal(n)
                                                   + 1j * RNG.standard_normal(n)))
            for _ in range(4000)]
    mean = np.mean(vals)
    se = np.std(vals) / math.sqrt(len(vals))
    assert abs(mean - n * sigma2) < 3 * se + 1e-9


def test_far_threshold_values():
    assert far_threshold(0.01, 1.0, 1) == pytest.approx(-math.log(0.01))
    assert far_threshold(0.1, 1.0, 1) == pytest.approx(2.302585, rel=1e-6)
    # N = 833 case evaluates to 11.3252 (spec quotes ~11.33)
    assert far_threshold(0.01, 1.0, 833) == pytest.approx(11.32519, abs=2e-4)


def test_far_threshold_monotonic():
    assert far_threshold(0.02, 1.0, 64) < far_threshold(0.01, 1.0, 64)
    assert far_threshold(0.01, 1.0, 128) > far_threshold(0.01, 1.0, 64)


def test_far_threshold_domain():
    with pytest.raises(ValueError):
        far_threshold(0.0, 1.0, 64)
    with pytest.raises(ValueError):
        far_threshold(1.0, 1.0, 64)


def test_detect_boundary_uses_strict_inequality():
    assert detect(5.0, 4.6) is True
    assert detect(4.6, 4.6) is False


def test_detector_config_threshold():
    det = DetectorConfig(far_target=0.01, noise_power=2.0, n_cells=64)
    assert det.threshold == pytest.approx(far_threshold(0.01, 2.0, 64))


def test_per_cell_far_matches_exponential_formula():
    # p_far = exp(-delta / sigma0^2) per cell, within 3 binomial sigmas
    n = n_q = 32
    delta_f = 120e3
    sigma2 = 1.0
    delta = 2.0
    p_expect = math.exp(-delta / sigma2)
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    trials = 3000
    hits = 0
    for _ in range(trials):
        z = math.sqrt(sigma2 / 2) * (RNG.standard_normal(n)
                                     + 1j * RNG.standard_normal(n))
        spec = delay_spectrum(z, symbols, 0.0, delta_f, n_q)
        hits += spec.values[11] > delta
    p_hat = hits / trials
    sd = math.sqrt(p_expect * (1 - p_expect) / trials)
    assert abs(p_hat - p_expect) < 3 * sd


def test_ambiguous_cells_flagged():
    spec = delay_spectrum(np.ones(16), np.ones(16), 0.0, 120e3, 16)
    # cells at tau >= 1/(2 delta_f) are the second half of the grid
    assert np.array_equal(spec.ambiguous, spec.tau_grid >= 0.5 / 120e3)
    assert spec.ambiguous.sum() == 8


def test_proposition1_noiseless_equality():
    # uniform power, on-grid noiseless target: DSP peak equals RSS
    n = n_q = 64
    delta_f = 120e3
    symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
    amp = 1.7
    row = make_target_row(n, 12 / (n_q * delta_f), delta_f, amp, symbols)
    spec = delay_spectrum(row, symbols, 0.0, delta_f, n_q)
    assert dsp_statistic(spec)[0] == pytest.approx(rss_statistic(row), rel=1e-9)
    assert dsp_statistic(spec)[0] == pytest.approx(n * amp ** 2, rel=1e-9)


def test_statistic_snr_ratio_near_n():
    # measured statistic SNRs: (mean under H1 - mean under H0) / mean under
    # H0, the delay-spectrum one read at the true delay cell
    n = n_q = 64
    delta_f = 120e3
    sigma2 = 1.0
    amp = 1.0  # per-subcarrier snr = 1
    k = 21
    tau = k / (n_q * delta_f)
    trials = 400
    dsp_h1 = np.empty(trials)
    dsp_h0 = np.empty(trials)
    rss_h1 = np.empty(trials)
    rss_h0 = np.empty(trials)
    for t in range(trials):
        symbols = np.exp(1j * RNG.uniform(0, 2 * np.pi, n))
        noise = math.sqrt(sigma2 / 2) * (RNG.standard_normal(n)
                                         + 1j * RNG.standard_normal(n))
        sig = make_target_row(n, tau, delta_f, amp, symbols)
        dsp_h1[t] = delay_spectrum(sig + noise, symbols, 0.0, delta_f, n_q).values[k]
        dsp_h0[t] = delay_spectrum(noise, symbols, 0.0, delta_f, n_q).values[k]
        rss_h1[t] = rss_statistic(sig + noise)
        rss_h0[t] = rss_statistic(noise)
    snr_dsp = (dsp_h1.mean() - dsp_h0.mean()) / dsp_h0.mean()
    snr_rss = (rss_h1.mean() - rss_h0.mean()) / rss_h0.mean()
    ratio = snr_dsp / snr_rss
    assert n / 2 <= ratio <= 2 * n
