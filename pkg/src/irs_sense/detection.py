"""Delay-spectrum test statistic, false-alarm calibration, and detection.

For one training symbol the receiver forms the auxiliary vector
``f[n] = exp(2j*pi*n*delta_f*tau_0) * y[n] / s[n]`` (the known DFBS-IRS
delay tau_0 is compensated, the unit-modulus symbol divides out) and scans
it over a quantized delay grid:

    Gamma[n_q] = (1/N) |sum_n f[n] exp(2j*pi*n*delta_f*tau_q)|^2,
    tau_q = (n_q / N_Q) / delta_f.

The delay-spectrum peak (DSP) statistic is max_q Gamma[n_q]; it coherently
combines all N subcarriers and therefore carries N times the per-subcarrier
signal-to-noise ratio of the received-signal-strength (RSS) statistic
``sum_n |y[n]|^2``. Under the noise-only hypothesis each spectrum cell is
exponential with mean sigma_0^2, which gives the closed-form false-alarm
threshold of :func:`far_threshold`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class DelaySpectrum:
    """Nonnegative delay scan with its quantized grid.

    Cells at or beyond the unambiguous delay 1/(2 delta_f) are still
    computed but flagged in ``ambiguous``.
    """

    values: np.ndarray
    tau_grid: np.ndarray
    ambiguous: np.ndarray

    @property
    def n_q(self) -> int:
        return self.values.size


def delay_grid(delta_f: float, n_q: int) -> np.ndarray:
    """Quantized delays (n_q / N_Q) / delta_f covering [0, 1/delta_f)."""
    return np.arange(n_q) / (n_q * delta_f)


def delay_spectrum(row: np.ndarray, symbols: np.ndarray, tau_0: float,
                   delta_f: float, n_q: int) -> DelaySpectrum:
    """Delay scan of one received symbol row against its transmit symbols."""
    row = np.asarray(row)
    symbols = np.asarray(symbols)
    if row.shape != symbols.shape:
        raise ValueError("received row and symbol row must have equal length")
    n = row.size
    f = np.exp(2j * np.pi * np.arange(n) * delta_f * tau_0) * row / symbols
    taus = delay_grid(delta_f, n_q)
    # kernel[q, n] = exp(+2j pi n delta_f tau_q)
    kernel = np.exp(2j * np.pi * delta_f * np.outer(taus, np.arange(n)))
    values = np.abs(kernel @ f) ** 2 / n
    return DelaySpectrum(values, taus, taus >= 0.5 / delta_f)


def dsp_statistic(spectrum: DelaySpectrum) -> tuple[float, int]:
    """Peak value and argmax cell; ties resolve to the lowest cell index."""
    if spectrum.values.size == 0:
        raise ValueError("empty delay spectrum")
    idx = int(np.argmax(spectrum.values))
    return float(spectrum.values[idx]), idx


def rss_statistic(row: np.ndarray) -> float:
    """Received signal strength: total power across subcarriers."""
    return float(np.sum(np.abs(np.asarray(row)) ** 2))


def far_threshold(far_target: float, noise_power: float, n_cells: int) -> float:
    """Detection threshold for a target false-alarm rate over n_cells cells.

    ``delta = -sigma_0^2 * ln(1 - (1 - far)**(1/n_cells))``: each cell is
    exponential(mean sigma_0^2) under noise, and the peak exceeds delta when
    any of the cells does. n_cells is the delay-grid size N_Q, which equals
    the subcarrier count in the nominal configuration.
    """
    if not 0.0 < far_target < 1.0:
        raise ValueError(f"far_target must lie in (0, 1), got {far_target}")
    if n_cells < 1:
        raise ValueError("n_cells must be >= 1")
    return float(-noise_power * np.log(1.0 - (1.0 - far_target) ** (1.0 / n_cells)))


def detect(statistic: float, threshold: float) -> bool:
    """Presence decision: strictly above the threshold means present."""
    return statistic > threshold


@dataclass(frozen=True)
class DetectorConfig:
    """Calibrated detector: threshold derived from the false-alarm target."""

    far_target: float
    noise_power: float
    n_cells: int
    threshold: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "threshold",
            far_threshold(self.far_target, self.noise_power, self.n_cells))
