"""Frequency-domain OFDM echo synthesis for the IRS-reflected target return.

The model works entirely on the post-FFT symbol grid. For a target at
two-way IRS delay tau (and two-way DFBS-IRS delay tau_0), the combined
received symbol on subcarrier n of OFDM symbol l is

    y[n, l] = sqrt(p) * N_B * alpha_G * a_r2g^2 * a_b2r^2 * h_xi(l)^2
              * exp(-2j*pi*f_n*(tau_0 + tau)) * exp(2j*pi*l*T_O*f_D)
              * s[n, l] + n[n, l],

which is what the full matrix chain (transmit beamformer, DFBS-IRS channel,
IRS reflection, IRS-target skip there and back, receive combiner) collapses
to when both beamformers are the matched DFBS response. ``h_xi`` is the
one-bounce IRS coupling of :func:`irs_sense.channel.cascade_gain`; it enters
squared because the echo crosses the surface twice. The combined noise has
variance ``noise_power`` exactly because the combiner has unit norm.

Randomness is drawn from counter-based Philox streams keyed by
(seed, symbol index, purpose), so any subset of symbols can be synthesized
in any order, serially or in parallel, with bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (C, ArrayConfig, PathModel, ScenarioGeometry, TargetState,
                      cascade_gain, steering_ula)

_TAG_SYMBOLS = 0
_TAG_NOISE = 1
_TAG_SCENE = 2


def stream(seed: int, symbol: int, tag: int) -> np.random.Generator:
    """Independent Philox stream for one (seed, symbol, purpose) triple."""
    key = [np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(symbol)]
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, tag]))


@dataclass(frozen=True)
class WaveformConfig:
    """OFDM numerology, CPI split, and power levels (linear units)."""

    f_c: float                 # carrier frequency, Hz
    delta_f: float             # subcarrier spacing, Hz
    n_sc: int                  # number of subcarriers N
    t_cp: float                # cyclic prefix duration, s
    t_cg: int                  # coarse-grained sensing symbols
    t_fg: int                  # fine-grained sensing symbols
    noise_power: float         # combined noise variance sigma_0^2
    power_per_sc: float        # per-subcarrier transmit power p_T

    def __post_init__(self):
        if self.n_sc < 1:
            raise ValueError("n_sc must be >= 1")
        if self.power_per_sc <= 0.0:
            raise ValueError("power_per_sc must be positive")
        if self.noise_power < 0.0:
            raise ValueError("noise_power must be nonnegative")
        if self.delta_f <= 0.0 or self.t_cp < 0.0:
            raise ValueError("invalid numerology")

    @property
    def t_o(self) -> float:
        """OFDM symbol duration 1/delta_f + t_cp."""
        return 1.0 / self.delta_f + self.t_cp

    @property
    def t_cpi(self) -> int:
        return self.t_cg + self.t_fg

    @property
    def wavelength(self) -> float:
        return C / self.f_c

    @property
    def tau_max(self) -> float:
        """Maximum unambiguous two-way delay 1/(2 delta_f)."""
        return 0.5 / self.delta_f

    @property
    def doppler_max(self) -> float:
        """Maximum unambiguous Doppler 1/(2 T_O)."""
        return 0.5 / self.t_o

    def subcarrier_freqs(self) -> np.ndarray:
        return self.f_c + self.delta_f * np.arange(self.n_sc)


@dataclass(frozen=True)
class SymbolGrid:
    """Unit-modulus transmit symbols, one column per OFDM symbol."""

    s: np.ndarray

    def __post_init__(self):
        if not np.allclose(np.abs(self.s), 1.0, atol=1e-12):
            raise ValueError("transmit symbols must be unit modulus")


def symbol_row(wave: WaveformConfig, seed: int, l: int) -> np.ndarray:
    """Transmit symbols of OFDM symbol l: random phases, unit modulus."""
    phases = stream(seed, l, _TAG_SYMBOLS).uniform(0.0, 2.0 * np.pi, wave.n_sc)
    return np.exp(1j * phases)


def noise_row(wave: WaveformConfig, seed: int, l: int) -> np.ndarray:
    """Combined receiver noise of symbol l, complex Gaussian, var sigma_0^2."""
    g = stream(seed, l, _TAG_NOISE).standard_normal(2 * wave.n_sc)
    scale = math.sqrt(wave.noise_power / 2.0)
    return scale * (g[::2] + 1j * g[1::2])


def gen_symbols(wave: WaveformConfig, seed: int, n_symbols: int | None = None) -> SymbolGrid:
    """Full symbol grid for one CPI; column l equals :func:`symbol_row`."""
    n = wave.t_cpi if n_symbols is None else n_symbols
    return SymbolGrid(np.stack([symbol_row(wave, seed, l) for l in range(n)], axis=1))


def dfbs_beamformers(geometry: ScenarioGeometry, array: ArrayConfig) -> tuple[np.ndarray, np.ndarray]:
    """Matched unit-norm transmit/receive beamformers pointing at the IRS."""
    w = steering_ula(array.n_b, geometry.u_b2r_d) / math.sqrt(array.n_b)
    return w, w


@dataclass(frozen=True)
class EchoTruth:
    """Ground truth that generated an echo grid."""

    tau_0: float
    taus: tuple[float, ...]
    dopplers: tuple[float, ...]
    rcs: tuple[complex, ...]
    directions: tuple[tuple[float, float], ...]
    xi_schedule: np.ndarray | None = None


@dataclass(frozen=True)
class EchoGrid:
    """Received symbols (n_sc x n_symbols) with matching transmit symbols."""

    y: np.ndarray
    symbols: np.ndarray
    symbol_indices: np.ndarray
    truth: EchoTruth


class EchoSimulator:
    """Synthesizes combined echo rows for chosen IRS beams and symbol slots.

    Parameters
    ----------
    wave, array, path_model : scenario building blocks.
    targets : sequence of (ScenarioGeometry, TargetState)
        One entry per target; all entries must share the DFBS-IRS link.
        An empty sequence gives the target-absent (noise-only) channel.
    geometry0 : ScenarioGeometry, optional
        Supplies the DFBS-IRS link when ``targets`` is empty.
    seed : int
        Master seed of the per-symbol random streams.
    """

    def __init__(self, wave: WaveformConfig, array: ArrayConfig,
                 path_model: PathModel, targets, seed: int,
                 geometry0: ScenarioGeometry | None = None):
        from .channel import path_gain  # local import keeps module load light

        self.wave = wave
        self.array = array
        self.seed = seed
        self.targets = list(targets)
        base = self.targets[0][0] if self.targets else geometry0
        if base is None:
            raise ValueError("need geometry0 when no targets are present")
        for geom, _ in self.targets[1:]:
            if not math.isclose(geom.d_b2r, base.d_b2r, rel_tol=1e-12):
                raise ValueError("all targets must share the DFBS-IRS link")
        self.geometry0 = base
        self.tau_0 = 2.0 * base.d_b2r / C
        self._freqs = wave.subcarrier_freqs()
        self._amps = []
        for geom, tgt in self.targets:
            a_b2r = path_gain(geom.d_b2r, path_model.eps_b2r, path_model)
            a_r2g = path_gain(geom.d_r2g, path_model.eps_r2g, path_model)
            amp = array.n_b * tgt.rcs_sample * a_r2g ** 2 * a_b2r ** 2
            tau = 2.0 * geom.d_r2g / C
            self._amps.append((amp, tau, tgt.doppler, geom))

    def probe(self, xi: np.ndarray, l: int, *, noiseless: bool = False):
        """Echo row and transmit symbols for IRS beam ``xi`` on symbol l."""
        s = symbol_row(self.wave, self.seed, l)
        y = np.zeros(self.wave.n_sc, dtype=complex)
        p = math.sqrt(self.wave.power_per_sc)
        for amp, tau, f_d, geom in self._amps:
            h = cascade_gain(xi, geom)
            phase = np.exp(-2j * np.pi * self._freqs * (self.tau_0 + tau))
            y += p * amp * h * h * phase * np.exp(2j * np.pi * l * self.wave.t_o * f_d) * s
        if not noiseless and self.wave.noise_power > 0.0:
            y = y + noise_row(self.wave, self.seed, l)
        return y, s

    def grid(self, xi_schedule, start_symbol: int = 0, *, noiseless: bool = False) -> EchoGrid:
        """Echo grid for a run of symbols with one IRS beam per symbol."""
        xi_schedule = np.asarray(xi_schedule)
        n_sym = xi_schedule.shape[0]
        idx = np.arange(start_symbol, start_symbol + n_sym)
        ys, ss = [], []
        for col, l in enumerate(idx):
            y, s = self.probe(xi_schedule[col], int(l), noiseless=noiseless)
            ys.append(y)
            ss.append(s)
        truth = EchoTruth(
            tau_0=self.tau_0,
            taus=tuple(t for _, t, _, _ in self._amps),
            dopplers=tuple(d for _, _, d, _ in self._amps),
            rcs=tuple(tgt.rcs_sample for _, tgt in self.targets),
            directions=tuple((g.u_r2g_d, g.v_r2g_d) for g, _ in self.targets),
            xi_schedule=xi_schedule,
        )
        return EchoGrid(np.stack(ys, axis=1), np.stack(ss, axis=1), idx, truth)


def simulate_echo(wave: WaveformConfig, geometry: ScenarioGeometry,
                  path_model: PathModel, target: TargetState | None,
                  xi_schedule, seed: int, array: ArrayConfig,
                  start_symbol: int = 0, *, noiseless: bool = False) -> EchoGrid:
    """Single-target (or target-absent, when ``target`` is None) echo grid."""
    targets = [] if target is None else [(geometry, target)]
    sim = EchoSimulator(wave, array, path_model, targets, seed, geometry0=geometry)
    return sim.grid(xi_schedule, start_symbol, noiseless=noiseless)


def signal_amplitude(geometry: ScenarioGeometry, target: TargetState,
                     path_model: PathModel, array: ArrayConfig,
                     xi: np.ndarray) -> float:
    """Coherent echo amplitude N_B |alpha_G| a_r2g^2 a_b2r^2 |h_xi^2|.

    Multiplied by sqrt(p_T) this is the noiseless magnitude of every
    received symbol, and its square times p_T is the delay-spectrum peak
    divided by N.
    """
    from .channel import path_gain

    a_b2r = path_gain(geometry.d_b2r, path_model.eps_b2r, path_model)
    a_r2g = path_gain(geometry.d_r2g, path_model.eps_r2g, path_model)
    h = cascade_gain(xi, geometry)
    return array.n_b * abs(target.rcs_sample) * a_r2g ** 2 * a_b2r ** 2 * abs(h) ** 2
