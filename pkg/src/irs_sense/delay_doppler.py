"""Delay-Doppler spectrum, hierarchical range/velocity search, localization.

From the fine-grained sensing echoes the receiver builds the auxiliary
matrix ``F[n, l] = exp(2j*pi*n*delta_f*tau_0) * Y[n, l] / s[n, l]``, whose
signal part is a 2-D cisoid in (subcarrier, symbol) with frequencies set by
the two-way IRS-target delay tau and the Doppler shift f_D. Matching it on
a delay-Doppler grid gives the spectrum

    Lambda[a, b] = (1 / (N * T)) *
        | sum_n ( sum_l F[n, l] e^{-2j pi l T_O fd[b]} ) e^{+2j pi n df tau[a]} |^2,

whose argmax is the maximum-likelihood delay/Doppler pair on the grid (any
global phase of F drops out, so the unknown channel phase never needs to be
estimated).

The hierarchical search evaluates the spectrum on a coarse grid over the
full unambiguous region, then repeatedly recenters a (2*N_R+1) x (2*T_V+1)
grid on the winner while dividing the spacing by N_R (delay) and T_V
(Doppler). Grid points are tracked as integer multiples of the final-level
spacing, so recovered values are bit-identical to an exhaustive search over
the equivalent composite grid and clamping to the unambiguous region is
exact integer clipping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import C
from .ofdm import WaveformConfig


@dataclass(frozen=True)
class DDGrids:
    """Delay/Doppler sample points of one search level."""

    tau: np.ndarray
    doppler: np.ndarray
    level: int
    n_r: int
    t_v: int


def initial_grids(wave: WaveformConfig, n_r: int, t_v: int) -> DDGrids:
    """Level-0 grids: N_R delays over [0, tau_max), 2 T_V Doppler bins over
    [-doppler_max, doppler_max)."""
    tau = wave.tau_max / n_r * np.arange(n_r)
    dop = wave.doppler_max / t_v * np.arange(-t_v, t_v)
    return DDGrids(tau, dop, 0, n_r, t_v)


def auxiliary_matrix(y_fg: np.ndarray, symbols: np.ndarray, tau_0: float,
                     delta_f: float) -> np.ndarray:
    """Compensate the known DFBS-IRS delay and divide out the symbols."""
    y_fg = np.asarray(y_fg)
    symbols = np.asarray(symbols)
    if y_fg.shape != symbols.shape:
        raise ValueError("echo grid and symbol grid shapes differ")
    n = y_fg.shape[0]
    comp = np.exp(2j * np.pi * np.arange(n) * delta_f * tau_0)
    return comp[:, None] * y_fg / symbols


def dd_spectrum(f_mat: np.ndarray, tau_grid: np.ndarray, doppler_grid: np.ndarray,
                delta_f: float, t_o: float) -> np.ndarray:
    """Spectrum values, shape (len(tau_grid), len(doppler_grid))."""
    f_mat = np.asarray(f_mat)
    n, t_fg = f_mat.shape
    dop_kernel = np.exp(-2j * np.pi * t_o * np.outer(np.arange(t_fg), doppler_grid))
    delay_kernel = np.exp(2j * np.pi * delta_f * np.outer(tau_grid, np.arange(n)))
    return np.abs(delay_kernel @ (f_mat @ dop_kernel)) ** 2 / (n * t_fg)


@dataclass(frozen=True)
class RvEstimate:
    """Delay/Doppler winners and their range/velocity conversions."""

    tau_hat: float
    doppler_hat: float
    range_hat: float
    velocity_hat: float
    spectrum_evaluations: int = 0
    grids_evaluated: int = 0


def rv_convert(tau_hat: float, doppler_hat: float, f_c: float) -> tuple[float, float]:
    """Two-way delay to range (c tau / 2) and Doppler to velocity (f lambda / 2)."""
    wavelength = C / f_c
    return C * tau_hat / 2.0, doppler_hat * wavelength / 2.0


def _argmax_2d(values: np.ndarray) -> tuple[int, int]:
    # row-major argmax: ties go to the lowest delay index, then Doppler index
    flat = int(np.argmax(values))
    return flat // values.shape[1], flat % values.shape[1]


def h_rve(f_mat: np.ndarray, wave: WaveformConfig, n_r: int, t_v: int,
          iters: int) -> RvEstimate:
    """Hierarchical delay-Doppler search; iters zoom passes plus a final one.

    Costs about (4*iters + 2) * N_R * T_V spectrum-cell evaluations and
    reaches a final spacing of tau_max / N_R**(iters+1) in delay and
    doppler_max / T_V**(iters+1) in Doppler.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    # Finest-level spacings; every visited grid point is an exact integer
    # multiple of these. Indices stay Python ints (they can exceed int64
    # for deep zooms).
    tau_fine = wave.tau_max / float(n_r) ** (iters + 1)
    dop_fine = wave.doppler_max / float(t_v) ** (iters + 1)
    tau_hi = n_r ** (iters + 1)          # valid delay indices: [0, tau_hi)
    dop_hi = t_v ** (iters + 1)          # valid Doppler indices: [-dop_hi, dop_hi)

    tau_idx = [a * n_r ** iters for a in range(n_r)]
    dop_idx = [b * t_v ** iters for b in range(-t_v, t_v)]

    cells = 0
    grids = 0
    for level in range(iters + 1):
        tau_vals = np.array([i * tau_fine for i in tau_idx])
        dop_vals = np.array([i * dop_fine for i in dop_idx])
        spec = dd_spectrum(f_mat, tau_vals, dop_vals, wave.delta_f, wave.t_o)
        cells += spec.size
        grids += 1
        a, b = _argmax_2d(spec)
        if level == iters:
            tau_hat = tau_idx[a] * tau_fine
            dop_hat = dop_idx[b] * dop_fine
            break
        step_t = n_r ** (iters - 1 - level)
        step_d = t_v ** (iters - 1 - level)
        tau_idx = [min(max(tau_idx[a] + d * step_t, 0), tau_hi - 1)
                   for d in range(-n_r, n_r + 1)]
        dop_idx = [min(max(dop_idx[b] + d * step_d, -dop_hi), dop_hi - 1)
                   for d in range(-t_v, t_v + 1)]

    rng, vel = rv_convert(tau_hat, dop_hat, wave.f_c)
    return RvEstimate(tau_hat, dop_hat, rng, vel,
                      spectrum_evaluations=cells, grids_evaluated=grids)


class LocalizationInfeasibleError(ValueError):
    """Estimated direction/range pair has no real position on the IRS front side."""


@dataclass(frozen=True)
class LocationEstimate:
    q_hat: np.ndarray


def localize(u_hat: float, v_hat: float, range_hat: float,
             q_irs: np.ndarray) -> LocationEstimate:
    """Invert the direction/range geometry to a 3-D position.

    y = y_irs - u*d, z = z_irs - v*d, and x on the positive branch
    x = x_irs + sqrt(d^2 - (u d)^2 - (v d)^2). A negative radicand raises
    :class:`LocalizationInfeasibleError` so callers can record a failure.
    """
    q_irs = np.asarray(q_irs, dtype=float)
    dy = u_hat * range_hat
    dz = v_hat * range_hat
    radicand = range_hat ** 2 - dy ** 2 - dz ** 2
    if radicand < 0.0:
        raise LocalizationInfeasibleError(
            f"direction ({u_hat:.4f}, {v_hat:.4f}) with range {range_hat:.4f} m "
            "is outside the reachable half-space")
    q = np.array([q_irs[0] + math.sqrt(radicand), q_irs[1] - dy, q_irs[2] - dz])
    return LocationEstimate(q)
