"""Closed-form estimation bounds: direction FIM/CRLB, FGS SNR, R&V CRLBs.

Direction bound. During one training symbol the stacked received vector
over subcarriers follows

    r[n] = sqrt(p) * kappa * N_B * alpha_b2r(n)^2 * h_xi(u, v)^2,

where ``h_xi(u, v) = b(u, v)^H diag(xi) b(u_in, v_in)`` and kappa collects
the target RCS, the IRS-target link gain and the Doppler phase into one
complex nuisance parameter. (The unit-modulus transmit symbol multiplies
every partial derivative identically and cancels from the information
matrix, so it is omitted.) The Fisher information for the real parameter
vector (u, v, Re kappa, Im kappa) under white complex Gaussian noise is

    J[i, j] = (2 / sigma_0^2) * Re{ sum_n conj(d r[n] / d psi_i) * d r[n] / d psi_j }

with analytic partials of h through the planar-array phase exponents. The
direction CRLB is the inverse of the Schur complement of the nuisance
block.

Range/velocity bounds (uniform power allocation, per-sample SNR ``snr``):

    var(d_hat) >= 6 / (snr (N^2 - 1) N T_FG) * (c / (4 pi delta_f))^2
    var(v_hat) >= 6 / (snr (T_FG^2 - 1) T_FG N) * (c / (4 pi T_O f_c))^2
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (C, ArrayConfig, PathModel, ScenarioGeometry, TargetState,
                      cascade_gain, path_gain, steering_upa, upa_exponents)
from .ofdm import WaveformConfig


class DegenerateGeometryError(ValueError):
    """FIM nuisance block is singular; the bound is undefined here."""


@dataclass(frozen=True)
class CrlbReport:
    crlb_u: float
    crlb_v: float
    crlb_range: float
    crlb_velocity: float
    snr_fg: float


def _h_and_partials(m: int, u: float, v: float, incident: tuple[float, float],
                    xi: np.ndarray) -> tuple[complex, complex, complex]:
    """Cascade coupling h(u, v) and its partials in u and v."""
    p, q = upa_exponents(m)
    e = np.asarray(xi) * steering_upa(m, *incident)
    b_conj = steering_upa(m, u, v).conj()
    h = np.sum(b_conj * e)
    h_u = np.sum(-1j * np.pi * p * b_conj * e)
    h_v = np.sum(-1j * np.pi * q * b_conj * e)
    return complex(h), complex(h_u), complex(h_v)


def nuisance_gain(geometry: ScenarioGeometry, target: TargetState,
                  path_model: PathModel, wave: WaveformConfig,
                  symbol: int = 0) -> complex:
    """Representative kappa: RCS times squared IRS-target gain times Doppler."""
    a = path_gain(geometry.d_r2g, path_model.eps_r2g, path_model)
    tau = 2.0 * geometry.d_r2g / C
    return (target.rcs_sample * a ** 2 * np.exp(-2j * np.pi * wave.f_c * tau)
            * np.exp(2j * np.pi * symbol * wave.t_o * target.doppler))


def signal_model(geometry: ScenarioGeometry, array: ArrayConfig,
                 path_model: PathModel, wave: WaveformConfig,
                 xi: np.ndarray, kappa: complex, u: float, v: float) -> np.ndarray:
    """Noise-free stacked signal r over subcarriers for direction (u, v)."""
    h, _, _ = _h_and_partials(array.m, u, v,
                              (geometry.u_b2r_a, geometry.v_b2r_a), xi)
    return _common_factor(geometry, array, path_model, wave) * kappa * h * h


def _common_factor(geometry, array, path_model, wave) -> np.ndarray:
    a_b2r = path_gain(geometry.d_b2r, path_model.eps_b2r, path_model)
    freqs = wave.subcarrier_freqs()
    alpha_sq = a_b2r ** 2 * np.exp(-2j * np.pi * freqs * 2.0 * geometry.d_b2r / C)
    return math.sqrt(wave.power_per_sc) * array.n_b * alpha_sq


def fim_direction(geometry: ScenarioGeometry, array: ArrayConfig,
                  path_model: PathModel, wave: WaveformConfig,
                  xi, kappa: complex) -> np.ndarray:
    """4x4 Fisher information for (u, v, Re kappa, Im kappa).

    ``xi`` is one IRS phase vector or a sequence of them (one per probe
    symbol); per-symbol contributions add. A single beam leaves the matrix
    rank-2 (every partial shares the same subcarrier profile), so a
    meaningful direction bound needs the probe set actually spent, e.g. the
    winner plus its refinement neighbors.
    """
    if wave.noise_power <= 0.0:
        raise ValueError("noise_power must be positive for a Fisher matrix")
    xis = [xi] if np.ndim(xi) == 1 else list(xi)
    u, v = geometry.u_r2g_d, geometry.v_r2g_d
    base = _common_factor(geometry, array, path_model, wave)
    fim = np.zeros((4, 4))
    for beam in xis:
        h, h_u, h_v = _h_and_partials(array.m, u, v,
                                      (geometry.u_b2r_a, geometry.v_b2r_a),
                                      beam)
        d = np.empty((4, wave.n_sc), dtype=complex)
        d[0] = base * kappa * 2.0 * h * h_u
        d[1] = base * kappa * 2.0 * h * h_v
        d[2] = base * h * h
        d[3] = 1j * base * h * h
        fim += (2.0 / wave.noise_power) * np.real(d.conj() @ d.T)
    return fim


def crlb_direction(fim: np.ndarray) -> np.ndarray:
    """2x2 direction CRLB: inverse Schur complement of the nuisance block.

    Raises :class:`DegenerateGeometryError` when the nuisance block or the
    Schur complement is (numerically) singular, e.g. for a single-beam FIM.
    """
    fim = np.asarray(fim, dtype=float)
    j_ee = fim[:2, :2]
    j_ek = fim[:2, 2:]
    j_kk = fim[2:, 2:]
    try:
        schur = j_ee - j_ek @ np.linalg.solve(j_kk, j_ek.T)
        # cholesky doubles as the positive-definiteness test
        np.linalg.cholesky(schur / max(np.max(np.abs(schur)), 1e-300))
        return np.linalg.inv(schur)
    except np.linalg.LinAlgError as exc:
        raise DegenerateGeometryError(str(exc)) from exc


def snr_fg(wave: WaveformConfig, array: ArrayConfig,
           geometry: ScenarioGeometry, path_model: PathModel,
           rcs_variance: float, xi: np.ndarray) -> float:
    """Per-sample received SNR of the fine-grained sensing period."""
    a_b2r = path_gain(geometry.d_b2r, path_model.eps_b2r, path_model)
    a_r2g = path_gain(geometry.d_r2g, path_model.eps_r2g, path_model)
    h = abs(cascade_gain(xi, geometry))
    return (wave.power_per_sc * array.n_b ** 2 * rcs_variance
            * a_r2g ** 4 * a_b2r ** 4 * h ** 4 / wave.noise_power)


def crlb_rv(snr: float, n_sc: int, t_fg: int, delta_f: float, t_o: float,
            f_c: float) -> tuple[float, float]:
    """Range and velocity CRLBs (m^2, (m/s)^2) at per-sample SNR ``snr``."""
    if n_sc < 2 or t_fg < 2:
        raise ValueError("need at least two subcarriers and two symbols")
    if snr <= 0.0:
        raise ValueError("snr must be positive")
    crlb_range = 6.0 / (snr * (n_sc ** 2 - 1) * n_sc * t_fg) \
        * (C / (4.0 * math.pi * delta_f)) ** 2
    crlb_velocity = 6.0 / (snr * (t_fg ** 2 - 1) * t_fg * n_sc) \
        * (C / (4.0 * math.pi * t_o * f_c)) ** 2
    return crlb_range, crlb_velocity
