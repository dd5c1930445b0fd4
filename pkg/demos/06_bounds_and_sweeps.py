"""Estimation bounds and a small Monte Carlo sweep.

Plots the closed-form range/velocity bounds against SNR, overlays measured
RMSEs of the hierarchical search, and writes a detector-comparison sweep
CSV in the documented schema (the figures package renders such files).
"""

import math
import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from irs_sense.config import ScenarioConfig
from irs_sense.crlb import crlb_rv
from irs_sense.delay_doppler import h_rve
from irs_sense.harness import rows_to_csv, sweep, sweep_columns
from irs_sense.ofdm import WaveformConfig

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

wave = WaveformConfig(f_c=28.5e9, delta_f=120e3, n_sc=64, t_cp=0.58e-6,
                      t_cg=8, t_fg=32, noise_power=1.0, power_per_sc=1.0)
rng = np.random.default_rng(3)
snrs_db = np.arange(0, 35, 5)
meas_d, meas_v, bound_d, bound_v = [], [], [], []
for snr_db in snrs_db:
    snr = 10 ** (snr_db / 10)
    c_r, c_v = crlb_rv(snr, wave.n_sc, wave.t_fg, wave.delta_f, wave.t_o, wave.f_c)
    bound_d.append(math.sqrt(c_r))
    bound_v.append(math.sqrt(c_v))
    errs_d, errs_v = [], []
    for _ in range(60):
        tau = rng.uniform(0.1, 0.9) * wave.tau_max
        fd = rng.uniform(-0.8, 0.8) * wave.doppler_max
        sig = (math.sqrt(snr)
               * np.exp(-2j * np.pi * np.arange(64)[:, None] * wave.delta_f * tau)
               * np.exp(2j * np.pi * np.arange(32)[None, :] * wave.t_o * fd))
        z = (rng.standard_normal((64, 32)) + 1j * rng.standard_normal((64, 32))) / np.sqrt(2)
        est = h_rve(sig + z, wave, 10, 10, 4)
        errs_d.append(est.range_hat - 3e8 * tau / 2)
        errs_v.append(est.velocity_hat - fd * wave.wavelength / 2)
    meas_d.append(float(np.sqrt(np.mean(np.square(errs_d)))))
    meas_v.append(float(np.sqrt(np.mean(np.square(errs_v)))))

fig, axes = plt.subplots(1, 2, figsize=(10, 3.8))
for ax, meas, bound, name in ((axes[0], meas_d, bound_d, "range (m)"),
                              (axes[1], meas_v, bound_v, "velocity (m/s)")):
    ax.semilogy(snrs_db, meas, "o-", label="hierarchical search RMSE")
    ax.semilogy(snrs_db, bound, "k--", label="closed-form bound")
    ax.set_xlabel("per-sample SNR (dB)")
    ax.set_ylabel(f"RMSE, {name}")
    ax.legend()
fig.savefig(OUT / "rv_bounds.png", dpi=120, bbox_inches="tight")
print(f"wrote {OUT / 'rv_bounds.png'}")

# small detector-comparison sweep in the documented CSV schema
cfg = ScenarioConfig(m=16, n_sc=64, n_q=64, t_cg=24, t_fg=8, n_r=4, t_v=4,
                     iters=1, noise_power_dbm=-20.0, pl_d0_db=0.0,
                     target_range=9.765625, target_bounds=(0.05, 0.45))
rows = sweep(cfg, "N", [16, 64], trials=30, schemes=("dsp", "rss"))
rows_to_csv(rows, sweep_columns(("dsp", "rss")), str(OUT / "sweep_n.csv"))
print(f"wrote {OUT / 'sweep_n.csv'}")
