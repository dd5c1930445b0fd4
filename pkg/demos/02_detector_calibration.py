"""False-alarm calibration of the delay-spectrum-peak detector.

Sweeps the target false-alarm rate, measures the empirical rate on
noise-only echoes, and overlays the closed-form threshold design. Also
histograms one spectrum cell against its exponential law.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from irs_sense.detection import far_threshold

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

n = n_q = 64
sigma2 = 1.0
delta_f = 120e3
rng = np.random.default_rng(1)
trials = 4000

taus = np.arange(n_q) / (n_q * delta_f)
kernel = np.exp(2j * np.pi * delta_f * np.outer(taus, np.arange(n)))
noise = np.sqrt(sigma2 / 2) * (rng.standard_normal((trials, n))
                               + 1j * rng.standard_normal((trials, n)))
spectra = np.abs(noise @ kernel.T) ** 2 / n
peaks = spectra.max(axis=1)

far_targets = np.logspace(-3, -0.5, 12)
empirical = [(peaks > far_threshold(f, sigma2, n_q)).mean() for f in far_targets]

fig, axes = plt.subplots(1, 2, figsize=(10, 3.6))
axes[0].loglog(far_targets, far_targets, "k--", label="design target")
axes[0].loglog(far_targets, empirical, "o", label=f"measured ({trials} trials)")
axes[0].set_xlabel("configured false-alarm rate")
axes[0].set_ylabel("empirical rate")
axes[0].legend()

cell = spectra[:, 13]
axes[1].hist(cell, bins=60, density=True, alpha=0.6, label="spectrum cell")
z = np.linspace(0, cell.max(), 200)
axes[1].plot(z, np.exp(-z / sigma2) / sigma2, "k", label="exponential law")
axes[1].set_xlabel("cell value")
axes[1].set_ylabel("density")
axes[1].legend()
fig.savefig(OUT / "far_calibration.png", dpi=120, bbox_inches="tight")
print(f"wrote {OUT / 'far_calibration.png'}")
