"""Gain patterns of the hierarchical IRS codebook, layer by layer.

Walks the codebook from the four widest beams down to the narrow bottom
layer and renders each layer's gain map over the normalized angle square,
showing how the beams narrow by a factor of two per layer while tiling the
whole square.
"""

import pathlib

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from irs_sense import build_codebook, gain_map

OUT = pathlib.Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

m = 16
book = build_codebook(m)
grid = np.linspace(-1, 1, 161)

fig, axes = plt.subplots(1, book.n_layers, figsize=(4 * book.n_layers, 3.6))
for k, ax in zip(range(1, book.n_layers + 1), axes):
    # one representative codeword per layer, biased away from the edge
    cw = book.codeword(k, max(1, 2 ** k // 3), max(1, 2 ** k // 2))
    gm = gain_map(cw.phases, grid)
    im = ax.imshow(20 * np.log10(gm.T + 1e-6), origin="lower",
                   extent=[-1, 1, -1, 1], vmin=-10, vmax=50, cmap="viridis")
    ax.add_patch(plt.Rectangle((cw.center[0] - cw.width / 2,
                                cw.center[1] - cw.width / 2),
                               cw.width, cw.width, fill=False, color="w"))
    ax.set_title(f"layer {k}, width {cw.width:g}")
    ax.set_xlabel("u")
axes[0].set_ylabel("v")
fig.colorbar(im, ax=axes, label="gain (dB)", fraction=0.02)
fig.savefig(OUT / "codebook_layers.png", dpi=120, bbox_inches="tight")
print(f"wrote {OUT / 'codebook_layers.png'}")

# beam-compensation effect: the same wide beam with and without the
# per-sub-array rotations
from irs_sense.channel import steering_ula
from irs_sense.codebook import _broadened_axis, beam_center

k = 2
axis_bc = _broadened_axis(m, k, 2, 2)
blocks = []
for s in (1, 2):
    psi = (2 * s - 1) / (2 ** k * 2) + beam_center(k, 2) - 1 / 2 ** k
    blocks.append(steering_ula(m // 2, psi))
axis_raw = np.concatenate(blocks)

a = np.exp(1j * np.pi * np.outer(np.arange(m), grid))
fig, ax = plt.subplots(figsize=(6, 3.5))
ax.plot(grid, np.abs(a.conj().T @ axis_bc), label="with compensation")
ax.plot(grid, np.abs(a.conj().T @ axis_raw), "--", label="without")
ax.axvspan(beam_center(k, 2) - 1 / 2 ** k, beam_center(k, 2) + 1 / 2 ** k,
           color="0.9", label="nominal cell")
ax.set_xlabel("u")
ax.set_ylabel("axis gain")
ax.legend()
fig.savefig(OUT / "beam_compensation.png", dpi=120, bbox_inches="tight")
print(f"wrote {OUT / 'beam_compensation.png'}")
