"""Multi-target beam training and per-target fine-grained scheduling.

With several targets the descent keeps every beam whose delay-spectrum
peak clears the false-alarm threshold instead of a single winner, capped
at a configurable branch budget per stage. Because the raw peak scales as
range**(-2*eps), near targets would always outrank far ones, so candidate
areas at the bottom layer are ranked by the distance-normalized spectrum

    Gamma_norm[n_q] = Gamma[n_q] * (c * tau_q / 2)**(2 * eps_r2g),

whose weight cancels the two-way IRS-target path loss at the cell's own
delay. The A best-ranked areas are kept, refined individually, and the
fine-grained period is split into one contiguous block of OFDM symbols per
refined beam.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import C, ScenarioGeometry, TargetState, steering_upa
from .codebook import HierarchicalCodebook
from .detection import DelaySpectrum, dsp_statistic


@dataclass(frozen=True)
class MultiScene:
    """A-target scene; entries are (geometry, target state) pairs."""

    targets: tuple[tuple[ScenarioGeometry, TargetState], ...]

    @property
    def a(self) -> int:
        return len(self.targets)


def normalized_delay_spectrum(spectrum: DelaySpectrum, eps_r2g: float) -> np.ndarray:
    """Range-compensated spectrum values; the zero-delay cell weights to 0."""
    weight = (C * spectrum.tau_grid / 2.0) ** (2.0 * eps_r2g)
    return spectrum.values * weight


def normalized_dsp(spectrum: DelaySpectrum, eps_r2g: float) -> float:
    """Raw delay-spectrum peak with the range weight of its own cell.

    The compensation weight grows as range**(2 eps), so the elementwise
    normalized spectrum is maximized by far noise cells no matter how small
    they are; the usable statistic detects the peak on the raw spectrum
    (where the threshold calibration holds) and compensates at the detected
    delay. Peaks in the ambiguous half of the grid keep the raw value of
    their alias position's weight.
    """
    peak, cell = dsp_statistic(spectrum)
    weight = (C * spectrum.tau_grid[cell] / 2.0) ** (2.0 * eps_r2g)
    return peak * weight


@dataclass(frozen=True)
class TargetCandidate:
    """One kept bottom-layer area with its refinement results."""

    cell: tuple[int, int]
    dsp: float
    normalized_dsp: float
    refined_ij: tuple[float, float]
    xi_refined: np.ndarray
    boundary_clamped: bool


@dataclass(frozen=True)
class MultiTrainingResult:
    candidates: tuple[TargetCandidate, ...]
    shortfall: bool
    symbols_used: int
    branches_per_stage: tuple[int, ...]


def multi_hbt(book: HierarchicalCodebook, measure_spectrum, threshold: float,
              n_targets: int, eps_r2g: float, branch_cap: int = 16,
              start_symbol: int = 0) -> MultiTrainingResult:
    """Threshold-gated multi-branch descent plus per-area refinement.

    ``measure_spectrum(codeword, symbol)`` must return the
    :class:`~irs_sense.detection.DelaySpectrum` of the probe. Surviving
    areas at the bottom layer are ranked by distance-normalized peak and the
    best ``n_targets`` are refined; fewer survivors set the shortfall flag.
    """
    if n_targets < 1:
        raise ValueError("n_targets must be >= 1")
    symbol = start_symbol
    survivors: list[tuple[tuple[int, int], float, DelaySpectrum]] = []
    branches_per_stage = []
    probed_final: dict[tuple[int, int], tuple[float, DelaySpectrum]] = {}

    cells = [(i, j) for i in (1, 2) for j in (1, 2)]
    for k in range(1, book.n_layers + 1):
        if k > 1:
            parents = [c for c, _, _ in survivors]
            cells = [child for p in parents
                     for child in HierarchicalCodebook.children(*p)]
        stage: list[tuple[tuple[int, int], float, DelaySpectrum]] = []
        for cell in cells:
            spec = measure_spectrum(book.codeword(k, *cell), symbol)
            symbol += 1
            peak, _ = dsp_statistic(spec)
            if k == book.n_layers:
                probed_final[cell] = (peak, spec)
            if peak > threshold:
                stage.append((cell, peak, spec))
        stage.sort(key=lambda t: (-t[1], t[0]))
        survivors = stage[:branch_cap]
        branches_per_stage.append(len(survivors))
        if not survivors:
            return MultiTrainingResult((), True, symbol - start_symbol,
                                       tuple(branches_per_stage))

    ranked = sorted(
        ((cell, peak, normalized_dsp(spec, eps_r2g))
         for cell, peak, spec in survivors),
        key=lambda t: (-t[2], t[0]))
    kept = ranked[:n_targets]
    shortfall = len(kept) < n_targets

    candidates = []
    for cell, peak, norm_peak in kept:
        refined, used, clamped = _refine_area(book, measure_spectrum, cell,
                                              probed_final, symbol)
        symbol += used
        cu = (2.0 * refined[0] - 1.0) / book.m - 1.0
        cv = (2.0 * refined[1] - 1.0) / book.m - 1.0
        candidates.append(TargetCandidate(cell, peak, norm_peak, refined,
                                          steering_upa(book.m, cu, cv), clamped))
    return MultiTrainingResult(tuple(candidates), shortfall,
                               symbol - start_symbol, tuple(branches_per_stage))


def _refine_area(book, measure_spectrum, cell, probed, start_symbol):
    """Axis-neighbor interpolation around one bottom-layer cell."""
    m = book.m
    k = book.n_layers
    i0, j0 = cell
    symbol = start_symbol
    used = 0
    clamped = False

    def peak_at(i, j):
        nonlocal symbol, used
        key = (i, j)
        if key not in probed:
            spec = measure_spectrum(book.codeword(k, i, j), symbol)
            probed[key] = (dsp_statistic(spec)[0], spec)
            symbol += 1
            used += 1
        return probed[key][0]

    def interp(center, axis):
        nonlocal clamped
        num = den = 0.0
        for delta in (-1, 0, 1):
            idx = center + delta
            if not 1 <= idx <= m:
                idx = max(1, min(m, idx))
                clamped = True
            p = peak_at(idx, j0) if axis == "i" else peak_at(i0, idx)
            num += idx * p
            den += p
        return num / den if den > 0.0 else float(center)

    return (interp(i0, "i"), interp(j0, "j")), used, clamped


def multi_fgs_schedule(n_beams: int, t_fg: int) -> list[slice]:
    """Contiguous symbol blocks per refined beam: floor(T_FG / A) symbols
    each, remainder appended to the last block."""
    if n_beams < 1:
        raise ValueError("need at least one beam")
    if t_fg < n_beams:
        raise ValueError(f"cannot schedule {n_beams} beams in {t_fg} symbols")
    block = t_fg // n_beams
    slices = [slice(b * block, (b + 1) * block) for b in range(n_beams)]
    slices[-1] = slice((n_beams - 1) * block, t_fg)
    return slices
