"""Hierarchical 3D beam training with linear-interpolation beam refinement.

The search descends the codebook one layer per stage: stage 1 tests the
four layer-1 codewords, stage k tests the four children of the previous
winner, and after K = log2(M) stages the winning bottom-layer cell is the
coarse direction estimate. One OFDM symbol is spent per tested beam, so a
full episode costs 4K symbols plus 2 for refinement.

Refinement re-uses the two bottom-layer axis neighbors probed as siblings
of the winner, probes the two unsearched ones, and pulls the cell index
toward the stronger side by the statistic-weighted centroid

    i_ref = sum_{d = -1, 0, +1} (i_win + d) * P(i_win + d, j_win)
            / sum_{d = -1, 0, +1} P(i_win + d, j_win)

(and likewise for j), giving a sub-cell direction estimate; the winner's
own statistic anchors the centroid so the shift never leaves the adjacent
cells. At the grid edge the missing neighbor index clamps to the winner
cell itself and the episode is flagged.

The ``measure`` callable hides the physics: it receives a codeword and an
absolute OFDM-symbol index and returns the chosen test statistic of the
echo. Episodes are deterministic given the measure closure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import steering_upa
from .codebook import HierarchicalCodebook


@dataclass(frozen=True)
class StageRecord:
    layer: int
    tested: tuple[tuple[int, int], ...]
    statistics: tuple[float, ...]
    winner: tuple[int, int]


@dataclass(frozen=True)
class TrainingTrace:
    """Outcome of one beam-training episode (refinement filled in later)."""

    stages: tuple[StageRecord, ...]
    final_ij: tuple[int, int]
    detected: bool | None
    symbols_used: int
    refined_ij: tuple[float, float] | None = None
    xi_refined: np.ndarray | None = None
    boundary_clamped: bool = False
    neighbor_statistics: dict | None = None

    def to_dict(self) -> dict:
        """JSON-friendly rendering for trace dumps."""
        return {
            "stages": [
                {"layer": s.layer, "tested": list(map(list, s.tested)),
                 "statistics": list(s.statistics), "winner": list(s.winner)}
                for s in self.stages
            ],
            "final_ij": list(self.final_ij),
            "refined_ij": None if self.refined_ij is None else list(self.refined_ij),
            "detected": self.detected,
            "symbols_used": self.symbols_used,
            "boundary_clamped": self.boundary_clamped,
        }


@dataclass(frozen=True)
class DirectionEstimate:
    u_hat: float
    v_hat: float


def _argmax_lexicographic(cells, stats) -> int:
    """Index of the max statistic; ties go to the lowest (i, j)."""
    best = 0
    for t in range(1, len(stats)):
        if stats[t] > stats[best] or (stats[t] == stats[best] and cells[t] < cells[best]):
            best = t
    return best


def hbt_3d(book: HierarchicalCodebook, measure, threshold: float | None = None,
           start_symbol: int = 0) -> TrainingTrace:
    """Run the K-stage descent; winner selection uses the measured statistic.

    ``threshold`` enables the presence decision at the final stage: the
    episode reports a detection when the winning statistic strictly exceeds
    it. With ``threshold=None`` (e.g. an RSS baseline run) ``detected`` is
    left as None.
    """
    symbol = start_symbol
    stages = []
    cells = [(i, j) for i in (1, 2) for j in (1, 2)]
    winner = None
    for k in range(1, book.n_layers + 1):
        if k > 1:
            cells = HierarchicalCodebook.children(*winner)
        stats = []
        for (i, j) in cells:
            stats.append(float(measure(book.codeword(k, i, j), symbol)))
            symbol += 1
        best = _argmax_lexicographic(cells, stats)
        winner = cells[best]
        stages.append(StageRecord(k, tuple(cells), tuple(stats), winner))
    detected = None
    if threshold is not None:
        last = stages[-1]
        detected = bool(last.statistics[last.tested.index(winner)] > threshold)
    return TrainingTrace(tuple(stages), winner, detected,
                         symbols_used=symbol - start_symbol)


def beam_refinement(trace: TrainingTrace, book: HierarchicalCodebook,
                    measure, start_symbol: int | None = None) -> TrainingTrace:
    """Probe the unsearched axis neighbors and interpolate the direction.

    Neighbor statistics already measured during the final stage are reused;
    exactly the missing ones are probed (two for an interior winner).
    """
    m = book.m
    k = book.n_layers
    i0, j0 = trace.final_ij
    last = trace.stages[-1]
    known = dict(zip(last.tested, last.statistics))
    symbol = (start_symbol if start_symbol is not None
              else trace.symbols_used)
    probes = 0
    clamped = False

    def stat_at(i: int, j: int) -> float:
        nonlocal symbol, probes
        cell = (i, j)
        if cell in known:
            return known[cell]
        val = float(measure(book.codeword(k, i, j), symbol))
        known[cell] = val
        symbol += 1
        probes += 1
        return val

    def interp(center: int, axis: str) -> float:
        nonlocal clamped
        num = den = 0.0
        for delta in (-1, 0, 1):
            idx = center + delta
            if not 1 <= idx <= m:
                idx = max(1, min(m, idx))
                clamped = True
            cell = (idx, j0) if axis == "i" else (i0, idx)
            p = stat_at(*cell)
            num += idx * p
            den += p
        return num / den if den > 0.0 else float(center)

    i_ref = interp(i0, "i")
    j_ref = interp(j0, "j")
    cu = (2.0 * i_ref - 1.0) / m - 1.0
    cv = (2.0 * j_ref - 1.0) / m - 1.0
    xi = steering_upa(m, cu, cv)
    return replace(trace, refined_ij=(i_ref, j_ref), xi_refined=xi,
                   boundary_clamped=clamped,
                   symbols_used=trace.symbols_used + probes,
                   neighbor_statistics=dict(known))


def direction_from_beam(i_ref: float, j_ref: float, m: int) -> DirectionEstimate:
    """Map (possibly fractional) bottom-layer indices to a direction."""
    return DirectionEstimate((2.0 * i_ref - 1.0) / m - 1.0,
                             (2.0 * j_ref - 1.0) / m - 1.0)


def direction_error(u: float, v: float, est: DirectionEstimate) -> float:
    """Angle-domain error pi * sqrt((u - u_hat)^2 + (v - v_hat)^2)."""
    return math.pi * math.hypot(u - est.u_hat, v - est.v_hat)


def training_budget(m: int) -> int:
    """OFDM symbols consumed by a full episode: 2 + 4 log2(m)."""
    return 2 + 4 * int(math.log2(m))
