"""K-layer hierarchical IRS codebook with adjustable beam direction and width.

Layer k (1-based, k = 1..K with K = log2 M) holds 4^k codewords. The
(i, j)-th codeword points at the normalized direction

    center = (-1 + (2i - 1) / 2^k,  -1 + (2j - 1) / 2^k)

with nominal width 2 / 2^k per axis, so each layer tiles the square
[-1, 1] x [-1, 1] and every codeword's footprint is the union of its four
children's footprints one layer down.

Construction rules, with l = K - k:

* Bottom layer (k = K): plain planar-array response at the cell center.
* l even, l >= 2: each axis is an M-element vector made of S = 2^(l/2)
  sub-ULA blocks of M/S elements. The s-th block steers to the s-th of S
  evenly spaced sub-beam directions inside the cell and is pre-rotated by
  the beam-compensation coefficient exp(-j*s*zeta), zeta = pi*(M/S-1)/(M/S),
  which flattens the ripple of the widened beam. The codeword is the kron
  of the two axis vectors.
* l odd: the surface is split into four quadrants. The low-azimuth /
  low-elevation quadrant forms the wide beam (same block construction per
  axis, now with S = 2^((l-1)/2) sub-ULAs of M/(2S) elements on an
  M/2-element axis); the other three quadrants are parked on the edge beam
  a(M/2, 1) kron a(M/2, 1), which points at the corner of the angle square
  and stays out of the scan region.

Codeword phase vectors are stored in the planar-array element order of
:mod:`irs_sense.channel` (row-major over the M x M surface, azimuth index
outermost). For odd layers the quadrant blocks are placed on the physical
surface, not concatenated naively, so that the gain factorizes per axis.

Codewords live in the codebook's own direction frame: a codeword centered
at (u0, v0) yields its maximum cascade gain at (u0, v0) once it is applied
with the incident-wave pre-rotation ``conj(b(u_in, v_in)) * phases`` (see
:func:`steer_to_direction`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import steering_ula, steering_upa


@dataclass(frozen=True)
class Codeword:
    layer: int
    i: int
    j: int
    phases: np.ndarray
    center: tuple[float, float]
    width: float


def beam_center(k: int, idx: int) -> float:
    """Per-axis center of the idx-th cell (1-based) on layer k."""
    return -1.0 + (2 * idx - 1) / 2 ** k


def codeword_narrow(m: int, i: int, j: int) -> Codeword:
    """Bottom-layer codeword: narrow beam of width 2/m at the cell center."""
    k = _layers(m)
    _check_index(k, i, j)
    cu, cv = beam_center(k, i), beam_center(k, j)
    return Codeword(k, i, j, steering_upa(m, cu, cv), (cu, cv), 2.0 / m)


def _broadened_axis(m_axis: int, k: int, idx: int, n_sub: int) -> np.ndarray:
    """Axis vector of n_sub sub-ULA blocks with beam-compensation rotations.

    Block s (1-based) of m_axis/n_sub elements steers to
    ``(2s-1) / (2^k * n_sub) + center - 1/2^k`` and is rotated by
    ``exp(-j*s*zeta)`` with ``zeta = pi*(m_sub-1)/m_sub``.
    """
    m_sub = m_axis // n_sub
    zeta = np.pi * (m_sub - 1) / m_sub
    center = beam_center(k, idx)
    blocks = []
    for s in range(1, n_sub + 1):
        psi = (2 * s - 1) / (2 ** k * n_sub) + center - 1.0 / 2 ** k
        blocks.append(np.exp(-1j * s * zeta) * steering_ula(m_sub, psi))
    return np.concatenate(blocks)


def codeword_even_layer(m: int, k: int, i: int, j: int) -> Codeword:
    """Layer-k codeword for even l = K - k >= 2 (full-surface sub-arrays)."""
    kk = _layers(m)
    l = kk - k
    if l < 2 or l % 2 != 0:
        raise ValueError(f"even-layer rule needs even l >= 2, got l={l}")
    _check_index(k, i, j)
    n_sub = 2 ** (l // 2)
    axis_u = _broadened_axis(m, k, i, n_sub)
    axis_v = _broadened_axis(m, k, j, n_sub)
    cu, cv = beam_center(k, i), beam_center(k, j)
    return Codeword(k, i, j, np.kron(axis_u, axis_v), (cu, cv), 2.0 / 2 ** k)


def codeword_odd_layer(m: int, k: int, i: int, j: int) -> Codeword:
    """Layer-k codeword for odd l = K - k (one active quadrant + edge groups)."""
    kk = _layers(m)
    l = kk - k
    if l % 2 != 1:
        raise ValueError(f"odd-layer rule needs odd l, got l={l}")
    _check_index(k, i, j)
    half = m // 2
    n_sub = 2 ** ((l - 1) // 2)
    axis_u = _broadened_axis(half, k, i, n_sub)
    axis_v = _broadened_axis(half, k, j, n_sub)
    edge_axis = steering_ula(half, 1.0)

    # Quadrant placement on the m x m surface (azimuth p rows, elevation q
    # columns): active beam in (p < m/2, q < m/2), edge beam elsewhere.
    surface = np.empty((m, m), dtype=complex)
    surface[:half, :half] = np.outer(axis_u, axis_v)
    edge = np.outer(edge_axis, edge_axis)
    surface[:half, half:] = edge
    surface[half:, :half] = edge
    surface[half:, half:] = edge
    cu, cv = beam_center(k, i), beam_center(k, j)
    return Codeword(k, i, j, surface.reshape(-1), (cu, cv), 2.0 / 2 ** k)


def _layers(m: int) -> int:
    if m < 2 or (m & (m - 1)) != 0:
        raise ValueError(f"IRS side length must be a power of two >= 2, got {m}")
    return int(math.log2(m))


def _check_index(k: int, i: int, j: int):
    hi = 2 ** k
    if not (1 <= i <= hi and 1 <= j <= hi):
        raise ValueError(f"codeword index ({i}, {j}) outside [1, {hi}] on layer {k}")


class HierarchicalCodebook:
    """Lazily constructed codebook; codewords are cached on first use.

    Layer K would hold m^2 vectors of m^2 entries each, so eager
    construction is quadratic in the element count; beam training only ever
    touches 4K + 2 codewords per episode.
    """

    def __init__(self, m: int):
        self.m = m
        self.n_layers = _layers(m)
        self._cache: dict[tuple[int, int, int], Codeword] = {}

    def codeword(self, k: int, i: int, j: int) -> Codeword:
        key = (k, i, j)
        cw = self._cache.get(key)
        if cw is None:
            cw = self._build(k, i, j)
            self._cache[key] = cw
        return cw

    def _build(self, k: int, i: int, j: int) -> Codeword:
        if not 1 <= k <= self.n_layers:
            raise ValueError(f"layer {k} outside [1, {self.n_layers}]")
        if k == self.n_layers:
            return codeword_narrow(self.m, i, j)
        l = self.n_layers - k
        if l % 2 == 0:
            return codeword_even_layer(self.m, k, i, j)
        return codeword_odd_layer(self.m, k, i, j)

    def layer(self, k: int):
        """Iterate all 4^k codewords of layer k (i outer, j inner)."""
        for i in range(1, 2 ** k + 1):
            for j in range(1, 2 ** k + 1):
                yield self.codeword(k, i, j)

    @staticmethod
    def children(i: int, j: int) -> list[tuple[int, int]]:
        """Indices of the four layer-(k+1) cells tiling cell (i, j)."""
        return [(ii, jj) for ii in (2 * i - 1, 2 * i) for jj in (2 * j - 1, 2 * j)]


def build_codebook(m: int) -> HierarchicalCodebook:
    return HierarchicalCodebook(m)


def beam_gain(xi: np.ndarray, u: float, v: float,
              incident: tuple[float, float]) -> float:
    """Gain ``|b^H(u, v) diag(xi) b(incident)|`` of phase vector xi."""
    xi = np.asarray(xi)
    m = math.isqrt(xi.size)
    b_out = steering_upa(m, u, v)
    b_in = steering_upa(m, *incident)
    return float(abs(np.sum(b_out.conj() * xi * b_in)))


def optimal_beam(u: float, v: float, incident: tuple[float, float],
                 m: int) -> np.ndarray:
    """Unit-modulus vector maximizing :func:`beam_gain` at (u, v).

    Equals ``conj(b(incident)) * b(u, v)`` elementwise, which is the planar
    response at the difference direction.
    """
    return steering_upa(m, *incident).conj() * steering_upa(m, u, v)


def steer_to_direction(phases: np.ndarray, incident: tuple[float, float]) -> np.ndarray:
    """Apply a codeword so its pattern lives in absolute direction space.

    Pre-rotating by the conjugate incident response makes a codeword
    centered at (u0, v0) peak at the physical direction (u0, v0) regardless
    of where the illumination comes from.
    """
    m = math.isqrt(np.asarray(phases).size)
    return steering_upa(m, *incident).conj() * phases


def gain_map(xi: np.ndarray, grid: np.ndarray,
             incident: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Gain of xi on a (u, v) grid; returns a len(grid) x len(grid) array."""
    xi = np.asarray(xi)
    m = math.isqrt(xi.size)
    a_u = np.exp(1j * np.pi * np.outer(np.arange(m), grid))   # m x G
    a_v = a_u
    b_in = steering_upa(m, *incident)
    w = (xi * b_in).reshape(m, m)
    # sum_pq conj(a_u[p,g]) conj(a_v[q,h]) w[p,q], all (g,h) at once
    return np.abs(a_u.conj().T @ w @ a_v.conj())
