"""Array responses, scenario geometry, path loss, and cascaded echo channels.

Geometry conventions
--------------------
The DFBS carries a uniform linear array along the y axis; the IRS is an
M x M planar array in the y-o-z plane. Directions are expressed as
normalized angles ``u = (2 d / lambda) * cos(elevation) * sin(azimuth)``
and ``v = (2 d / lambda) * sin(elevation)``, both in [-1, 1] for
half-wavelength spacing.

The sign convention is pinned by the localization inverse: for a point P
seen from the IRS at distance ``r``,

    u = fac * (y_irs - y_p) / r,    v = fac * (z_irs - z_p) / r,

with ``fac = 2 d_r / lambda`` (1 for half-wavelength spacing), so that
``y_p = y_irs - u * r`` and ``z_p = z_irs - v * r`` recover the position.
The same pattern (own coordinate minus far coordinate) is used for the
DFBS departure angle; that sign is unobservable because the matched
transmit and receive beamformers cancel it.

IRS element ordering is row-major over the surface: element ``t = p*M + q``
sits at azimuth (y) index ``p`` and elevation (z) index ``q``, matching the
Kronecker product ``a(M, u) kron a(M, v)`` with the azimuth factor outermost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Propagation speed (m/s). 3e8 keeps round-number identities such as
# tau = 66.667 ns <-> range 10 m exact.
C = 3e8


def steering_ula(n_elems: int, psi: float) -> np.ndarray:
    """Array response of an n-element half-wavelength ULA.

    Element n (0-based) is ``exp(1j * pi * n * psi)`` where ``psi`` is the
    normalized angle.
    """
    if n_elems < 1:
        raise ValueError(f"n_elems must be >= 1, got {n_elems}")
    return np.exp(1j * np.pi * psi * np.arange(n_elems))


def steering_upa(m: int, u: float, v: float) -> np.ndarray:
    """Planar-array response: kron of the azimuth and elevation ULA factors.

    The azimuth (u) factor is outermost, i.e. element ``p*m + q`` has phase
    ``pi * (p*u + q*v)``.
    """
    return np.kron(steering_ula(m, u), steering_ula(m, v))


def upa_exponents(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Azimuth/elevation integer exponents (p, q) per flattened IRS element."""
    idx = np.arange(m * m)
    return idx // m, idx % m


@dataclass(frozen=True)
class ArrayConfig:
    """Antenna geometry of the DFBS ULA and the square IRS.

    ``d_r`` / ``d_b`` are element spacings in meters; None means exactly
    half a wavelength, for which the normalized-angle factor 2d/lambda is 1.
    """

    n_b: int
    m: int
    d_r: float | None = None
    d_b: float | None = None

    def __post_init__(self):
        if self.n_b < 1:
            raise ValueError("n_b must be >= 1")
        if self.m < 2 or (self.m & (self.m - 1)) != 0:
            raise ValueError(f"IRS side length must be a power of two >= 2, got {self.m}")

    def irs_factor(self, wavelength: float) -> float:
        return 1.0 if self.d_r is None else 2.0 * self.d_r / wavelength

    def dfbs_factor(self, wavelength: float) -> float:
        return 1.0 if self.d_b is None else 2.0 * self.d_b / wavelength


@dataclass(frozen=True)
class ScenarioGeometry:
    """Positions of DFBS, IRS and target plus the derived link quantities."""

    q_b: np.ndarray
    q_irs: np.ndarray
    q_g: np.ndarray
    d_b2r: float
    d_r2g: float
    u_b2r_a: float
    v_b2r_a: float
    u_b2r_d: float
    u_r2g_d: float
    v_r2g_d: float

    @classmethod
    def from_positions(cls, q_b, q_irs, q_g, array: ArrayConfig | None = None,
                       wavelength: float | None = None) -> "ScenarioGeometry":
        """Derive distances and normalized angles from the three positions."""
        q_b = np.asarray(q_b, dtype=float)
        q_irs = np.asarray(q_irs, dtype=float)
        q_g = np.asarray(q_g, dtype=float)
        d_b2r = float(np.linalg.norm(q_irs - q_b))
        d_r2g = float(np.linalg.norm(q_g - q_irs))
        if d_b2r <= 0.0 or d_r2g <= 0.0:
            raise ValueError("coincident node positions are not a valid scenario")
        fac_r = fac_b = 1.0
        if array is not None and wavelength is not None:
            fac_r = array.irs_factor(wavelength)
            fac_b = array.dfbs_factor(wavelength)
        u_b2r_a = float(fac_r * (q_irs[1] - q_b[1]) / d_b2r)
        v_b2r_a = float(fac_r * (q_irs[2] - q_b[2]) / d_b2r)
        u_b2r_d = float(fac_b * (q_b[1] - q_irs[1]) / d_b2r)
        u_r2g_d = float(fac_r * (q_irs[1] - q_g[1]) / d_r2g)
        v_r2g_d = float(fac_r * (q_irs[2] - q_g[2]) / d_r2g)
        for name, val in (("u_b2r_a", u_b2r_a), ("v_b2r_a", v_b2r_a),
                          ("u_b2r_d", u_b2r_d), ("u_r2g_d", u_r2g_d),
                          ("v_r2g_d", v_r2g_d)):
            if not -1.0 <= val <= 1.0:
                raise ValueError(f"normalized angle {name}={val:.4f} outside [-1, 1]")
        return cls(q_b, q_irs, q_g, d_b2r, d_r2g,
                   u_b2r_a, v_b2r_a, u_b2r_d, u_r2g_d, v_r2g_d)

    @classmethod
    def from_direction(cls, q_b, q_irs, u: float, v: float, d_r2g: float,
                       array: ArrayConfig | None = None,
                       wavelength: float | None = None) -> "ScenarioGeometry":
        """Place the target at direction (u, v) and range d from the IRS.

        The target sits on the positive-x side of the IRS plane, which is
        the branch the localization step inverts.
        """
        if d_r2g <= 0.0:
            raise ValueError("target range must be positive")
        fac = 1.0
        if array is not None and wavelength is not None:
            fac = array.irs_factor(wavelength)
        uu, vv = u / fac, v / fac
        radicand = 1.0 - uu * uu - vv * vv
        if radicand < 0.0:
            raise ValueError(f"(u, v)=({u}, {v}) does not map to a real position")
        q_irs = np.asarray(q_irs, dtype=float)
        q_g = q_irs + d_r2g * np.array([math.sqrt(radicand), -uu, -vv])
        return cls.from_positions(q_b, q_irs, q_g, array, wavelength)


@dataclass(frozen=True)
class PathModel:
    """Distance-power-law path loss: reference loss at d_0 plus an exponent."""

    pl_d0: float          # reference path loss at d_0, in dB
    d_0: float = 1.0      # reference distance, meters
    eps_b2r: float = 2.1  # path loss exponent, DFBS-IRS link
    eps_r2g: float = 2.2  # path loss exponent, IRS-target link

    def __post_init__(self):
        if self.d_0 <= 0.0:
            raise ValueError("reference distance must be positive")
        if self.eps_b2r <= 0.0 or self.eps_r2g <= 0.0:
            raise ValueError("path loss exponents must be positive")

    @classmethod
    def free_space(cls, f_c: float, d_0: float = 1.0, *, eps_b2r: float = 2.1,
                   eps_r2g: float = 2.2) -> "PathModel":
        """Reference loss set to free-space loss at d_0 for carrier f_c."""
        pl = 20.0 * math.log10(4.0 * math.pi * d_0 * f_c / C)
        return cls(pl, d_0, eps_b2r, eps_r2g)


def path_gain(d: float, eps: float, path_model: PathModel) -> float:
    """Linear amplitude gain ``10**(-PL(d0)/20) * (d/d0)**(-eps/2)``."""
    if d <= 0.0:
        raise ValueError(f"distance must be positive, got {d}")
    return 10.0 ** (-path_model.pl_d0 / 20.0) * (d / path_model.d_0) ** (-eps / 2.0)


@dataclass(frozen=True)
class TargetState:
    """Kinematics and radar cross section of one target over a CPI."""

    velocity: float                  # radial velocity, m/s
    rcs_variance: float              # E|alpha|^2
    rcs_sample: complex              # complex RCS draw, fixed for the CPI
    doppler: float                   # 2 * velocity / wavelength, Hz

    @classmethod
    def draw(cls, velocity: float, rcs_variance: float, wavelength: float,
             rng: np.random.Generator) -> "TargetState":
        """Fixed-amplitude RCS with a uniform random phase (Swerling-I-like)."""
        phase = rng.uniform(0.0, 2.0 * math.pi)
        sample = math.sqrt(rcs_variance) * complex(math.cos(phase), math.sin(phase))
        return cls(velocity, rcs_variance, sample, 2.0 * velocity / wavelength)


def channel_b2r(f_n: float, geometry: ScenarioGeometry, path_model: PathModel,
                array: ArrayConfig) -> np.ndarray:
    """DFBS-to-IRS channel matrix (m^2 x n_b) at absolute frequency f_n.

    Rank-1 outer product of the IRS arrival response and the conjugate DFBS
    departure response, scaled by the complex link gain whose phase carries
    the one-way propagation delay.
    """
    alpha = path_gain(geometry.d_b2r, path_model.eps_b2r, path_model) \
        * np.exp(-2j * np.pi * f_n * geometry.d_b2r / C)
    b = steering_upa(array.m, geometry.u_b2r_a, geometry.v_b2r_a)
    a = steering_ula(array.n_b, geometry.u_b2r_d)
    return alpha * np.outer(b, a.conj())


def channel_r2g(f_n: float, geometry: ScenarioGeometry, path_model: PathModel,
                array: ArrayConfig) -> np.ndarray:
    """IRS-to-target channel row (length m^2) at absolute frequency f_n."""
    alpha = path_gain(geometry.d_r2g, path_model.eps_r2g, path_model) \
        * np.exp(-2j * np.pi * f_n * geometry.d_r2g / C)
    return alpha * steering_upa(array.m, geometry.u_r2g_d, geometry.v_r2g_d).conj()


_UNIT_TOL = 1e-6


def cascade_gain(xi: np.ndarray, geometry: ScenarioGeometry) -> complex:
    """One-bounce IRS coupling ``b^H(target) diag(xi) b(incident)``.

    The squared value enters the echo because the reflection happens on both
    the outbound and return paths. |result| <= m^2.
    """
    xi = np.asarray(xi)
    m = math.isqrt(xi.size)
    if m * m != xi.size:
        raise ValueError("xi length must be a perfect square")
    dev = np.max(np.abs(np.abs(xi) - 1.0))
    if dev > _UNIT_TOL:
        raise ValueError(f"xi entries must be unit modulus (max deviation {dev:.2e})")
    b_out = steering_upa(m, geometry.u_r2g_d, geometry.v_r2g_d)
    b_in = steering_upa(m, geometry.u_b2r_a, geometry.v_b2r_a)
    return complex(np.sum(b_out.conj() * xi * b_in))
