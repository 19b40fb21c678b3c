"""Multibeam RF user link: geometry, deterministic beam-gain matrix, and
shadowed-Rician fading statistics.

The seven-beam layout places one center beam and a hexagonal ring; the gain
matrix follows the tapered-aperture Bessel pattern with noise-normalized
entries, so it is fully determined by geometry and link constants.  User
fading follows the shadowed Rician land-mobile-satellite model of
Abdi et al. (2003): Nakagami line of sight over Rayleigh scatter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.special as sp

from . import specfun

SPEED_OF_LIGHT = 299792458.0   # m/s
PATTERN_PEAK_CONST = 2.07123   # u = const * sin(theta)/sin(theta_3dB)


class NonIntegerShadowingError(ValueError):
    """Closed-form user-link statistics need integer fading severity.

    Non-integer m is supported only through the Monte Carlo path.
    """


@dataclass(frozen=True)
class RfLinkParams:
    """Carrier and receiver constants of the user downlink (Ka band)."""
    carrier_hz: float
    gain_tx: float               # satellite feed gain, linear
    gain_rx: float               # user terminal gain, linear
    bandwidth_hz: float
    noise_temp_k: float
    theta_3db_rad: float
    boltzmann: float = 1.380649e-23

    def __post_init__(self):
        for name in ("carrier_hz", "gain_tx", "gain_rx", "bandwidth_hz",
                     "noise_temp_k", "theta_3db_rad"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def beam_centers(radius: float) -> np.ndarray:
    """Center beam plus hexagonal ring, planar coordinates in meters."""
    if radius <= 0:
        raise ValueError("beam radius must be positive")
    s3 = math.sqrt(3.0)
    pts = [(0.0, 0.0),
           (-s3 / 2, 1.5), (s3 / 2, 1.5), (s3, 0.0),
           (s3 / 2, -1.5), (-s3 / 2, -1.5), (-s3, 0.0)]
    return radius * np.array(pts)


@dataclass(frozen=True)
class BeamLayout:
    """Beam geometry; users default to one terminal at each beam center."""
    beam_radius: float
    slant_range: float                     # common UT-satellite distance D
    user_positions: np.ndarray | None = None

    def __post_init__(self):
        if self.beam_radius <= 0 or self.slant_range <= 0:
            raise ValueError("radius and slant range must be positive")

    @property
    def centers(self) -> np.ndarray:
        return beam_centers(self.beam_radius)

    @property
    def users(self) -> np.ndarray:
        if self.user_positions is None:
            return self.centers
        return np.asarray(self.user_positions, dtype=float)


def _pattern(u):
    """Tapered-aperture pattern J1(u)/(2u) + 36 J3(u)/u^3, peak 1 at u=0."""
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = np.abs(u) > 1e-7
    un = u[nz]
    out[nz] = sp.jv(1, un) / (2.0 * un) + 36.0 * sp.jv(3, un) / un ** 3
    return out


def beam_gain_matrix(layout: BeamLayout, rf: RfLinkParams) -> np.ndarray:
    """Noise-normalized gain from feed j toward user i; deterministic."""
    users = layout.users
    centers = layout.centers
    d = np.linalg.norm(users[:, None, :] - centers[None, :, :], axis=2)
    theta = np.arctan(d / layout.slant_range)
    u = PATTERN_PEAK_CONST * np.sin(theta) / math.sin(rf.theta_3db_rad)
    amplitude = (SPEED_OF_LIGHT * math.sqrt(rf.gain_tx * rf.gain_rx)
                 / (4.0 * math.pi * rf.carrier_hz * layout.slant_range
                    * math.sqrt(rf.boltzmann * rf.noise_temp_k * rf.bandwidth_hz)))
    return amplitude * _pattern(u)


@dataclass(frozen=True)
class ShadowedRicianParams:
    """Severity m, half multipath power b, line-of-sight power Omega."""
    m: float
    b: float
    omega: float

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("fading severity m must be >= 1")
        if self.b <= 0 or self.omega < 0:
            raise ValueError("need b > 0 and Omega >= 0")

    @property
    def m_int(self) -> int:
        if self.m != int(self.m):
            raise NonIntegerShadowingError(
                f"m={self.m} is not an integer; use the Monte Carlo path")
        return int(self.m)

    @property
    def power_ratio(self) -> float:
        """2bm / (2bm + Omega), the base of the shadowing prefactor."""
        return 2.0 * self.b * self.m / (2.0 * self.b * self.m + self.omega)


def shadowed_rician_pdf(y, p: ShadowedRicianParams):
    """Amplitude density of the shadowed Rician fading gain |d|.

    The confluent factor overflows on its own deep in the tail while the
    Gaussian envelope kills the product, so the two are combined in log
    space, with the large-argument asymptotic of 1F1 past the overflow
    threshold.
    """
    yy = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(yy < 0):
        raise ValueError("amplitude must be nonnegative")
    two_bm = 2.0 * p.b * p.m
    log_pref = p.m * math.log(two_bm / (two_bm + p.omega)) - math.log(p.b)
    arg = p.omega * yy ** 2 / (2.0 * p.b * (two_bm + p.omega))
    log_f = np.empty_like(arg)
    small = arg < 600.0
    log_f[small] = np.log(sp.hyp1f1(p.m, 1.0, arg[small]))
    if np.any(~small):
        # 1F1(a,b,z) ~ Gamma(b)/Gamma(a) e^z z^(a-b) for large z
        za = arg[~small]
        log_f[~small] = za + (p.m - 1.0) * np.log(za) - sp.gammaln(p.m)
    out = np.zeros_like(yy)
    pos = yy > 0
    out[pos] = np.exp(log_pref + np.log(yy[pos])
                      - yy[pos] ** 2 / (2.0 * p.b) + log_f[pos])
    return out if np.ndim(y) else float(out[0])


def _series_coeffs(p: ShadowedRicianParams):
    """(-1)^k (1-m)_k / k! * (Omega/(2 b m))^k, the k-th finite-sum weight."""
    m = p.m_int
    z = p.omega / (2.0 * p.b * p.m) if p.omega > 0 else 0.0
    out = np.empty(m)
    for k in range(m):
        out[k] = ((-1.0) ** k * specfun.pochhammer(1.0 - m, k)
                  / math.factorial(k) * z ** k)
    return out  # equals comb(m-1, k) z^k, all nonnegative


def gamma2_pdf(gamma2, p: ShadowedRicianParams, gbar2: float):
    """User-link SNR density for integer severity (finite-sum form)."""
    m = p.m_int
    if gbar2 <= 0:
        raise ValueError("gbar2 must be positive")
    g = np.atleast_1d(np.asarray(gamma2, dtype=float))
    if np.any(g < 0):
        raise ValueError("gamma2 must be nonnegative")
    coeffs = _series_coeffs(p)
    ratio = m * g / gbar2
    acc = np.zeros_like(g)
    for k in range(m):
        acc += coeffs[k] * ratio ** k / math.factorial(k)
    out = (m / gbar2) * p.power_ratio ** (m - 1) * np.exp(-ratio) * acc
    return out if np.ndim(gamma2) else float(out[0])


def gamma2_ccdf(x, p: ShadowedRicianParams, gbar2: float):
    """Complementary CDF of the user-link SNR, integer severity."""
    m = p.m_int
    if gbar2 <= 0:
        raise ValueError("gbar2 must be positive")
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xx < 0):
        raise ValueError("x must be nonnegative")
    coeffs = _series_coeffs(p)
    ratio = m * xx / gbar2
    acc = np.zeros_like(xx)
    partial = np.zeros_like(xx)   # sum_{j<=k} ratio^j / j!
    for k in range(m):
        partial = partial + ratio ** k / math.factorial(k)
        acc += coeffs[k] * partial
    out = p.power_ratio ** (m - 1) * np.exp(-ratio) * acc
    return out if np.ndim(x) else float(out[0])


def gamma2_mean(p: ShadowedRicianParams, gbar2: float) -> float:
    """E[gamma_2] = gbar2 (2b + Omega)/(2bm + Omega).

    The scale gbar2 absorbs (2bm + Omega) rather than the physical mean
    power 2b + Omega, so the two differ unless m = 1.
    """
    return gbar2 * (2.0 * p.b + p.omega) / (2.0 * p.b * p.m + p.omega)


def sample_shadowed_rician(p: ShadowedRicianParams, rng: np.random.Generator, n: int):
    """Draw |A e^{j phi} + w|: Nakagami LOS amplitude over Rayleigh scatter."""
    los_power = rng.gamma(p.m, p.omega / p.m, n) if p.omega > 0 else np.zeros(n)
    phase = rng.uniform(0.0, 2.0 * math.pi, n)
    los = np.sqrt(los_power) * np.exp(1j * phase)
    scatter = math.sqrt(p.b) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return np.abs(los + scatter)


def sample_gamma2(p: ShadowedRicianParams, gbar2: float,
                  rng: np.random.Generator, n: int):
    """Draw gamma_2 = gbar2 |d|^2 / (2bm + Omega)."""
    d = sample_shadowed_rician(p, rng, n)
    return gbar2 * d ** 2 / (2.0 * p.b * p.m + p.omega)
