"""Analytic band structure of the uniform square lattice.

The single band is E(k) = omega - 2*kappa*(cos(kx d) + cos(ky d)) with
group velocity 2*kappa*d*(sin(kx d), sin(ky d)). Isofrequency contours
are sampled by bisection along angular rays from the contour center,
which is (0, 0) below the band center and (pi/d, pi/d) above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CamcloakError, NumericError
from .hamiltonian import WaveState
from .lattice import Lattice
from .numerics import bisect_root

# |f| tolerance of the ray bisection; the energy residual is 2*kappa*|f|.
_RAY_FTOL = 1e-11


@dataclass(frozen=True)
class BandParams:
    """Cavity resonance ``omega``, inter-cavity coupling ``kappa`` and
    lattice spacing ``d`` (hbar = 1 energy units)."""

    omega: float = 0.0
    kappa: float = 1.0
    d: float = 1.0

    def __post_init__(self):
        if self.kappa <= 0:
            raise CamcloakError(f"kappa must be positive, got {self.kappa}")
        if self.d <= 0:
            raise CamcloakError(f"spacing d must be positive, got {self.d}")


@dataclass(frozen=True)
class WaveVector:
    """Crystal momentum, folded into the first Brillouin zone
    [-pi/d, pi/d)^2 on construction."""

    kx: float
    ky: float
    d: float = 1.0

    def __post_init__(self):
        if self.d <= 0:
            raise CamcloakError(f"spacing d must be positive, got {self.d}")
        period = 2.0 * math.pi / self.d
        half = math.pi / self.d
        object.__setattr__(self, "kx", (self.kx + half) % period - half)
        object.__setattr__(self, "ky", (self.ky + half) % period - half)

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky])


def band_energy(k: WaveVector, p: BandParams) -> float:
    return p.omega - 2.0 * p.kappa * (math.cos(k.kx * p.d) + math.cos(k.ky * p.d))


def group_velocity(k: WaveVector, p: BandParams) -> tuple[float, float]:
    s = 2.0 * p.kappa * p.d
    return s * math.sin(k.kx * p.d), s * math.sin(k.ky * p.d)


def _contour_setup(e0: float, p: BandParams) -> tuple[float, tuple[float, float]]:
    """Reduced contour constant and center for the ray solve.

    Above the band center the contour closes around the zone corner;
    substituting q = k - (pi/d, pi/d) flips the cosine signs and maps
    both cases onto the same solve around the origin."""
    c = (p.omega - e0) / (2.0 * p.kappa)
    if not abs(c) < 2.0:
        raise CamcloakError(
            f"energy {e0} lies outside the open band "
            f"({p.omega - 4 * p.kappa}, {p.omega + 4 * p.kappa})")
    if c < 0.0:
        return -c, (math.pi / p.d, math.pi / p.d)
    return c, (0.0, 0.0)


def _contour_point(c_eff: float, center: tuple[float, float], theta: float,
                   p: BandParams) -> WaveVector:
    """Solve for the contour radius along one angular ray by bisection."""
    u, v = math.cos(theta), math.sin(theta)
    t_hi = math.pi / (p.d * (abs(u) + abs(v)))

    def f(t):
        return math.cos(t * u * p.d) + math.cos(t * v * p.d) - c_eff

    if abs(f(t_hi)) <= _RAY_FTOL:
        t_root = t_hi
    else:
        t_root = bisect_root(f, 0.0, t_hi, ftol=_RAY_FTOL, xtol_rel=1e-14)
    return WaveVector(center[0] + t_root * u, center[1] + t_root * v, d=p.d)


def isofrequency_contour(e0: float, p: BandParams, n: int) -> list[WaveVector]:
    """n points on the curve E(k) = e0, equally spaced in angle about the
    contour center. Every returned point satisfies the contour equation
    with |E(k) - e0| below 1e-10*kappa."""
    if n < 3:
        raise CamcloakError(f"need at least 3 contour samples, got {n}")
    c_eff, center = _contour_setup(e0, p)
    return [_contour_point(c_eff, center, 2.0 * math.pi * m / n, p)
            for m in range(n)]


def sample_dispersion_surface(p: BandParams, n: int) -> np.ndarray:
    """(n*n, 3) array of (kx, ky, E) over the first Brillouin zone."""
    if n < 2:
        raise CamcloakError("surface sampling needs n >= 2")
    k = np.linspace(-math.pi / p.d, math.pi / p.d, n)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    e = p.omega - 2.0 * p.kappa * (np.cos(kx * p.d) + np.cos(ky * p.d))
    return np.stack([kx.ravel(), ky.ravel(), e.ravel()], axis=1)


def make_point_source(lat: Lattice, p: BandParams, e0: float,
                      center: tuple[float, float], envelope_sigma: float,
                      n_modes: int) -> WaveState:
    """Equal-weight superposition of ``n_modes`` isofrequency-contour
    plane waves under a Gaussian envelope, normalized to unit norm.
    Mimics a point-like emitter at the operating energy."""
    if envelope_sigma <= 0:
        raise CamcloakError(f"envelope sigma must be positive, got {envelope_sigma}")
    if n_modes < 1:
        raise CamcloakError(f"need at least one contour mode, got {n_modes}")
    c_eff, center_k = _contour_setup(e0, p)
    modes = [_contour_point(c_eff, center_k, 2.0 * math.pi * m / n_modes, p)
             for m in range(n_modes)]
    kmat = np.array([[kv.kx, kv.ky] for kv in modes])
    rel = lat.positions - np.asarray(center, dtype=float)
    phases = np.exp(1j * (rel @ kmat.T)).sum(axis=1)
    envelope = np.exp(-(rel ** 2).sum(axis=1) / (2.0 * envelope_sigma ** 2))
    amp = phases * envelope
    norm = np.linalg.norm(amp)
    if not norm > 1e-154:
        raise NumericError("point-source amplitude underflowed to zero norm")
    return WaveState(amplitudes=amp / norm, time=0.0)


def make_gaussian_packet(lat: Lattice, k: WaveVector,
                         center: tuple[float, float],
                         sigma: float) -> WaveState:
    """Gaussian envelope times a single Bloch phase, normalized. The 3-sigma
    support must fit inside the lattice bounding box."""
    if sigma <= 0:
        raise CamcloakError(f"packet sigma must be positive, got {sigma}")
    cx, cy = center
    xmin, ymin = lat.positions.min(axis=0)
    xmax, ymax = lat.positions.max(axis=0)
    if (cx - 3 * sigma < xmin or cx + 3 * sigma > xmax
            or cy - 3 * sigma < ymin or cy + 3 * sigma > ymax):
        raise CamcloakError(
            f"3-sigma packet support around ({cx}, {cy}) extends beyond "
            f"the lattice [{xmin}, {xmax}] x [{ymin}, {ymax}]")
    rel = lat.positions - np.array([cx, cy])
    amp = (np.exp(1j * (lat.positions @ np.array([k.kx, k.ky])))
           * np.exp(-(rel ** 2).sum(axis=1) / (2.0 * sigma ** 2)))
    norm = np.linalg.norm(amp)
    if not norm > 1e-154:
        raise NumericError("gaussian packet amplitude underflowed to zero norm")
    return WaveState(amplitudes=amp / norm, time=0.0)
