"""Independent reference implementations used as test oracles.

Everything here deliberately avoids the package's production code
paths: brute-force enumeration for lattice counting, scipy.integrate
quadrature for the mode integrals, dense linear algebra for spectra,
and directly constructed periodic lattices for Bloch-wave checks.
"""

import math

import numpy as np
from scipy.integrate import quad

from camcloak.lattice import Lattice

C = 2.99792458e8


def brute_force_grid_bonds(nx, ny):
    """Count unordered nearest-neighbor pairs by exhaustive enumeration."""
    sites = [(i, j) for i in range(nx) for j in range(ny)]
    count = 0
    for a in range(len(sites)):
        for b in range(a + 1, len(sites)):
            dx = sites[a][0] - sites[b][0]
            dy = sites[a][1] - sites[b][1]
            if abs(dx) + abs(dy) == 1:
                count += 1
    return count


def brute_force_hole_count(nx, ny, radius, center):
    """Grid points strictly inside the hole, by direct scan."""
    cx, cy = center
    return sum(1 for i in range(nx) for j in range(ny)
               if math.hypot(i - cx, j - cy) < radius)


def make_torus(length, spacing=1.0):
    """Periodic length x length lattice built by direct enumeration;
    periodic boundaries live only in tests."""
    ids = np.arange(length * length, dtype=np.int64)
    ii, jj = np.divmod(ids, length)
    pos = np.stack([ii, jj], axis=1).astype(float) * spacing
    bonds = set()
    for i in range(length):
        for j in range(length):
            a = i * length + j
            for b in (((i + 1) % length) * length + j,
                      i * length + (j + 1) % length):
                if a != b:
                    bonds.add((min(a, b), max(a, b)))
    return Lattice(site_ids=ids, positions=pos,
                   bonds=np.array(sorted(bonds), dtype=np.int64))


def bloch_wave(length, m, n, spacing=1.0):
    """Normalized plane wave on the torus and its wave vector."""
    kx = 2 * math.pi * m / (length * spacing)
    ky = 2 * math.pi * n / (length * spacing)
    ids = np.arange(length * length)
    ii, jj = np.divmod(ids, length)
    amp = np.exp(1j * (kx * ii * spacing + ky * jj * spacing)) / length
    return amp, (kx, ky)


def mode_value(omega, eps_a, eps_b, w, x):
    """Piecewise cavity field without normalization (scalar)."""
    alpha = math.sqrt(eps_a) * omega / C
    beta = math.sqrt(eps_b) * omega / C
    if abs(x) < w / 2:
        return math.cos(alpha * x)
    return math.cos(alpha * w / 2) * math.exp(beta * (w / 2 - abs(x)))


def quad_normalization(omega, eps_a, eps_b, w):
    """Normalization constant by scipy quadrature with declared kinks."""
    beta = math.sqrt(eps_b) * omega / C
    alpha = math.sqrt(eps_a) * omega / C
    cutoff = w / 2 + 60.0 / beta

    def integrand(x):
        eps = eps_a if abs(x) < w / 2 else eps_b
        return eps * mode_value(omega, eps_a, eps_b, w, x) ** 2

    pts = sorted(set([-w / 2, w / 2] + _cos_zero_list(alpha, -w / 2, w / 2)))
    val, _ = quad(integrand, -cutoff, cutoff, points=pts, limit=400,
                  epsabs=0.0, epsrel=1e-13)
    return 1.0 / math.sqrt(val)


def _cos_zero_list(alpha, lo, hi):
    m_lo = math.ceil(alpha * lo / math.pi - 0.5 + 1e-15)
    m_hi = math.floor(alpha * hi / math.pi - 0.5 - 1e-15)
    return [(0.5 + m) * math.pi / alpha for m in range(m_lo, m_hi + 1)]


def quad_coupling(omega, eps_a, eps_b, w, d):
    """Eq.-style overlap coupling by scipy quadrature with all integrand
    kinks declared as breakpoints."""
    alpha = math.sqrt(eps_a) * omega / C
    a_norm = quad_normalization(omega, eps_a, eps_b, w)

    def shape(x):
        return abs(mode_value(omega, eps_a, eps_b, w, x))

    pts = set(_cos_zero_list(alpha, -w / 2, w / 2))
    for p in (d - w / 2, d + w / 2):
        if -w / 2 < p < w / 2:
            pts.add(p)
    pts.update(z + d for z in _cos_zero_list(alpha, -w / 2 - d, w / 2 - d)
               if -w / 2 < z + d < w / 2)
    val, _ = quad(lambda x: shape(x) * shape(x - d), -w / 2, w / 2,
                  points=sorted(pts) or None, limit=400, epsabs=0.0,
                  epsrel=1e-12)
    return (omega / 2) * (eps_a - eps_b) * a_norm ** 2 * val


def rotated_site_map(nx, ny):
    """Site-id image under +90 degree rotation about the grid center,
    id convention id = i*ny + j (requires nx == ny)."""
    assert nx == ny
    out = {}
    for i in range(nx):
        for j in range(ny):
            # (i, j) -> (c - (j - c), c + (i - c)) with c = (n-1)/2
            out[i * ny + j] = (ny - 1 - j) * ny + i
    return out


def contour_radius_scan(c_eff, theta, n_samples=200_000):
    """Radius of the contour cos(t u) + cos(t v) = c_eff along angle
    theta, by dense scan plus linear interpolation (d = 1 units)."""
    u, v = math.cos(theta), math.sin(theta)
    t_hi = math.pi / (abs(u) + abs(v))
    t = np.linspace(0.0, t_hi, n_samples)
    f = np.cos(t * u) + np.cos(t * v) - c_eff
    idx = np.nonzero(f <= 0.0)[0]
    if idx.size == 0:
        return t_hi
    i = idx[0]
    if i == 0:
        return 0.0
    # linear interpolation across the sign change
    t0, t1 = t[i - 1], t[i]
    f0, f1 = f[i - 1], f[i]
    return t0 - f0 * (t1 - t0) / (f1 - f0)
