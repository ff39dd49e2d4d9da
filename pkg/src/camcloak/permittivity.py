"""1D coupled-cavity mode, evanescent coupling integral, and the inverse
solves that turn bond lengths into an inter-site permittivity map.

The cavity field is a cosine core with exponential tails; its
normalization weights the squared field by the step permittivity
profile. The nearest-neighbour coupling is the overlap integral of two
such modes at separation d, with prefactor (omega/2)(eps_a - eps_b).
For separations beyond the cavity width the shifted mode is purely
evanescent over the integration window and the integral has a closed
form; shorter separations are integrated adaptively piecewise. Keeping
the coupling fixed while a deformation changes d then becomes a 1D
root solve in eps_b, done by bisection on a numerically verified
monotone bracket.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (CamcloakError, NonMonotonicBracketError, NoRootError)
from .lattice import Lattice, bond_length_array, bond_midpoint_array
from .numerics import adaptive_quadrature, bisect_root

C_VACUUM = 2.99792458e8  # m/s

_REL_TOL = 1e-9           # relative tolerance of the inverse solves
_MONOTONE_SAMPLES = 17    # bracket pre-check grid
_EPS_B_MARGIN = 1e-6      # keeps the bracket away from eps_a


@dataclass(frozen=True)
class CavityStackBase:
    """Cavity parameters that stay fixed while eps_b is tuned."""

    omega: float   # optical angular frequency, rad/s
    eps_a: float   # in-cavity relative permittivity
    w: float       # cavity width, m

    def __post_init__(self):
        if self.omega <= 0 or self.w <= 0:
            raise CamcloakError("omega and w must be positive")
        if self.eps_a <= 1:
            raise CamcloakError(f"eps_a must exceed 1, got {self.eps_a}")

    def with_eps_b(self, eps_b: float) -> "CavityStack":
        return CavityStack(omega=self.omega, eps_a=self.eps_a,
                           eps_b=eps_b, w=self.w)


@dataclass(frozen=True)
class CavityStack:
    """1D step-profile cavity: eps_a inside a width-w core, eps_b outside."""

    omega: float
    eps_a: float
    eps_b: float
    w: float

    def __post_init__(self):
        if self.omega <= 0 or self.w <= 0:
            raise CamcloakError("omega and w must be positive")
        if not (self.eps_a > self.eps_b >= 1.0):
            raise CamcloakError(
                f"need eps_a > eps_b >= 1, got eps_a={self.eps_a}, "
                f"eps_b={self.eps_b}")

    @property
    def base(self) -> CavityStackBase:
        return CavityStackBase(omega=self.omega, eps_a=self.eps_a, w=self.w)


@dataclass(frozen=True)
class ModeProfile:
    """Normalized fundamental mode of a stack; caches the normalization
    constant and derived wavenumbers."""

    stack: CavityStack
    a_norm: float   # normalization constant A
    alpha: float    # core wavenumber sqrt(eps_a) omega / c
    beta: float     # tail decay constant sqrt(eps_b) omega / c
    edge: float     # cos(alpha w / 2), the core value at the interface


def normalize_mode(stack: CavityStack) -> ModeProfile:
    """Closed-form normalization: integral of eps(x) |E(x)|^2 equals 1."""
    alpha = math.sqrt(stack.eps_a) * stack.omega / C_VACUUM
    beta = math.sqrt(stack.eps_b) * stack.omega / C_VACUUM
    edge = math.cos(alpha * stack.w / 2.0)
    core = stack.eps_a * (stack.w / 2.0
                          + math.sin(alpha * stack.w) / (2.0 * alpha))
    tails = stack.eps_b * edge * edge / beta
    total = core + tails
    if not total > 0.0:
        raise CamcloakError("mode normalization integral is not positive")
    return ModeProfile(stack=stack, a_norm=1.0 / math.sqrt(total),
                       alpha=alpha, beta=beta, edge=edge)


def cavity_mode(x, m: ModeProfile):
    """Field amplitude at position(s) x: cosine core, exponential tails,
    continuous at |x| = w/2."""
    x = np.asarray(x, dtype=float)
    absx = np.abs(x)
    half_w = m.stack.w / 2.0
    core = np.cos(m.alpha * x)
    tail = m.edge * np.exp(m.beta * (half_w - absx))
    out = m.a_norm * np.where(absx < half_w, core, tail)
    return float(out) if out.ndim == 0 else out


def mode_shape_abs(x, m: ModeProfile):
    """|E(x)| without the normalization constant (vectorized helper for
    the overlap integrand)."""
    x = np.asarray(x, dtype=float)
    absx = np.abs(x)
    half_w = m.stack.w / 2.0
    core = np.abs(np.cos(m.alpha * x))
    tail = abs(m.edge) * np.exp(m.beta * (half_w - absx))
    return np.where(absx < half_w, core, tail)


def normalization_residual(m: ModeProfile, *, rtol: float = 1e-12) -> float:
    """|integral eps |E|^2 - 1| evaluated by adaptive quadrature,
    independent of the closed form used to compute A."""
    half_w = m.stack.w / 2.0
    cutoff = half_w + 60.0 / m.beta

    def integrand(x):
        eps = np.where(np.abs(x) < half_w, m.stack.eps_a, m.stack.eps_b)
        return eps * cavity_mode(x, m) ** 2

    val = adaptive_quadrature(integrand, -cutoff, cutoff,
                              breakpoints=[-half_w, half_w], rtol=rtol)
    return abs(val - 1.0)


def _cos_zeros(alpha: float, lo: float, hi: float) -> list[float]:
    """Zeros of cos(alpha x) strictly inside (lo, hi)."""
    if hi <= lo:
        return []
    m_lo = math.ceil((alpha * lo / math.pi) - 0.5 + 1e-15)
    m_hi = math.floor((alpha * hi / math.pi) - 0.5 - 1e-15)
    return [(0.5 + m) * math.pi / alpha for m in range(m_lo, m_hi + 1)]


def _abs_cos_exp_integral(alpha: float, beta: float, lo: float,
                          hi: float) -> float:
    """Closed form of integral |cos(alpha x)| exp(beta x) dx on [lo, hi]."""
    denom = alpha * alpha + beta * beta

    def antideriv(x):
        return math.exp(beta * x) * (beta * math.cos(alpha * x)
                                     + alpha * math.sin(alpha * x)) / denom

    points = [lo] + _cos_zeros(alpha, lo, hi) + [hi]
    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        sign = 1.0 if math.cos(alpha * 0.5 * (a + b)) >= 0.0 else -1.0
        total += sign * (antideriv(b) - antideriv(a))
    return total


def coupling_rate(m: ModeProfile, d: float, *,
                  force_adaptive: bool = False) -> float:
    """Nearest-neighbour coupling at mode separation d (meters):
    (omega/2)(eps_a - eps_b) * integral |E(x)| |E(x - d)| dx over the core.

    ``force_adaptive`` routes separations beyond the cavity width through
    the adaptive integrator as well, for cross-checking the closed form.
    """
    if d <= 0:
        raise CamcloakError(f"separation must be positive, got {d}")
    stack = m.stack
    half_w = stack.w / 2.0
    prefactor = (stack.omega / 2.0) * (stack.eps_a - stack.eps_b) \
        * m.a_norm ** 2
    if d > stack.w and not force_adaptive:
        core = _abs_cos_exp_integral(m.alpha, m.beta, -half_w, half_w)
        return prefactor * abs(m.edge) * math.exp(m.beta * (half_w - d)) * core

    def integrand(x):
        return mode_shape_abs(x, m) * mode_shape_abs(x - d, m)

    breaks = set(_cos_zeros(m.alpha, -half_w, half_w))
    for p in (d - half_w, d + half_w):
        if -half_w < p < half_w:
            breaks.add(p)
    breaks.update(z + d for z in _cos_zeros(m.alpha, -half_w - d, half_w - d)
                  if -half_w < z + d < half_w)
    integral = adaptive_quadrature(integrand, -half_w, half_w,
                                   breakpoints=sorted(breaks), rtol=1e-12)
    return prefactor * integral


def _check_monotone(values: np.ndarray) -> int:
    """Return -1 for strictly decreasing, +1 for strictly increasing;
    raise otherwise."""
    diffs = np.diff(values)
    if np.all(diffs < 0):
        return -1
    if np.all(diffs > 0):
        return 1
    raise NonMonotonicBracketError(
        "coupling is not monotone across the solve bracket")


def monotone_tail_start(m: ModeProfile, *, d_min_factor: float = 1e-3,
                        samples: int = 400) -> float:
    """Smallest separation beyond which the coupling decreases strictly.

    In the deep-overlap regime the two cosine cores beat against each
    other and kappa(d) oscillates; past its last local maximum the decay
    is strictly monotone (evanescent tail). Located by a fine grid scan.
    """
    w = m.stack.w
    grid = np.linspace(d_min_factor * w, 2.0 * w, samples)
    vals = np.array([coupling_rate(m, d) for d in grid])
    rising = np.nonzero(np.diff(vals) > 0.0)[0]
    if rising.size == 0:
        return float(grid[0])
    return float(grid[rising[-1] + 1])


def solve_baseline_spacing(stack: CavityStack, kappa_target: float,
                           *, d_min_factor: float = 1e-3) -> float:
    """Spacing d at which the stack's coupling equals ``kappa_target``
    (relative tolerance 1e-9), by bisection on the monotone-decreasing
    tail of kappa(d).

    The tail can begin below the cavity width; solutions with d <= w are
    admitted but flagged with a warning because the two-cavity
    tight-binding picture degrades at overlap.
    """
    if kappa_target <= 0:
        raise CamcloakError(f"kappa target must be positive, got {kappa_target}")
    m = normalize_mode(stack)
    d_lo = monotone_tail_start(m, d_min_factor=d_min_factor)
    kappa_lo = coupling_rate(m, d_lo)
    if kappa_target > kappa_lo:
        raise NoRootError(
            f"target {kappa_target:.3e} rad/s exceeds the coupling "
            f"{kappa_lo:.3e} at the minimal admissible spacing "
            f"{d_lo:.3e} m (start of the monotone tail)")
    d_hi = max(stack.w, 2.0 * d_lo)
    for _ in range(200):
        if coupling_rate(m, d_hi) < kappa_target:
            break
        d_hi *= 2.0
    else:
        raise NoRootError("coupling never falls below target; check inputs")
    grid = np.linspace(d_lo, d_hi, _MONOTONE_SAMPLES)
    if _check_monotone(np.array([coupling_rate(m, d) for d in grid])) != -1:
        raise NonMonotonicBracketError("coupling must decrease with spacing")
    d_star = bisect_root(lambda d: coupling_rate(m, d) - kappa_target,
                         d_lo, d_hi, ftol=_REL_TOL * kappa_target,
                         xtol_rel=1e-15)
    if d_star <= stack.w:
        warnings.warn(
            f"baseline spacing {d_star:.4e} m does not exceed the cavity "
            f"width {stack.w:.4e} m; the two-cavity tight-binding picture "
            "degrades in this overlap regime", stacklevel=2)
    return d_star


def solve_epsilon_b(stack_base: CavityStackBase, d: float,
                    kappa_target: float) -> float:
    """Inter-cavity permittivity at which the coupling across separation
    d equals ``kappa_target`` (relative tolerance 1e-9). The normalized
    mode, including its tail decay, is recomputed self-consistently at
    every trial eps_b."""
    if kappa_target <= 0:
        raise CamcloakError(f"kappa target must be positive, got {kappa_target}")
    lo, hi = 1.0, stack_base.eps_a - _EPS_B_MARGIN

    def kappa_of(eps_b: float) -> float:
        return coupling_rate(normalize_mode(stack_base.with_eps_b(eps_b)), d)

    grid = np.linspace(lo, hi, _MONOTONE_SAMPLES)
    values = np.array([kappa_of(e) for e in grid])
    direction = _check_monotone(values)
    k_max, k_min = (values[0], values[-1]) if direction == -1 \
        else (values[-1], values[0])
    if kappa_target > k_max:
        raise NoRootError(
            f"target {kappa_target:.3e} rad/s unreachable at spacing "
            f"{d:.4e} m: bond too stretched (max coupling {k_max:.3e})")
    if kappa_target < k_min:
        raise NoRootError(
            f"target {kappa_target:.3e} rad/s unreachable at spacing "
            f"{d:.4e} m: bond too compressed (min coupling {k_min:.3e})")
    return bisect_root(lambda e: kappa_of(e) - kappa_target, lo, hi,
                       ftol=_REL_TOL * kappa_target, xtol_rel=1e-15)


@dataclass(frozen=True)
class BondPermittivity:
    """Solved inter-site permittivity of one bond; ``eps_b`` is NaN when
    no admissible permittivity reaches the target coupling."""

    i: int
    j: int
    length: float       # simulation units
    length_m: float
    midpoint_r: float   # distance of the bond midpoint from the map center
    eps_b: float
    overlap: bool       # physical length <= cavity width
    error: str | None = None

    @property
    def solved(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class PermittivityMap:
    records: list[BondPermittivity]
    baseline_eps_b: float
    d_physical: float

    @property
    def failures(self) -> list[tuple[int, int, str]]:
        return [(r.i, r.j, r.error) for r in self.records if not r.solved]


def permittivity_map(lat: Lattice, stack_base: CavityStackBase,
                     kappa_target: float, d_physical: float,
                     center: tuple[float, float] | None = None
                     ) -> PermittivityMap:
    """Per-bond eps_b keeping the coupling at ``kappa_target`` across the
    (possibly deformed) lattice. ``d_physical`` maps one simulation length
    unit to meters. Bonds at the undeformed unit length take the baseline
    eps_b directly; per-bond no-root failures are aggregated on the
    result rather than raised."""
    if d_physical <= 0:
        raise CamcloakError(f"d_physical must be positive, got {d_physical}")
    if center is None:
        lo = lat.positions.min(axis=0)
        hi = lat.positions.max(axis=0)
        center = tuple(0.5 * (lo + hi))
    lengths = bond_length_array(lat)
    mids = bond_midpoint_array(lat) - np.asarray(center, dtype=float)
    mid_r = np.hypot(mids[:, 0], mids[:, 1])
    baseline = solve_epsilon_b(stack_base, d_physical, kappa_target)

    # Symmetric bonds produce lengths equal to rounding noise; quantizing
    # the cache key well below the solve tolerance makes them share one
    # solve without affecting the result.
    def key_of(length_m: float) -> float:
        return float(f"{length_m:.12e}")

    cache: dict[float, tuple[float, str | None]] = {
        key_of(d_physical): (baseline, None)}

    def solve_cached(length_m: float) -> tuple[float, str | None]:
        key = key_of(length_m)
        hit = cache.get(key)
        if hit is None:
            try:
                hit = (solve_epsilon_b(stack_base, length_m, kappa_target),
                       None)
            except (NoRootError, NonMonotonicBracketError) as exc:
                hit = (math.nan, str(exc))
            cache[key] = hit
        return hit

    records = []
    for (i, j), ln, r in zip(lat.bonds, lengths, mid_r):
        length_m = float(ln) * d_physical
        if abs(ln - 1.0) <= 1e-12:
            eps_b, err = baseline, None
        else:
            eps_b, err = solve_cached(length_m)
        records.append(BondPermittivity(
            i=int(i), j=int(j), length=float(ln), length_m=length_m,
            midpoint_r=float(r), eps_b=eps_b,
            overlap=length_m <= stack_base.w, error=err))
    return PermittivityMap(records=records, baseline_eps_b=baseline,
                           d_physical=d_physical)
