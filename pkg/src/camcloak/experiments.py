"""Scenario runner and cloaking metrics.

A scenario bundles lattice geometry (uniform, cloaked, or bare-hole
control), an initial excitation, and evolution timing. Cloaked and
uniform runs share the same initial state per site id because the
deformation moves plot positions, not basis states; the bare-hole
control deletes sites and genuinely changes the dynamics, which is what
the residual metric quantifies.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

import numpy as np

from .dispersion import BandParams, WaveVector, make_gaussian_packet, \
    make_point_source
from .errors import CamcloakError
from .hamiltonian import build_hamiltonian, evolve
from .lattice import (CloakSpec, Lattice, apply_cloak_transform,
                      build_square_lattice, min_boundary_distance,
                      punch_hole)

# Worst-case wavefront speed used by the boundary-violation rule:
# |v_x| + |v_y| peaks at 4*kappa*d on the square-lattice band.
WAVEFRONT_SPEED_FACTOR = 4.0


@dataclass(frozen=True)
class HoleSpec:
    radius: float
    center: tuple[float, float]

    def __post_init__(self):
        if self.radius <= 0:
            raise CamcloakError(f"hole radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class PointSourceSpec:
    """Isofrequency-contour superposition source."""

    energy: float
    center: tuple[float, float]
    sigma: float
    n_modes: int = 72


@dataclass(frozen=True)
class GaussianPacketSpec:
    """Single-k Gaussian pulse."""

    k: tuple[float, float]
    center: tuple[float, float]
    sigma: float


@dataclass(frozen=True)
class Scenario:
    nx: int
    ny: int
    source: PointSourceSpec | GaussianPacketSpec
    t_final: float
    dump_interval: float
    band: BandParams = BandParams()
    cloak: CloakSpec | None = None
    hole: HoleSpec | None = None
    seed: int = 0
    allow_boundary_override: bool = False
    keep_amplitudes: bool = True

    def __post_init__(self):
        if self.cloak is not None and self.hole is not None:
            raise CamcloakError("scenario cannot carry both a cloak and a hole")
        if self.t_final <= 0 or self.dump_interval <= 0:
            raise CamcloakError("t_final and dump_interval must be positive")


@dataclass
class FieldDump:
    """Timestamped per-site |psi|^2 snapshot at the scenario's (possibly
    transformed) site positions."""

    time: float
    site_ids: np.ndarray
    positions: np.ndarray
    prob: np.ndarray
    amplitudes: np.ndarray | None = None


def source_center_left_of(cloak_center: tuple[float, float], b: float,
                          sigma: float) -> tuple[float, float]:
    """Default excitation placement: 3 sigma plus the outer cloak radius
    to the left of the cloak center, giving normal incidence along +x."""
    return (cloak_center[0] - (b + 3.0 * sigma), cloak_center[1])


def wavefront_time_budget(s: Scenario, lat: Lattice) -> float:
    """Latest t_final for which the conservatively bounded wavefront
    (source support edge moving at 4*kappa*d) stays inside the lattice."""
    speed = WAVEFRONT_SPEED_FACTOR * s.band.kappa * s.band.d
    support = 3.0 * s.source.sigma
    margin = min_boundary_distance(lat, s.source.center) - support
    return margin / speed


def _check_boundary_rule(s: Scenario, lat: Lattice) -> None:
    budget = wavefront_time_budget(s, lat)
    if s.t_final <= budget:
        return
    msg = (f"wavefront can reach the lattice boundary: t_final={s.t_final:g} "
           f"exceeds the budget {budget:g} for this source placement")
    if s.allow_boundary_override:
        warnings.warn("boundary violation overridden: " + msg, stacklevel=3)
    else:
        raise CamcloakError(msg + " (set allow_boundary_override to proceed)")


def scenario_lattices(s: Scenario) -> tuple[Lattice, Lattice]:
    """(source lattice, display lattice) for the scenario.

    Cloaked runs prepare the excitation on the untransformed geometry --
    the deformation relocates positions, not basis states -- and attach
    transformed positions to the dumps. Hole runs use the punched lattice
    for both."""
    base = build_square_lattice(s.nx, s.ny)
    if s.cloak is not None:
        return base, apply_cloak_transform(base, s.cloak)
    if s.hole is not None:
        holed = punch_hole(base, s.hole.radius, s.hole.center)
        return holed, holed
    return base, base


def _initial_state(s: Scenario, lat: Lattice):
    if isinstance(s.source, PointSourceSpec):
        return make_point_source(lat, s.band, s.source.energy,
                                 s.source.center, s.source.sigma,
                                 s.source.n_modes)
    k = WaveVector(s.source.k[0], s.source.k[1], d=s.band.d)
    return make_gaussian_packet(lat, k, s.source.center, s.source.sigma)


def run_scenario(s: Scenario) -> Iterator[FieldDump]:
    """Propagate the scenario, yielding the initial snapshot and one dump
    per cadence boundary (final time always included). Deterministic for
    a fixed scenario."""
    source_lat, display_lat = scenario_lattices(s)
    _check_boundary_rule(s, source_lat)
    psi0 = _initial_state(s, source_lat)
    ham = build_hamiltonian(display_lat, s.band)

    def dump_of(state):
        return FieldDump(
            time=state.time,
            site_ids=display_lat.site_ids,
            positions=display_lat.positions,
            prob=state.probabilities(),
            amplitudes=state.amplitudes.copy() if s.keep_amplitudes else None)

    yield dump_of(psi0)
    for state in evolve(ham, psi0, s.t_final, s.dump_interval):
        yield dump_of(state)


def control_variants(s: Scenario) -> tuple[Scenario, Scenario, Scenario]:
    """(uniform, cloaked, bare-hole) scenarios sharing source and timing.
    The control hole has radius a at the cloak center."""
    if s.cloak is None:
        raise CamcloakError("control variants need a scenario with a cloak")
    uniform = replace(s, cloak=None, hole=None)
    holed = replace(s, cloak=None,
                    hole=HoleSpec(radius=s.cloak.a, center=s.cloak.center))
    return uniform, s, holed


def accumulate_intensity(dumps: Iterable[FieldDump]) -> FieldDump:
    """Per-site sum of |psi|^2 over time (not renormalized); the beam
    figures plot this superposition."""
    total = None
    for dump in dumps:
        if total is None:
            total = FieldDump(time=dump.time, site_ids=dump.site_ids,
                              positions=dump.positions,
                              prob=dump.prob.copy(), amplitudes=None)
        else:
            if (dump.site_ids.size != total.site_ids.size
                    or np.any(dump.site_ids != total.site_ids)):
                raise CamcloakError("dumps cover different site sets")
            total.prob += dump.prob
            total.time = dump.time
    if total is None:
        raise CamcloakError("need at least one dump to accumulate")
    return total


def cloak_residual(test: Sequence[FieldDump], reference: Sequence[FieldDump],
                   center: tuple[float, float], radius: float) -> float:
    """Max over dumps of the relative L2 difference of |psi|^2 outside
    ``radius`` about ``center``. Site sets are matched by id, so the
    bare-hole control restricts to surviving sites."""
    test = list(test)
    reference = list(reference)
    if len(test) != len(reference):
        raise CamcloakError(
            f"dump sequences differ in length: {len(test)} vs {len(reference)}")
    worst = 0.0
    for td, rd in zip(test, reference):
        if abs(td.time - rd.time) > 1e-9 * max(1.0, abs(rd.time)):
            raise CamcloakError(
                f"dump times differ: {td.time} vs {rd.time}")
        common, t_idx, r_idx = np.intersect1d(
            td.site_ids, rd.site_ids, return_indices=True)
        if common.size == 0:
            raise CamcloakError("dump site sets do not intersect")
        rel = rd.positions[r_idx] - np.asarray(center, dtype=float)
        in_region = np.hypot(rel[:, 0], rel[:, 1]) > radius
        if not in_region.any():
            raise CamcloakError(
                f"no sites outside radius {radius} about {center}")
        diff = td.prob[t_idx][in_region] - rd.prob[r_idx][in_region]
        ref_norm = np.linalg.norm(rd.prob[r_idx][in_region])
        diff_norm = np.linalg.norm(diff)
        if ref_norm == 0.0:
            worst = max(worst, 0.0 if diff_norm == 0.0 else np.inf)
        else:
            worst = max(worst, float(diff_norm / ref_norm))
    return worst


def cloak_residual_by_position(test: Sequence[FieldDump],
                               reference: Sequence[FieldDump],
                               center: tuple[float, float],
                               radius: float) -> float:
    """Like :func:`cloak_residual`, but matches sites by coordinates
    instead of ids, for dumps re-read from files (which only carry
    positional ids). Sites outside ``radius`` are untouched by both the
    cloak transform and the hole punch, so their positions coincide
    across geometries."""
    test = list(test)
    reference = list(reference)
    if len(test) != len(reference):
        raise CamcloakError(
            f"dump sequences differ in length: {len(test)} vs {len(reference)}")

    def region_table(dump: FieldDump) -> dict[tuple[float, float], float]:
        rel = dump.positions - np.asarray(center, dtype=float)
        mask = np.hypot(rel[:, 0], rel[:, 1]) > radius
        return {(round(float(x), 9), round(float(y), 9)): float(p)
                for (x, y), p in zip(dump.positions[mask], dump.prob[mask])}

    worst = 0.0
    for td, rd in zip(test, reference):
        if abs(td.time - rd.time) > 1e-9 * max(1.0, abs(rd.time)):
            raise CamcloakError(f"dump times differ: {td.time} vs {rd.time}")
        ref_tab = region_table(rd)
        test_tab = region_table(td)
        if not ref_tab:
            raise CamcloakError(
                f"no sites outside radius {radius} about {center}")
        if set(ref_tab) != set(test_tab):
            raise CamcloakError(
                "region site positions differ between the two runs")
        keys = list(ref_tab)
        ref_vec = np.array([ref_tab[k] for k in keys])
        diff = np.array([test_tab[k] for k in keys]) - ref_vec
        ref_norm = np.linalg.norm(ref_vec)
        diff_norm = np.linalg.norm(diff)
        if ref_norm == 0.0:
            worst = max(worst, 0.0 if diff_norm == 0.0 else np.inf)
        else:
            worst = max(worst, float(diff_norm / ref_norm))
    return worst


def centroid_velocity(dumps: Sequence[FieldDump]) -> tuple[float, float]:
    """Least-squares slope of the intensity centroid over time."""
    dumps = list(dumps)
    if len(dumps) < 2:
        raise CamcloakError("need at least two dumps to fit a velocity")
    times = np.array([d.time for d in dumps])
    if np.ptp(times) <= 0:
        raise CamcloakError("dump times are degenerate")
    centroids = np.array([
        (d.prob @ d.positions) / d.prob.sum() for d in dumps])
    vx = np.polyfit(times, centroids[:, 0], 1)[0]
    vy = np.polyfit(times, centroids[:, 1], 1)[0]
    return float(vx), float(vy)


def state_difference(test: Sequence[FieldDump],
                     reference: Sequence[FieldDump]) -> float:
    """Max-norm amplitude difference across paired dumps (requires
    amplitudes kept and identical site sets)."""
    test = list(test)
    reference = list(reference)
    if len(test) != len(reference):
        raise CamcloakError("dump sequences differ in length")
    worst = 0.0
    for td, rd in zip(test, reference):
        if td.amplitudes is None or rd.amplitudes is None:
            raise CamcloakError("state comparison needs stored amplitudes")
        if td.site_ids.size != rd.site_ids.size or \
                np.any(td.site_ids != rd.site_ids):
            raise CamcloakError("state comparison needs identical site sets")
        worst = max(worst, float(np.abs(td.amplitudes - rd.amplitudes).max()))
    return worst


def ring_asymmetry(dump: FieldDump, center: tuple[float, float],
                   n_sectors: int = 8) -> float:
    """Relative RMS spread of the intensity-weighted mean radius across
    angular sectors about ``center``.

    An isotropically expanding ring has the same mean radius in every
    direction; raw per-sector intensity sums would instead measure how
    many lattice sites each sector happens to contain."""
    rel = dump.positions - np.asarray(center, dtype=float)
    radii = np.hypot(rel[:, 0], rel[:, 1])
    angles = np.arctan2(rel[:, 1], rel[:, 0])
    sector = ((angles + np.pi) / (2 * np.pi) * n_sectors).astype(int) % n_sectors
    weight = np.zeros(n_sectors)
    moment = np.zeros(n_sectors)
    np.add.at(weight, sector, dump.prob)
    np.add.at(moment, sector, dump.prob * radii)
    if np.any(weight <= 0):
        raise CamcloakError("a sector carries no intensity")
    mean_r = moment / weight
    overall = mean_r.mean()
    return float(np.sqrt(np.mean((mean_r - overall) ** 2)) / overall)
