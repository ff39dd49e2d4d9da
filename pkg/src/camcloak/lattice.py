"""Square cavity lattices and their geometric deformations.

A lattice is a set of sites (stable integer ids plus 2D positions in
units of the baseline spacing) and a set of nearest-neighbor bonds.
The cloak transform relocates site positions inside a disk while
leaving the bond graph untouched; the bare-hole control deletes sites
instead. Site ids never change meaning across these operations, which
is what makes run-to-run state comparisons well defined.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CamcloakError

DEFAULT_SITE_CAP = 4_000_000


@dataclass(frozen=True)
class CloakSpec:
    """Circular cloak geometry: hidden-region radius ``a``, outer radius
    ``b`` and center, all in units of the baseline spacing."""

    a: float
    b: float
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if not (0.0 < self.a < self.b):
            raise CamcloakError(
                f"cloak radii must satisfy 0 < a < b, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class Lattice:
    """Immutable site/bond collection.

    ``site_ids`` is ascending; ``bonds`` stores (i, j) site-id pairs with
    i < j. ``extent`` records the generating grid dimensions when known.
    """

    site_ids: np.ndarray
    positions: np.ndarray
    bonds: np.ndarray
    extent: tuple[int, int] | None = None
    spacing: float = 1.0
    transformed: bool = field(default=False, compare=False)

    def __post_init__(self):
        ids = np.ascontiguousarray(self.site_ids, dtype=np.int64)
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        bonds = np.ascontiguousarray(self.bonds, dtype=np.int64).reshape(-1, 2)
        if ids.size == 0:
            raise CamcloakError("lattice must contain at least one site")
        if np.any(np.diff(ids) <= 0):
            raise CamcloakError("site ids must be strictly ascending")
        if pos.shape != (ids.size, 2):
            raise CamcloakError(
                f"positions shape {pos.shape} does not match {ids.size} sites")
        if bonds.size:
            if np.any(bonds[:, 0] == bonds[:, 1]):
                raise CamcloakError("bond endpoints must be distinct")
            lo = np.minimum(bonds[:, 0], bonds[:, 1])
            hi = np.maximum(bonds[:, 0], bonds[:, 1])
            bonds = np.stack([lo, hi], axis=1)
            order = np.lexsort((bonds[:, 1], bonds[:, 0]))
            bonds = bonds[order]
            if np.any((np.diff(bonds[:, 0]) == 0) & (np.diff(bonds[:, 1]) == 0)):
                raise CamcloakError("duplicate bonds are not allowed")
            present = np.isin(bonds, ids)
            if not present.all():
                raise CamcloakError("bond references a missing site id")
        for arr in (ids, pos, bonds):
            arr.setflags(write=False)
        object.__setattr__(self, "site_ids", ids)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "bonds", bonds)

    @property
    def n_sites(self) -> int:
        return self.site_ids.size

    @property
    def n_bonds(self) -> int:
        return self.bonds.shape[0]

    def index_of(self, ids: np.ndarray) -> np.ndarray:
        """Row indices of the given site ids (which must all exist)."""
        idx = np.searchsorted(self.site_ids, ids)
        if np.any(idx >= self.n_sites) or np.any(self.site_ids[idx] != ids):
            raise CamcloakError("unknown site id in lookup")
        return idx

    def bond_indices(self) -> np.ndarray:
        """Bonds as (M, 2) row indices into ``positions``."""
        return self.index_of(self.bonds.ravel()).reshape(-1, 2)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_sites, dtype=np.int64)
        if self.n_bonds:
            np.add.at(deg, self.bond_indices().ravel(), 1)
        return deg


def build_square_lattice(nx: int, ny: int, *,
                         max_sites: int = DEFAULT_SITE_CAP) -> Lattice:
    """Uniform nx-by-ny grid with unit spacing, open boundaries, and
    bonds on the 4-neighborhood. Site id of grid node (i, j) is i*ny + j."""
    if nx < 1 or ny < 1:
        raise CamcloakError(f"grid dimensions must be >= 1, got {nx}x{ny}")
    n = nx * ny
    if n > max_sites:
        raise CamcloakError(f"{nx}x{ny} = {n} sites exceeds cap {max_sites}")
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    ids = (ii * ny + jj).ravel()
    pos = np.stack([ii.ravel(), jj.ravel()], axis=1).astype(np.float64)
    horiz = np.stack([ids.reshape(nx, ny)[:-1].ravel(),
                      ids.reshape(nx, ny)[1:].ravel()], axis=1)
    vert = np.stack([ids.reshape(nx, ny)[:, :-1].ravel(),
                     ids.reshape(nx, ny)[:, 1:].ravel()], axis=1)
    bonds = np.concatenate([horiz, vert]) if n > 1 else np.empty((0, 2), np.int64)
    return Lattice(site_ids=ids, positions=pos, bonds=bonds, extent=(nx, ny))


def apply_cloak_transform(lat: Lattice, spec: CloakSpec) -> Lattice:
    """Relocate every site with radius r < b to r' = ((b-a)/b) r + a at the
    same polar angle about the cloak center. Bond set is untouched, so the
    tight-binding Hamiltonian built from the result is identical to the
    uniform one.

    A site exactly at the center has undefined angle; atan2(0, 0) = 0
    places it at (a, 0) relative to the center.
    """
    if lat.transformed:
        raise CamcloakError("lattice already carries a cloak transform")
    cx, cy = spec.center
    rel = lat.positions - np.array([cx, cy])
    r = np.hypot(rel[:, 0], rel[:, 1])
    phi = np.arctan2(rel[:, 1], rel[:, 0])
    inside = r < spec.b
    r_new = np.where(inside, (spec.b - spec.a) / spec.b * r + spec.a, r)
    pos = lat.positions.copy()
    pos[inside, 0] = cx + r_new[inside] * np.cos(phi[inside])
    pos[inside, 1] = cy + r_new[inside] * np.sin(phi[inside])
    return replace(lat, positions=pos, transformed=True)


def punch_hole(lat: Lattice, radius: float,
               center: tuple[float, float]) -> Lattice:
    """Delete all sites strictly within ``radius`` of ``center`` along with
    their incident bonds. Surviving site ids are preserved."""
    if radius <= 0:
        raise CamcloakError(f"hole radius must be positive, got {radius}")
    rel = lat.positions - np.asarray(center, dtype=float)
    keep = np.hypot(rel[:, 0], rel[:, 1]) >= radius
    if not keep.any():
        raise CamcloakError("hole would delete every site")
    kept_ids = lat.site_ids[keep]
    bond_ok = np.isin(lat.bonds, kept_ids).all(axis=1)
    return replace(lat, site_ids=kept_ids, positions=lat.positions[keep],
                   bonds=lat.bonds[bond_ok])


def bond_length_array(lat: Lattice) -> np.ndarray:
    """Euclidean length of each bond, aligned with ``lat.bonds`` rows."""
    idx = lat.bond_indices()
    delta = lat.positions[idx[:, 0]] - lat.positions[idx[:, 1]]
    return np.hypot(delta[:, 0], delta[:, 1])


def bond_midpoint_array(lat: Lattice) -> np.ndarray:
    """Midpoint coordinates of each bond, aligned with ``lat.bonds`` rows."""
    idx = lat.bond_indices()
    return 0.5 * (lat.positions[idx[:, 0]] + lat.positions[idx[:, 1]])


def bond_lengths(lat: Lattice) -> list[tuple[tuple[int, int], float]]:
    """Per-bond ((i, j), length) pairs at the current site positions."""
    lengths = bond_length_array(lat)
    return [((int(i), int(j)), float(ln))
            for (i, j), ln in zip(lat.bonds, lengths)]


def to_text(lat: Lattice) -> str:
    """Column-text serialization: `# id x y` rows, then a `# i j` bond
    section."""
    lines = ["# id x y"]
    for sid, (x, y) in zip(lat.site_ids, lat.positions):
        lines.append(f"{sid} {x:.17g} {y:.17g}")
    lines.append("# i j")
    for i, j in lat.bonds:
        lines.append(f"{i} {j}")
    return "\n".join(lines) + "\n"


def from_text(text: str) -> Lattice:
    """Parse the serialization produced by :func:`to_text`."""
    ids: list[int] = []
    pos: list[tuple[float, float]] = []
    bonds: list[tuple[int, int]] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = line[1:].split()
            if header == ["id", "x", "y"]:
                section = "sites"
            elif header == ["i", "j"]:
                section = "bonds"
            else:
                raise CamcloakError(f"line {lineno}: unknown section {line!r}")
            continue
        parts = line.split()
        if section == "sites":
            if len(parts) != 3:
                raise CamcloakError(f"line {lineno}: expected `id x y`")
            ids.append(int(parts[0]))
            pos.append((float(parts[1]), float(parts[2])))
        elif section == "bonds":
            if len(parts) != 2:
                raise CamcloakError(f"line {lineno}: expected `i j`")
            bonds.append((int(parts[0]), int(parts[1])))
        else:
            raise CamcloakError(f"line {lineno}: data before section header")
    if not ids:
        raise CamcloakError("lattice file contains no sites")
    order = np.argsort(ids)
    ids_arr = np.asarray(ids, dtype=np.int64)[order]
    pos_arr = np.asarray(pos, dtype=np.float64)[order]
    bonds_arr = (np.asarray(bonds, dtype=np.int64).reshape(-1, 2)
                 if bonds else np.empty((0, 2), np.int64))
    # Geometry in the file may already carry a transform; lengths of 1
    # for every bond identify a pristine grid, anything else is treated
    # as deformed.
    lat = Lattice(site_ids=ids_arr, positions=pos_arr, bonds=bonds_arr)
    if lat.n_bonds:
        uniform = np.allclose(bond_length_array(lat), 1.0, atol=1e-12)
    else:
        uniform = True
    return replace(lat, transformed=not uniform)


def centered_cloak(nx: int, ny: int, a: float, b: float) -> CloakSpec:
    """CloakSpec centered on the grid; for even dimensions the center
    falls between sites."""
    return CloakSpec(a=a, b=b, center=((nx - 1) / 2.0, (ny - 1) / 2.0))


def min_boundary_distance(lat: Lattice, point: tuple[float, float]) -> float:
    """Distance from ``point`` to the nearest edge of the position
    bounding box."""
    x, y = point
    xmin, ymin = lat.positions.min(axis=0)
    xmax, ymax = lat.positions.max(axis=0)
    return float(min(x - xmin, xmax - x, y - ymin, ymax - y))


