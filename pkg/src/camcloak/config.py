"""Configuration loading, validation, and scenario resolution.

Configs are TOML with a fixed schema; unknown keys are rejected with
their full dotted path and physical values are validated at load time.
The bundled `case_study` preset carries the infiltrated-silicon
photonic-crystal parameters used by the permittivity design flow.
"""

from __future__ import annotations

import math
import sys
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dispersion import BandParams
from .errors import ConfigError
from .experiments import (GaussianPacketSpec, HoleSpec, PointSourceSpec,
                          Scenario, source_center_left_of)
from .lattice import CloakSpec
from .permittivity import C_VACUUM, CavityStack

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

_SCHEMA = {
    "physics": {"omega", "kappa"},
    "lattice": {"nx", "ny", "center", "cloak", "hole"},
    "lattice.cloak": {"a", "b"},
    "lattice.hole": {"radius"},
    "source": {"type", "energy", "k", "sigma", "n_modes", "center"},
    "evolve": {"t_final", "dump_interval", "allow_boundary_override"},
    "permittivity": {"lambda_m", "eps_a", "eps_b", "kappa_target",
                     "w_over_lambda", "d_physical_m"},
    "output": {"dir", "format"},
}


@dataclass(frozen=True)
class PermittivityConfig:
    lambda_m: float = 1.5e-6
    eps_a: float = 11.7
    eps_b: float = 2.3
    kappa_target: float = 1e14
    w_over_lambda: float = 0.5
    d_physical_m: float | None = None

    @property
    def omega_optical(self) -> float:
        return 2.0 * math.pi * C_VACUUM / self.lambda_m

    @property
    def width(self) -> float:
        return self.w_over_lambda * self.lambda_m

    def stack(self) -> CavityStack:
        return CavityStack(omega=self.omega_optical, eps_a=self.eps_a,
                           eps_b=self.eps_b, w=self.width)


@dataclass(frozen=True)
class Config:
    omega: float = 0.0
    kappa: float = 1.0
    nx: int = 60
    ny: int = 60
    center: tuple[float, float] | None = None
    cloak_a: float | None = None
    cloak_b: float | None = None
    hole_radius: float | None = None
    source_type: str = "point"
    source_energy: float | None = None
    source_k: tuple[float, float] = (math.pi / 2, 0.0)
    source_sigma: float = 3.0
    source_n_modes: int = 72
    source_center: tuple[float, float] | None = None
    t_final: float = 12.0
    dump_interval: float = 0.5
    allow_boundary_override: bool = False
    permittivity: PermittivityConfig = field(default_factory=PermittivityConfig)
    output_dir: str = "out"
    output_format: str = "csv"

    @property
    def geometry_center(self) -> tuple[float, float]:
        if self.center is not None:
            return self.center
        return ((self.nx - 1) / 2.0, (self.ny - 1) / 2.0)


def _reject_unknown(table: dict, path: str) -> None:
    allowed = _SCHEMA.get(path)
    if allowed is None:
        raise ConfigError(f"unknown section [{path}]")
    for key, value in table.items():
        dotted = f"{path}.{key}"
        if key not in allowed:
            raise ConfigError(f"unknown key `{dotted}`")
        if isinstance(value, dict):
            _reject_unknown(value, dotted)


def _number(table: dict, path: str, key: str, default, *, positive=False):
    value = table.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"`{path}.{key}` must be a number")
    if positive and value <= 0:
        raise ConfigError(f"`{path}.{key}` must be positive, got {value}")
    return float(value)


def _integer(table: dict, path: str, key: str, default, *, minimum=None):
    value = table.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"`{path}.{key}` must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"`{path}.{key}` must be >= {minimum}, got {value}")
    return value


def _pair(table: dict, path: str, key: str, default):
    value = table.get(key, default)
    if value is None:
        return None
    if isinstance(value, (list, tuple)) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool)
            for v in value):
        return (float(value[0]), float(value[1]))
    raise ConfigError(f"`{path}.{key}` must be a pair of numbers")


def parse_config(doc: dict) -> Config:
    for section, table in doc.items():
        if not isinstance(table, dict):
            raise ConfigError(f"top-level key `{section}` must be a section")
        _reject_unknown(table, section)

    phys = doc.get("physics", {})
    omega = _number(phys, "physics", "omega", 0.0)
    kappa = _number(phys, "physics", "kappa", 1.0, positive=True)

    lat = doc.get("lattice", {})
    nx = _integer(lat, "lattice", "nx", 60, minimum=1)
    ny = _integer(lat, "lattice", "ny", 60, minimum=1)
    center = _pair(lat, "lattice", "center", None)
    cloak_a = cloak_b = hole_radius = None
    if "cloak" in lat and "hole" in lat:
        raise ConfigError(
            "`lattice.cloak` and `lattice.hole` are mutually exclusive")
    if "cloak" in lat:
        cloak_a = _number(lat["cloak"], "lattice.cloak", "a", None,
                          positive=True)
        cloak_b = _number(lat["cloak"], "lattice.cloak", "b", None,
                          positive=True)
        if cloak_a is None or cloak_b is None:
            raise ConfigError("`lattice.cloak` needs both `a` and `b`")
        if cloak_a >= cloak_b:
            raise ConfigError(
                f"`lattice.cloak.a` must be less than `lattice.cloak.b`, "
                f"got a={cloak_a}, b={cloak_b}")
    if "hole" in lat:
        hole_radius = _number(lat["hole"], "lattice.hole", "radius", None,
                              positive=True)
        if hole_radius is None:
            raise ConfigError("`lattice.hole` needs `radius`")

    src = doc.get("source", {})
    source_type = src.get("type", "point")
    if source_type not in ("point", "gaussian"):
        raise ConfigError(
            f"`source.type` must be `point` or `gaussian`, got {source_type!r}")
    source_energy = _number(src, "source", "energy", None)
    source_k = _pair(src, "source", "k", (math.pi / 2, 0.0))
    source_sigma = _number(src, "source", "sigma", 3.0, positive=True)
    source_n_modes = _integer(src, "source", "n_modes", 72, minimum=3)
    source_center = _pair(src, "source", "center", None)

    evo = doc.get("evolve", {})
    t_final = _number(evo, "evolve", "t_final", 12.0, positive=True)
    dump_interval = _number(evo, "evolve", "dump_interval", 0.5,
                            positive=True)
    override = evo.get("allow_boundary_override", False)
    if not isinstance(override, bool):
        raise ConfigError("`evolve.allow_boundary_override` must be a boolean")

    perm = doc.get("permittivity", {})
    pcfg = PermittivityConfig(
        lambda_m=_number(perm, "permittivity", "lambda_m", 1.5e-6,
                         positive=True),
        eps_a=_number(perm, "permittivity", "eps_a", 11.7, positive=True),
        eps_b=_number(perm, "permittivity", "eps_b", 2.3, positive=True),
        kappa_target=_number(perm, "permittivity", "kappa_target", 1e14,
                             positive=True),
        w_over_lambda=_number(perm, "permittivity", "w_over_lambda", 0.5,
                              positive=True),
        d_physical_m=_number(perm, "permittivity", "d_physical_m", None,
                             positive=True),
    )
    if pcfg.eps_a <= pcfg.eps_b:
        raise ConfigError(
            f"`permittivity.eps_a` must exceed `permittivity.eps_b`, "
            f"got eps_a={pcfg.eps_a}, eps_b={pcfg.eps_b}")

    out = doc.get("output", {})
    output_dir = out.get("dir", "out")
    output_format = out.get("format", "csv")
    if not isinstance(output_dir, str):
        raise ConfigError("`output.dir` must be a string")
    if output_format not in ("csv", "binary"):
        raise ConfigError(
            f"`output.format` must be `csv` or `binary`, got {output_format!r}")

    return Config(
        omega=omega, kappa=kappa, nx=nx, ny=ny, center=center,
        cloak_a=cloak_a, cloak_b=cloak_b, hole_radius=hole_radius,
        source_type=source_type, source_energy=source_energy,
        source_k=source_k, source_sigma=source_sigma,
        source_n_modes=source_n_modes, source_center=source_center,
        t_final=t_final, dump_interval=dump_interval,
        allow_boundary_override=override, permittivity=pcfg,
        output_dir=output_dir, output_format=output_format)


def load_config(path: str | Path) -> Config:
    """Parse and validate a TOML config file."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_preset(name: str) -> Config:
    """Load a bundled preset config (currently `case_study`)."""
    ref = resources.files("camcloak").joinpath(f"presets/{name}.toml")
    try:
        data = ref.read_bytes()
    except FileNotFoundError:
        raise ConfigError(f"unknown preset {name!r}")
    return parse_config(tomllib.loads(data.decode("utf-8")))


def serialize_config(cfg: Config) -> str:
    """Emit a TOML document that parses back to an equal Config."""
    lines = ["[physics]", f"omega = {cfg.omega!r}", f"kappa = {cfg.kappa!r}",
             "", "[lattice]", f"nx = {cfg.nx}", f"ny = {cfg.ny}"]
    if cfg.center is not None:
        lines.append(f"center = [{cfg.center[0]!r}, {cfg.center[1]!r}]")
    if cfg.cloak_a is not None:
        lines += ["", "[lattice.cloak]", f"a = {cfg.cloak_a!r}",
                  f"b = {cfg.cloak_b!r}"]
    if cfg.hole_radius is not None:
        lines += ["", "[lattice.hole]", f"radius = {cfg.hole_radius!r}"]
    lines += ["", "[source]", f'type = "{cfg.source_type}"']
    if cfg.source_energy is not None:
        lines.append(f"energy = {cfg.source_energy!r}")
    lines.append(f"k = [{cfg.source_k[0]!r}, {cfg.source_k[1]!r}]")
    lines.append(f"sigma = {cfg.source_sigma!r}")
    lines.append(f"n_modes = {cfg.source_n_modes}")
    if cfg.source_center is not None:
        lines.append(
            f"center = [{cfg.source_center[0]!r}, {cfg.source_center[1]!r}]")
    lines += ["", "[evolve]", f"t_final = {cfg.t_final!r}",
              f"dump_interval = {cfg.dump_interval!r}",
              f"allow_boundary_override = {str(cfg.allow_boundary_override).lower()}"]
    p = cfg.permittivity
    lines += ["", "[permittivity]", f"lambda_m = {p.lambda_m!r}",
              f"eps_a = {p.eps_a!r}", f"eps_b = {p.eps_b!r}",
              f"kappa_target = {p.kappa_target!r}",
              f"w_over_lambda = {p.w_over_lambda!r}"]
    if p.d_physical_m is not None:
        lines.append(f"d_physical_m = {p.d_physical_m!r}")
    lines += ["", "[output]", f'dir = "{cfg.output_dir}"',
              f'format = "{cfg.output_format}"']
    return "\n".join(lines) + "\n"


def resolve_scenario(cfg: Config, variant: str = "as-configured") -> Scenario:
    """Build a concrete Scenario from a config.

    ``variant`` selects `uniform`, `cloak`, or `hole` geometry over the
    configured cloak (the hole control reuses the cloak's inner radius);
    `as-configured` keeps whatever the config specifies.
    """
    band = BandParams(omega=cfg.omega, kappa=cfg.kappa, d=1.0)
    gcenter = cfg.geometry_center
    cloak = hole = None
    if variant == "as-configured":
        if cfg.cloak_a is not None:
            cloak = CloakSpec(a=cfg.cloak_a, b=cfg.cloak_b, center=gcenter)
        elif cfg.hole_radius is not None:
            hole = HoleSpec(radius=cfg.hole_radius, center=gcenter)
    elif variant == "uniform":
        pass
    elif variant == "cloak":
        if cfg.cloak_a is None:
            raise ConfigError("variant `cloak` needs a `[lattice.cloak]` section")
        cloak = CloakSpec(a=cfg.cloak_a, b=cfg.cloak_b, center=gcenter)
    elif variant == "hole":
        radius = cfg.cloak_a if cfg.cloak_a is not None else cfg.hole_radius
        if radius is None:
            raise ConfigError(
                "variant `hole` needs a cloak or hole in the config")
        hole = HoleSpec(radius=radius, center=gcenter)
    else:
        raise ConfigError(f"unknown scenario variant {variant!r}")

    source_center = cfg.source_center
    if source_center is None:
        outer = cfg.cloak_b if cfg.cloak_b is not None else (
            2.0 * cfg.hole_radius if cfg.hole_radius is not None else None)
        if outer is not None:
            source_center = source_center_left_of(gcenter, outer,
                                                  cfg.source_sigma)
            # keep rule-derived packets inside the lattice on geometries
            # whose cloak nearly fills the grid
            min_x = 3.0 * cfg.source_sigma
            if source_center[0] < min_x:
                warnings.warn(
                    f"source placement clamped from x={source_center[0]:g} "
                    f"to x={min_x:g} to keep its support on the lattice",
                    stacklevel=2)
                source_center = (min_x, source_center[1])
        else:
            source_center = gcenter

    if cfg.source_type == "point":
        energy = cfg.source_energy
        if energy is None:
            energy = cfg.omega - 3.5 * cfg.kappa
        source = PointSourceSpec(energy=energy, center=source_center,
                                 sigma=cfg.source_sigma,
                                 n_modes=cfg.source_n_modes)
    else:
        source = GaussianPacketSpec(k=cfg.source_k, center=source_center,
                                    sigma=cfg.source_sigma)

    return Scenario(nx=cfg.nx, ny=cfg.ny, source=source,
                    t_final=cfg.t_final, dump_interval=cfg.dump_interval,
                    band=band, cloak=cloak, hole=hole,
                    allow_boundary_override=cfg.allow_boundary_override)
