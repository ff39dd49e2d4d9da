"""Command-line surface: build-lattice, dispersion, evolve, compare,
and permittivity subcommands.

Exit codes: 0 success, 2 configuration error, 3 numeric failure,
4 I/O error. All outputs are written atomically; the evolve command
overlaps propagation with dump writing through a bounded handoff queue.
"""

from __future__ import annotations

import argparse
import os
import queue
import sys
import threading
from pathlib import Path

from . import config as config_mod
from .dispersion import BandParams, band_energy, isofrequency_contour, \
    sample_dispersion_surface
from .dumps import _atomic_write, dump_filename, read_dump_directory, \
    write_dump
from .errors import CamcloakError, ConfigError
from .experiments import cloak_residual_by_position, run_scenario
from .lattice import (CloakSpec, apply_cloak_transform, build_square_lattice,
                      from_text, punch_hole, to_text)
from .permittivity import CavityStackBase, permittivity_map, \
    solve_baseline_spacing

ENV_OUTPUT_DIR = "CAMCLOAK_OUTPUT_DIR"
# at most this many dumps may sit between the propagator and the writer
WRITE_QUEUE_DEPTH = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="camcloak",
        description="Coupled-cavity lattice cloaking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-lattice", help="write a lattice text file")
    p.add_argument("--nx", type=int, required=True)
    p.add_argument("--ny", type=int, required=True)
    p.add_argument("--cloak", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--hole", type=float, metavar="RADIUS")
    p.add_argument("--center", nargs=2, type=float, metavar=("X", "Y"))
    p.add_argument("--out", required=True)

    p = sub.add_parser("dispersion",
                       help="emit isofrequency contour and dispersion surface CSV")
    p.add_argument("--omega", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--spacing", type=float, default=1.0)
    p.add_argument("--e0", type=float, required=True)
    p.add_argument("--n", type=int, default=360)
    p.add_argument("--contour-out", required=True)
    p.add_argument("--surface-out")
    p.add_argument("--surface-n", type=int, default=128)

    p = sub.add_parser("evolve", help="run a scenario and write field dumps")
    p.add_argument("--config", required=True, help="TOML scenario file")
    p.add_argument("--variant", default="as-configured",
                   choices=["as-configured", "uniform", "cloak", "hole"])
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--format", choices=["csv", "binary"])
    p.add_argument("--paper-scale", action="store_true",
                   help="240x240 lattice with the a=50, b=100 cloak")

    p = sub.add_parser("compare",
                       help="residual between two dump directories")
    p.add_argument("test_dir")
    p.add_argument("reference_dir")
    p.add_argument("--center", nargs=2, type=float, required=True,
                   metavar=("X", "Y"))
    p.add_argument("--radius", type=float, required=True)

    p = sub.add_parser("permittivity",
                       help="per-bond inter-site permittivity CSV")
    p.add_argument("--lattice", required=True, help="lattice text file")
    p.add_argument("--config", required=True, help="TOML config file")
    p.add_argument("--center", nargs=2, type=float, metavar=("X", "Y"))
    p.add_argument("--out", required=True)
    return parser


def _cmd_build_lattice(args) -> int:
    if args.cloak is not None and args.hole is not None:
        raise ConfigError("--cloak and --hole are mutually exclusive")
    lat = build_square_lattice(args.nx, args.ny)
    center = tuple(args.center) if args.center else \
        ((args.nx - 1) / 2.0, (args.ny - 1) / 2.0)
    if args.cloak is not None:
        lat = apply_cloak_transform(
            lat, CloakSpec(a=args.cloak[0], b=args.cloak[1], center=center))
    elif args.hole is not None:
        lat = punch_hole(lat, args.hole, center)
    _atomic_write(Path(args.out), to_text(lat).encode("ascii"))
    print(f"wrote {lat.n_sites} sites, {lat.n_bonds} bonds to {args.out}")
    return 0


def _cmd_dispersion(args) -> int:
    p = BandParams(omega=args.omega, kappa=args.kappa, d=args.spacing)
    points = isofrequency_contour(args.e0, p, args.n)
    lines = ["kx,ky,E"]
    for kv in points:
        lines.append(f"{kv.kx:.17g},{kv.ky:.17g},{band_energy(kv, p):.17g}")
    _atomic_write(Path(args.contour_out),
                  ("\n".join(lines) + "\n").encode("ascii"))
    print(f"wrote {len(points)} contour points to {args.contour_out}")
    if args.surface_out:
        rows = sample_dispersion_surface(p, args.surface_n)
        lines = ["kx,ky,E"]
        lines += [f"{kx:.17g},{ky:.17g},{e:.17g}" for kx, ky, e in rows]
        _atomic_write(Path(args.surface_out),
                      ("\n".join(lines) + "\n").encode("ascii"))
        print(f"wrote {rows.shape[0]} surface samples to {args.surface_out}")
    return 0


def _write_dumps_overlapped(dumps, outdir: Path, fmt: str) -> int:
    """Consume the dump iterator, writing files on a worker thread fed
    through a bounded queue (backpressure blocks the producer)."""
    outdir.mkdir(parents=True, exist_ok=True)
    handoff: queue.Queue = queue.Queue(maxsize=WRITE_QUEUE_DEPTH)
    failures: list[BaseException] = []

    def writer():
        while True:
            item = handoff.get()
            if item is None:
                return
            idx, dump = item
            if failures:
                continue
            try:
                write_dump(dump, fmt, outdir / dump_filename(idx, fmt))
            except BaseException as exc:
                failures.append(exc)

    thread = threading.Thread(target=writer, name="dump-writer")
    thread.start()
    count = 0
    try:
        for idx, dump in enumerate(dumps):
            handoff.put((idx, dump))
            count = idx + 1
            if failures:
                break
    finally:
        handoff.put(None)
        thread.join()
    if failures:
        raise failures[0]
    return count


def _cmd_evolve(args) -> int:
    cfg = config_mod.load_config(args.config)
    if args.paper_scale:
        from dataclasses import replace
        cfg = replace(cfg, nx=240, ny=240, center=None,
                      cloak_a=50.0, cloak_b=100.0, hole_radius=None)
    scenario = config_mod.resolve_scenario(cfg, args.variant)
    fmt = args.format or cfg.output_format
    outdir = Path(args.out or os.environ.get(ENV_OUTPUT_DIR, cfg.output_dir))
    count = _write_dumps_overlapped(run_scenario(scenario), outdir, fmt)
    print(f"wrote {count} dumps to {outdir}")
    return 0


def _cmd_compare(args) -> int:
    test = read_dump_directory(args.test_dir)
    ref = read_dump_directory(args.reference_dir)
    residual = cloak_residual_by_position(
        test, ref, tuple(args.center), args.radius)
    print(f"n_dumps={len(test)}")
    print(f"region_center_x={args.center[0]:.17g}")
    print(f"region_center_y={args.center[1]:.17g}")
    print(f"region_radius={args.radius:.17g}")
    print(f"cloak_residual={residual:.17g}")
    return 0


def _cmd_permittivity(args) -> int:
    cfg = config_mod.load_config(args.config)
    pcfg = cfg.permittivity
    base = CavityStackBase(omega=pcfg.omega_optical, eps_a=pcfg.eps_a,
                           w=pcfg.width)
    d_physical = pcfg.d_physical_m
    if d_physical is None:
        d_physical = solve_baseline_spacing(pcfg.stack(), pcfg.kappa_target)
        print(f"baseline spacing solved: {d_physical:.9e} m", file=sys.stderr)
    with open(args.lattice, "r", encoding="ascii") as fh:
        lat = from_text(fh.read())
    center = tuple(args.center) if args.center else None
    result = permittivity_map(lat, base, pcfg.kappa_target, d_physical,
                              center=center)
    lines = ["i,j,midpoint_r,length_m,eps_b"]
    for r in result.records:
        lines.append(f"{r.i},{r.j},{r.midpoint_r:.17g},"
                     f"{r.length_m:.17g},{r.eps_b:.17g}")
    _atomic_write(Path(args.out), ("\n".join(lines) + "\n").encode("ascii"))
    print(f"wrote {len(result.records)} bonds to {args.out} "
          f"(baseline eps_b = {result.baseline_eps_b:.6f})")
    failures = result.failures
    if failures:
        print(f"{len(failures)} bonds admit no eps_b >= 1 at the target "
              "coupling:", file=sys.stderr)
        for i, j, msg in failures[:20]:
            print(f"  bond ({i}, {j}): {msg}", file=sys.stderr)
        if len(failures) > 20:
            print(f"  ... and {len(failures) - 20} more", file=sys.stderr)
    return 0


_COMMANDS = {
    "build-lattice": _cmd_build_lattice,
    "dispersion": _cmd_dispersion,
    "evolve": _cmd_evolve,
    "compare": _cmd_compare,
    "permittivity": _cmd_permittivity,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except CamcloakError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
