"""camcloak: transformation optics on coupled-cavity lattices.

Builds square cavity arrays, deforms them into circular cloaks,
propagates single-photon wavefunctions under the tight-binding
Hamiltonian, and solves for the inter-site permittivity profile that
keeps the coupling uniform across the deformation.
"""

from .dispersion import (BandParams, WaveVector, band_energy,
                         group_velocity, isofrequency_contour,
                         make_gaussian_packet, make_point_source)
from .errors import (AccuracyError, CamcloakError, ConfigError,
                     DumpFormatError, NonMonotonicBracketError, NoRootError,
                     NumericError)
from .experiments import (FieldDump, GaussianPacketSpec, HoleSpec,
                          PointSourceSpec, Scenario, accumulate_intensity,
                          centroid_velocity, cloak_residual,
                          control_variants, run_scenario)
from .hamiltonian import (HamiltonianOp, WaveState, apply, build_hamiltonian,
                          dense_expm_reference, evolve, spectral_bounds)
from .lattice import (CloakSpec, Lattice, apply_cloak_transform,
                      bond_lengths, build_square_lattice, centered_cloak,
                      punch_hole)
from .permittivity import (CavityStack, CavityStackBase, ModeProfile,
                           cavity_mode, coupling_rate, normalize_mode,
                           permittivity_map, solve_baseline_spacing,
                           solve_epsilon_b)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "BandParams", "CamcloakError", "CavityStack",
    "CavityStackBase", "CloakSpec", "ConfigError", "DumpFormatError",
    "FieldDump", "GaussianPacketSpec", "HamiltonianOp", "HoleSpec",
    "Lattice", "ModeProfile", "NoRootError", "NonMonotonicBracketError",
    "NumericError", "PointSourceSpec", "Scenario", "WaveState",
    "WaveVector", "accumulate_intensity", "apply", "apply_cloak_transform",
    "band_energy", "bond_lengths", "build_hamiltonian",
    "build_square_lattice", "cavity_mode", "centered_cloak",
    "centroid_velocity", "cloak_residual", "control_variants",
    "coupling_rate", "dense_expm_reference", "evolve", "group_velocity",
    "isofrequency_contour", "make_gaussian_packet", "make_point_source",
    "normalize_mode", "permittivity_map", "punch_hole", "run_scenario",
    "solve_baseline_spacing", "solve_epsilon_b", "spectral_bounds",
]
