"""Twisted L2 spectral invariants on finite complexes and surfaces."""
from .vn_core import (AMap, HilbertianModule, PowerLawDensity, StepDensity, VNAlgebra, dilation_compare,
                      dilation_equivalent, dim_tau, spectral_density, trace_tau)
from .complex_core import (FiniteComplex, cohomology_ranks, density_split, euler_identity,
                           homotopy_dilation_check, l2_betti, laplacian, morse_partial_sums)
from .geometry import (CellComplex, FlatTorusGrid, LocalSystem, OneCocycle, TriangulatedSurface, build_cover,
                       genus_surface, harmonic_twist)
from .twisted_spectral import (MultiplierModel, NovikovShubinFit, assemble_twisted_laplacian, exact_flat_density,
                               lambda0, ns_fit, twisted_density)
from .morse import MorseOneForm, NotMorseError, WittenSweep, find_zeros, gap_report, strong_morse_check

__version__ = "0.1.0"
