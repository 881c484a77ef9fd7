"""Finite-scale surrogates for the ends of coarse spaces.

The finite side computes annulus chain components over a ladder of radii
and scales; the symbolic side (:mod:`coarse_ends.hyper`) checks connection
and separation certificates for spaces with polynomial parametrisations.
"""
from .core import (
    CoarseMapSample,
    FiniteCoarseInstance,
    ScaleLadder,
    archimedean_check,
    bornologous_modulus,
    build_instance,
    homotopy_distance,
    is_coarsely_connected,
    is_controlled_relation,
    properness_report,
    subset_diameter,
)
from .filtration import (
    EndSystem,
    Partition,
    StabilityReport,
    build_end_system,
    chain_components,
    induced_end_map,
    stable_end_count,
    threads,
)
from .nonscattering import NonscatteringWitness, check_consequences, nonscattering_witness
from .sigma import EscapeChain, SigmaReport, find_escape_chain, omega_map, sigma_report
from .spaces import SpaceRecipe, generate, load, save_report

__version__ = "0.1.0"

__all__ = [
    "CoarseMapSample", "FiniteCoarseInstance", "ScaleLadder", "archimedean_check",
    "bornologous_modulus", "build_instance", "homotopy_distance", "is_coarsely_connected",
    "is_controlled_relation", "properness_report", "subset_diameter",
    "EndSystem", "Partition", "StabilityReport", "build_end_system", "chain_components",
    "induced_end_map", "stable_end_count", "threads",
    "NonscatteringWitness", "check_consequences", "nonscattering_witness",
    "EscapeChain", "SigmaReport", "find_escape_chain", "omega_map", "sigma_report",
    "SpaceRecipe", "generate", "load", "save_report",
]
