"""Regularity of forced scalar conservation laws under nondegeneracy conditions.

Modules: ``flux`` (flux functions and degeneracy sets), ``nondeg``
(nondegeneracy exponent estimation), ``exponents`` (closed-form regularity
exponents), ``solver`` (Godunov finite volumes and exact Riemann solutions),
``kinetic`` (kinetic formulation diagnostics), ``regnorm`` (empirical
regularity) and ``cli``.
"""

from .errors import ComputationError, ConfigError, SclregError
from .exponents import (AveragingExponents, AveragingInputs, averaging_exponents, lpt_baseline,
                        proposition_exponent, scl_exponents, tadmor_tao_baseline)
from .flux import DegeneracySet, Flux, degeneracy_set
from .kinetic import (KineticDefect, VelocityGrid, chi, contraction_check, reconstruct_defect,
                      singular_moment, velocity_average)
from .nondeg import DegeneracyProfile, analyze_flux
from .regnorm import RegularityFit, difference_norm, estimate_exponent
from .solver import GridSpec, SourceSpec, SpaceTimeField, godunov_flux, riemann_exact, solve

__version__ = "0.1.0"

__all__ = [
    "AveragingExponents", "AveragingInputs", "ComputationError", "ConfigError", "DegeneracyProfile",
    "DegeneracySet", "Flux", "GridSpec", "KineticDefect", "RegularityFit", "SclregError", "SourceSpec",
    "SpaceTimeField", "VelocityGrid", "analyze_flux", "averaging_exponents", "chi", "contraction_check",
    "degeneracy_set", "difference_norm", "estimate_exponent", "godunov_flux", "lpt_baseline",
    "proposition_exponent", "reconstruct_defect", "riemann_exact", "scl_exponents", "singular_moment",
    "solve", "tadmor_tao_baseline", "velocity_average",
]
