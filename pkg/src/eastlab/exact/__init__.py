"""Exact finite-state computations: generators, spectra, networks, persistence."""

from .generator import MAX_EXACT_SITES, RateMatrix, build_generator, stationary_vector
from .spectral import (
    SpectralResult,
    bottleneck_lower_bound,
    dirichlet_form,
    dirichlet_form_indicator,
    spectral_gap,
    variance,
)
from .network import (
    FlowField,
    HarmonicSolution,
    HittingResult,
    ThomsonReport,
    capacity,
    hitting_set_vacancy,
    mean_hitting_time,
    resistance,
    thomson_check,
)
from .evolve import (
    autocorrelation,
    fit_decay_rate,
    killed_generator,
    persistence_exact,
)

__all__ = [
    "MAX_EXACT_SITES",
    "RateMatrix",
    "build_generator",
    "stationary_vector",
    "SpectralResult",
    "spectral_gap",
    "dirichlet_form",
    "dirichlet_form_indicator",
    "bottleneck_lower_bound",
    "variance",
    "FlowField",
    "HarmonicSolution",
    "HittingResult",
    "ThomsonReport",
    "capacity",
    "resistance",
    "thomson_check",
    "mean_hitting_time",
    "hitting_set_vacancy",
    "autocorrelation",
    "fit_decay_rate",
    "killed_generator",
    "persistence_exact",
]
