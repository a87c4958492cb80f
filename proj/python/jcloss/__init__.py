"""Jaynes-Cummings simulation of superconducting-resonator loss through a
resonant two-level system.

The heavy lifting lives in the C++ extension ``jcloss._core``; this package
re-exports its public surface.
"""

from jcloss._core import (  # noqa: F401
    ConfigError,
    EstimatorError,
    IntegratorConfig,
    IntegratorError,
    ModelParams,
    OracleCapExceeded,
    TruncationError,
    classify_regime,
    coherent_tls_ground,
    compute_coupling,
    dimensionless_field,
    evolve_bloch,
    evolve_manifold,
    evolve_master,
    evolve_oracle,
    field_per_photon,
    find_ns_min,
    gamma_effective,
    knee_strong,
    knee_weak,
    liouvillian,
    loss_classical,
    loss_saturated,
    loss_strong_unsaturated,
    loss_weak_unsaturated,
    operators,
    quasistatic_tls,
    sweep_loss,
)

__all__ = [
    "ConfigError",
    "EstimatorError",
    "IntegratorConfig",
    "IntegratorError",
    "ModelParams",
    "OracleCapExceeded",
    "TruncationError",
    "classify_regime",
    "coherent_tls_ground",
    "compute_coupling",
    "dimensionless_field",
    "evolve_bloch",
    "evolve_manifold",
    "evolve_master",
    "evolve_oracle",
    "field_per_photon",
    "find_ns_min",
    "gamma_effective",
    "knee_strong",
    "knee_weak",
    "liouvillian",
    "loss_classical",
    "loss_saturated",
    "loss_strong_unsaturated",
    "loss_weak_unsaturated",
    "operators",
    "quasistatic_tls",
    "sweep_loss",
]
