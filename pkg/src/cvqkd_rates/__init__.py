"""Security analysis of single-quadrature-modulated coherent-state CV-QKD.

Collective-attack key-rate lower bounds, physicality-constrained
worst-case attacks and security-region maps, with the symmetric
two-quadrature protocol as baseline.
"""

from .errors import (
    CVQKDError,
    DegenerateMeasurement,
    DomainError,
    EmptyRegion,
    NonPhysicalMatrix,
    NoPositiveRate,
)
from .symplectic import (
    OMEGA,
    OMEGA_SINGLE,
    SYMPLECTIC_TOL,
    ConditionalCovariance,
    SymplecticSpectrum,
    TwoModeCovariance,
    bosonic_entropy,
    condition_on_x_homodyne,
    is_physical,
    symplectic_eigenvalues,
    symplectic_eigenvalues_generic,
)
from .protocols import (
    ChannelParams,
    PhysicalityParabola,
    PQuadObservation,
    ProtocolConfig,
    Variant,
    build_epr_input,
    estimated_c_p,
    gg02_output,
    loss_db_from_transmittance,
    physicality_parabola,
    transmittance_from_loss_db,
    ud_channel_output,
)
from .keyrates import (
    KeyRateResult,
    SearchSettings,
    asymptotic_key_rate_strong_loss,
    asymptotic_key_rate_strong_modulation,
    gg02_key_rate,
    holevo_bound,
    key_rate_at,
    key_rate_curve,
    mutual_information,
    protocol_key_rate,
    ud_noiseless_exact,
    worst_case_key_rate,
)
from .regions import (
    RegionMap,
    RegionRecord,
    SweepCurve,
    key_rate_vs_cp,
    key_rate_vs_loss,
    max_secure_v_p_b,
    max_tolerable_noise,
    scan_region,
)

__version__ = "0.1.0"

__all__ = [
    "CVQKDError",
    "DomainError",
    "NonPhysicalMatrix",
    "DegenerateMeasurement",
    "EmptyRegion",
    "NoPositiveRate",
    "OMEGA",
    "OMEGA_SINGLE",
    "SYMPLECTIC_TOL",
    "TwoModeCovariance",
    "SymplecticSpectrum",
    "ConditionalCovariance",
    "bosonic_entropy",
    "condition_on_x_homodyne",
    "is_physical",
    "symplectic_eigenvalues",
    "symplectic_eigenvalues_generic",
    "ChannelParams",
    "PhysicalityParabola",
    "PQuadObservation",
    "ProtocolConfig",
    "Variant",
    "build_epr_input",
    "estimated_c_p",
    "gg02_output",
    "loss_db_from_transmittance",
    "physicality_parabola",
    "transmittance_from_loss_db",
    "ud_channel_output",
    "KeyRateResult",
    "SearchSettings",
    "asymptotic_key_rate_strong_loss",
    "asymptotic_key_rate_strong_modulation",
    "gg02_key_rate",
    "holevo_bound",
    "key_rate_at",
    "key_rate_curve",
    "mutual_information",
    "protocol_key_rate",
    "ud_noiseless_exact",
    "worst_case_key_rate",
    "RegionMap",
    "RegionRecord",
    "SweepCurve",
    "key_rate_vs_cp",
    "key_rate_vs_loss",
    "max_secure_v_p_b",
    "max_tolerable_noise",
    "scan_region",
]
