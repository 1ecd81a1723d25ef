"""Stable super-resolution of nonnegative spike signals from low-pass data.

The package recovers sparse nonnegative signals observed through a
band-limited convolution by minimizing the l1 data mismatch under a
positivity constraint, and ships the analysis machinery around that
recovery: Rayleigh-regularity bookkeeping for spike configurations,
dual-certificate constructions with measured stability constants,
spectrum flattening for triangular (incoherent-light) kernels, and
adversarial lower-bound constructions showing the noise amplification of
any method must grow polynomially in the super-resolution factor.
"""

__version__ = "0.1.0"

from .adversarial import (
    AdversarialPair,
    MCEstimate,
    empirical_naf,
    finite_difference,
    make_adversarial_pair,
    mc_limit_constant,
    mc_lower_bound,
    pushforward_l1,
)
from .certificates import (
    Certificate,
    build_2d_certificate,
    build_separated_certificate,
    certified_error_bound,
    classical_certificate,
    product_certificate,
    stability_constant,
    stability_constant_alpha,
)
from .errors import (
    CertificateError,
    InfeasibleSupportError,
    NumericalError,
    OracleInfeasibleError,
    PartitionError,
    SolverError,
)
from .estimator import SpikeRecovery
from .flattening import (
    FlatteningFilter,
    build_flattening_filter,
    calpha,
    operator_one_norm,
    second_difference_spectrum_bound,
)
from .grid import Grid, GridSignal
from .operators import (
    ForwardOperator,
    FourierMultiplier,
    add_poisson_noise,
    fejer_kernel,
    flat_operator,
    make_flat_spectrum,
    make_triangular_spectrum,
    triangular_operator,
)
from .rayleigh import (
    RayleighParams,
    SupportSet,
    is_regular,
    packing_capacity,
    partition_2d,
    partition_ordered,
    sample_support,
)
from .solver import (
    SolveResult,
    SolverConfig,
    exhaustive_search_oracle,
    huber,
    huber_grad,
    mu0_from_data,
    solve,
)

__all__ = [
    "AdversarialPair",
    "Certificate",
    "CertificateError",
    "FlatteningFilter",
    "ForwardOperator",
    "FourierMultiplier",
    "Grid",
    "GridSignal",
    "InfeasibleSupportError",
    "MCEstimate",
    "NumericalError",
    "OracleInfeasibleError",
    "PartitionError",
    "RayleighParams",
    "SolveResult",
    "SolverConfig",
    "SolverError",
    "SpikeRecovery",
    "SupportSet",
    "add_poisson_noise",
    "build_2d_certificate",
    "build_flattening_filter",
    "build_separated_certificate",
    "calpha",
    "certified_error_bound",
    "classical_certificate",
    "empirical_naf",
    "exhaustive_search_oracle",
    "fejer_kernel",
    "finite_difference",
    "flat_operator",
    "huber",
    "huber_grad",
    "is_regular",
    "make_adversarial_pair",
    "make_flat_spectrum",
    "make_triangular_spectrum",
    "mc_limit_constant",
    "mc_lower_bound",
    "mu0_from_data",
    "operator_one_norm",
    "packing_capacity",
    "partition_2d",
    "partition_ordered",
    "product_certificate",
    "pushforward_l1",
    "sample_support",
    "second_difference_spectrum_bound",
    "solve",
    "stability_constant",
    "stability_constant_alpha",
    "triangular_operator",
]
