"""Measurement statistics of quantum order finding under decoherence."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DomainError,
    Divergent,
    InvalidInstance,
    InvalidModulus,
    InvalidOrder,
    NotCoprime,
    ResourceLimit,
)
from .instance import LogBase, Override, ProblemInstance, Standard, build_instance, choose_q, index_set  # noqa: E402
from .spectrum import (  # noqa: E402
    Coherent,
    ConstantBeta,
    Hamming,
    Spectrum,
    coherent_joint,
    constant_beta_mixture,
    decohered_joint,
    fit_constant_beta,
    marginal,
    parse_kernel,
    peak_metrics,
    von_neumann_entropy,
)
from .sampler import SeededGenerator, exact_dephasing_average, sample_outcome, sample_via_dephasing  # noqa: E402
from .recovery import estimate_success_rate, factor_number, recover_period, run_trial  # noqa: E402
