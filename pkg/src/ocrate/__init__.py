"""Rate regions and code simulation for lossy source coding whose
reconstruction is required to follow a prescribed output law."""

from .info import (
    CapExceeded,
    Channel,
    DistortionMatrix,
    DomainError,
    JointPmf,
    Pmf,
    all_blocks,
    binary_entropy,
    block_index,
    block_of_index,
    conditional_entropy,
    conditional_entropy_grouping,
    empirical_pmf,
    entropy,
    kl_divergence,
    mutual_information,
    product_extension,
    total_variation,
)
from .transport import (
    Coupling,
    MonotoneMap,
    TransportProblem,
    monotone_coupling_quadratic,
    sample_coupling_conditional,
    solve_ot,
)
from .region import (
    ConstraintViolation,
    GaussianSpec,
    MarkovTriple,
    MembershipResult,
    RatePoint,
    RegionCurve,
    bsc_boundary,
    c0_bsc,
    det_decoder_min_rate,
    empirical_region_min_rate,
    gaussian_boundary,
    gaussian_mmi,
    i0_solver,
    mmi_constrained_output,
    region_membership,
    synthesis_inner_min_sum_rate_bsc,
    wyner_bsc,
)
from .codesim import (
    SimConfig,
    SimReport,
    decode,
    generate_codebook,
    likelihood_encode,
    mixture_output_law,
    run_simulation,
    soft_covering_exact,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
