"""Output-probability laws, pattern spaces and samplers."""

from .dist import (
    Distribution,
    build_distribution,
    gbs_probabilities,
    model_law,
    pseudo_pnr_channel,
    pseudo_pnr_probability,
    sample,
    sample_indices,
)
from .laws import (
    ClassicalModelSpec,
    factorial_product,
    heralding_probability,
    prob_boson_sampling,
    prob_coherent,
    prob_distinguishable,
    prob_distinguishable_sms,
    prob_distinguishable_sms_convolution,
    prob_gbs,
    prob_thermal,
    prob_tms,
    prob_uniform,
    sbs_enhancement,
    sbs_herald_weights,
    thermal_ratio,
    tms_state,
)
from .lossy import (
    DEFAULT_CUTOFF,
    lossy_probabilities,
    lossy_probability,
    thinning_coefficients,
    total_photon_distribution,
    truncation_error_bound,
)
from .patterns import (
    MAX_PATTERNS,
    Domain,
    DomainTooLargeError,
    domain_size,
    enumerate_patterns,
    parse_pattern,
    pattern_label,
)
