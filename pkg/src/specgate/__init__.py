"""specgate: executable stability certificates for weak orbit decay.

Given a finite-dimensional operator (or a finite truncation of a structured
one), this toolkit tests whether its weak orbits are dominated by a null
sequence or satisfy gauge summability, and turns the outcome into verifiable
spectral conclusions: evidence that r(T) < 1 in discrete time, and an
explicit negative upper bound on the resolvent abscissa s0(A) for matrix
semigroups.
"""

__version__ = "0.1.0"

from .errors import SpecgateError
from .seqspace import (
    ComplexSeq,
    ComposedGauge,
    Gauge,
    GoverningCertificate,
    NonNegSeq,
    PowerGauge,
    TableGauge,
    c0_membership_probe,
    domination_constant,
    gauge_sum,
    governs,
    merge_governing,
    modulus,
    rearrange,
    rearrangement_inequality_check,
    scale_to_unit_sum,
    staircase_from_gauge,
    staircase_governs,
)
from .operators import (
    Dense,
    Diagonal,
    FunctionalFamily,
    Jordan,
    OperatorSpec,
    Scaled,
    WeightedShift,
    apply,
    gelfand_estimate,
    norming_constant,
    power_norms,
    spectral_radius_oracle,
    weak_orbit,
)
from .resolvent import (
    SamplePlan,
    StabilityReport,
    analyze_discrete,
    default_r_grid,
    e_decay_certificate,
    e_of_r,
    neumann_resolvent,
    probe_direction,
    resolvent_lower_bound_check,
    resolvent_norm,
    weak_resolvent_bound_check,
)
from .semigroup import (
    GeneratorSpec,
    StripCertificate,
    analyze_semigroup,
    exp_at,
    laplace_resolvent,
    log_envelope_fit,
    lp_trajectory_norm,
    make_generator,
    mq_factor,
    mq_simplified_bound,
    strip_certificate,
    verify_strip,
    weak_trajectory,
)
from .plan import AnalysisPlan, parse_plan

__all__ = [name for name in dir() if not name.startswith("_")]
