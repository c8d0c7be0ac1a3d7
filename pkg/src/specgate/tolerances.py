"""Central numeric tolerances.

Certificates must never silently absorb slack, so every comparison that
certifies an inequality goes through one of these constants and reports are
stamped with the whole table (see ``settings_dict``).
"""

# Absolute slack, scaled by magnitude, for inequality certification.
CERT_SLACK = 1e-12

# Relative tolerance for the rearrangement inequality (never exceeded on
# exact-arithmetic-valid inputs; a failure beyond this is a bug).
REARRANGEMENT_REL = 1e-12

# Residual floor for the discrete estimate-chain links.
CHAIN_TOL = 1e-10

# Relative agreement demanded between Neumann partial sums and direct solves.
SOLVE_REL = 1e-8

# Distance at which a probe point counts as sitting on the spectrum.
SPECTRAL_DIST = 1e-8

# Guard radius around eigenvalues for resolvent sampling.
SINGULAR_GUARD = 1e-10

# Structured-vs-densified application agreement.
APPLY_REL = 1e-14

# Heuristic power-boundedness threshold on sup ||T^n|| / ||T^0||.
POWER_BOUNDED_THRESHOLD = 1e6

# Default scale at which the c0-membership probe refutes decay.
C0_PROBE_EPS = 1e-8

# Additive slack on strip re-verification: ||R(mu,A)|| <= 2/r + STRIP_SLACK.
STRIP_SLACK = 1e-8

# Semigroup-law check: ||E(s+t) - E(s)E(t)|| <= LAW_TOL * (1 + ||E(s+t)||).
LAW_TOL = 1e-9

# Documented budget for a single matrix-exponential evaluation.
EXP_NORM_BUDGET = 1024.0

# Quadrature step budget per Laplace-integral evaluation.
QUADRATURE_STEP_BUDGET = 200_000

# Margin added to the spectral bound when certifying trajectory decay.
DECAY_MARGIN = 1e-3


def leq(lhs: float, rhs: float, scale: float = 1.0) -> bool:
    """Certified ``lhs <= rhs`` up to CERT_SLACK scaled by magnitude."""
    m = max(abs(lhs), abs(rhs), scale)
    return lhs <= rhs + CERT_SLACK * m


def settings_dict() -> dict:
    """Tolerance table embedded in every report."""
    return {
        "cert_slack": CERT_SLACK,
        "rearrangement_rel": REARRANGEMENT_REL,
        "chain_tol": CHAIN_TOL,
        "solve_rel": SOLVE_REL,
        "spectral_dist": SPECTRAL_DIST,
        "singular_guard": SINGULAR_GUARD,
        "apply_rel": APPLY_REL,
        "power_bounded_threshold": POWER_BOUNDED_THRESHOLD,
        "c0_probe_eps": C0_PROBE_EPS,
        "strip_slack": STRIP_SLACK,
        "law_tol": LAW_TOL,
        "exp_norm_budget": EXP_NORM_BUDGET,
        "quadrature_step_budget": QUADRATURE_STEP_BUDGET,
        "decay_margin": DECAY_MARGIN,
    }
