"""Exception types shared across the toolkit.

Every certificate-producing operation raises one of these rather than a bare
ValueError, so callers (and the CLI exit-code mapping) can tell a refuted
hypothesis from an internal failure.
"""


class SpecgateError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(SpecgateError):
    """Operands whose lengths/dimensions must agree do not."""


class ZeroDivisorViolation(SpecgateError):
    """Domination test failed definitively: g_n > 0 where f_n = 0."""

    def __init__(self, index: int, g_value: float):
        self.index = index
        self.g_value = g_value
        super().__init__(f"g[{index}] = {g_value} > 0 but f[{index}] = 0")


class EmptyFamily(SpecgateError):
    """A family that must contain a nonzero member is empty (or all zero)."""


class NoAdmissibleScale(SpecgateError):
    """64 halvings did not bring the gauge sum below 1."""


class GaugeVanishes(SpecgateError):
    """phi(1/k) = 0 for some k in the requested staircase range."""

    def __init__(self, k: int):
        self.k = k
        super().__init__(f"gauge vanishes at 1/{k}")


class NotSorted(SpecgateError):
    """An operand required to be certified non-increasing is not."""


class InvalidR(SpecgateError):
    """A resolvent radius r <= 1 was supplied where r > 1 is required."""


class TailTooLarge(SpecgateError):
    """Certified tail bound exceeds the decay threshold being certified."""


class InconclusiveTruncation(SpecgateError):
    """The truncated data cannot support the requested conclusion."""


class DivergentSeries(SpecgateError):
    """Neumann term norms grew for 32 consecutive terms."""


class NotSpectral(SpecgateError):
    """The supplied point is not (numerically) in the spectrum."""


class EigenFailure(SpecgateError):
    """Dense eigenvalue iteration did not converge."""


class DegenerateFamily(SpecgateError):
    """Some sample vector annihilates every functional in the family."""


class NumericOverflow(SpecgateError):
    """An intermediate quantity left the representable range."""


class HorizonTooLarge(SpecgateError):
    """The requested ||tA|| exceeds the documented exponential budget."""


class NoDecayCertificate(SpecgateError):
    """No negative effective decay rate is available; the integral may diverge."""


class BadConjugate(SpecgateError):
    """Conjugate exponent q <= 1 supplied."""


class QuadratureBudget(SpecgateError):
    """Requested quadrature steps exceed the documented budget."""


class SingularSample(SpecgateError):
    """A resolvent sample point is within 1e-10 of an eigenvalue."""


class StripViolation(SpecgateError):
    """A strip sample exceeded the certified resolvent bound (after refit)."""

    def __init__(self, mu: complex, norm: float, bound: float):
        self.mu = mu
        self.norm = norm
        self.bound = bound
        super().__init__(f"||R({mu}, A)|| = {norm} exceeds {bound}")


class ParseError(SpecgateError):
    """A plan document is not well-formed."""


class ValidationError(SpecgateError):
    """A plan document violates a schema invariant (message names the path)."""
