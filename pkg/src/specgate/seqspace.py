"""Sequence calculus on truncated complex/non-negative sequences.

Everything here works on finite truncations of N_0-indexed sequences, with an
optional certified tail bound carried alongside.  A truncation can refute a
decay property at a given scale but can never prove one, so the certificate
types distinguish "verified on range", "refuted", and "inconclusive due to
truncation".

The two constructive pieces are:

* ``merge_governing`` -- collapses a finite family F of non-negative null
  sequences into a single g with f <= 2^k ||f||_inf * g for the k-th member,
  so that domination by any member implies domination by g.
* ``staircase_from_gauge`` -- given a non-decreasing gauge phi, builds the
  minimal strictly increasing integer thresholds m_k with m_k * phi(1/k) >= 1
  and the associated staircase sequence taking the value 1/(k-1) on the k-th
  block.  Together with the rescaling search ``scale_to_unit_sum`` this turns
  a summability bound sum phi(|a_n|) < inf into an explicit domination
  certificate (``staircase_governs``).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyFamily,
    GaugeVanishes,
    NoAdmissibleScale,
    NotSorted,
    ZeroDivisorViolation,
)
from .tolerances import C0_PROBE_EPS, CERT_SLACK, REARRANGEMENT_REL

Verdict = Literal["governed", "not_governed", "inconclusive_truncation"]

GOVERNED: Verdict = "governed"
NOT_GOVERNED: Verdict = "not_governed"
INCONCLUSIVE: Verdict = "inconclusive_truncation"


# ---------------------------------------------------------------------------
# Sequence types
# ---------------------------------------------------------------------------


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d sequence, got shape {arr.shape}")
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ComplexSeq:
    """Finite truncation of a complex sequence indexed from 0.

    ``tail_bound``, when present, certifies |a_n| <= tail_bound for every
    n >= len(entries).  ``tail_bound == 0`` means the sequence is known
    exactly (zero beyond the truncation).
    """

    entries: np.ndarray
    tail_bound: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries, np.complex128))
        if len(self.entries) < 1:
            raise DimensionMismatch("truncation length must be >= 1")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("entries must be finite")
        if self.tail_bound is not None:
            tb = float(self.tail_bound)
            if not (tb >= 0.0 and math.isfinite(tb)):
                raise ValueError("tail_bound must be a finite non-negative real")
            object.__setattr__(self, "tail_bound", tb)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return self.tail_bound == 0.0


@dataclass(frozen=True)
class NonNegSeq:
    """Truncated element of (c0)_+; ``sorted_flag`` certifies non-increasing."""

    entries: np.ndarray
    tail_bound: Optional[float] = None
    sorted_flag: bool = False

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen_array(self.entries, np.float64))
        if len(self.entries) < 1:
            raise DimensionMismatch("truncation length must be >= 1")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("entries must be finite")
        if np.any(self.entries < 0.0):
            raise ValueError("entries must be non-negative")
        if self.sorted_flag and np.any(np.diff(self.entries) > 0.0):
            raise NotSorted("sorted_flag set but entries increase somewhere")
        if self.tail_bound is not None:
            tb = float(self.tail_bound)
            if not (tb >= 0.0 and math.isfinite(tb)):
                raise ValueError("tail_bound must be a finite non-negative real")
            object.__setattr__(self, "tail_bound", tb)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return self.tail_bound == 0.0

    def sup_norm(self) -> float:
        return float(np.max(self.entries))


# ---------------------------------------------------------------------------
# Gauges
# ---------------------------------------------------------------------------


class Gauge:
    """Non-decreasing function [0, inf) -> [0, inf), evaluable on arrays.

    Strict positivity on (0, inf) is only testable pointwise; construction
    checks it on the gauge's own natural grid and consumers re-check at the
    points they actually use (``staircase_from_gauge`` raises GaugeVanishes).
    """

    def __call__(self, x):
        raise NotImplementedError

    def validation_grid(self) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _validate(self):
        grid = self.validation_grid()
        vals = np.asarray(self(grid), dtype=np.float64)
        if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
            raise ValueError("gauge values must be finite and non-negative")
        order = np.argsort(grid)
        if np.any(np.diff(vals[order]) < 0.0):
            raise ValueError("gauge must be non-decreasing on its grid")
        zero = float(self(0.0))
        if zero < 0.0:
            raise ValueError("gauge must satisfy phi(0) >= 0")


@dataclass(frozen=True)
class PowerGauge(Gauge):
    """phi(x) = x**p with p >= 1."""

    p: float

    def __post_init__(self):
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise ValueError("power gauge requires p >= 1")
        self._validate()

    def __call__(self, x):
        return np.power(x, self.p)

    def validation_grid(self) -> np.ndarray:
        return np.array([0.0, 1e-6, 1e-3, 0.1, 0.5, 1.0, 2.0])

    def to_dict(self) -> dict:
        return {"kind": "power", "p": self.p}


@dataclass(frozen=True)
class TableGauge(Gauge):
    """Right-constant step function from sorted (x, phi(x)) breakpoints.

    phi(t) equals the value at the largest breakpoint x <= t; below the first
    breakpoint phi is 0.  Values must be non-decreasing with x.
    """

    breakpoints: tuple

    def __post_init__(self):
        bps = tuple((float(x), float(y)) for x, y in self.breakpoints)
        if not bps:
            raise ValueError("table gauge needs at least one breakpoint")
        xs = [x for x, _ in bps]
        ys = [y for _, y in bps]
        if any(x < 0 for x in xs) or any(b >= a for a, b in zip(xs[1:], xs[:-1])):
            raise ValueError("breakpoint abscissae must be non-negative and strictly increasing")
        if any(y < 0 for y in ys) or any(b > a for a, b in zip(ys[1:], ys[:-1])):
            raise ValueError("breakpoint values must be non-negative and non-decreasing")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "_xs", np.array(xs))
        object.__setattr__(self, "_ys", np.array(ys))
        self._validate()

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        idx = np.searchsorted(self._xs, x, side="right")
        vals = np.concatenate(([0.0], self._ys))
        out = vals[idx]
        return out if out.shape else float(out)

    def validation_grid(self) -> np.ndarray:
        return np.concatenate(([0.0], self._xs, self._xs + 1e-12))

    def to_dict(self) -> dict:
        return {"kind": "table", "breakpoints": [[x, y] for x, y in self.breakpoints]}


@dataclass(frozen=True)
class ComposedGauge(Gauge):
    """phi(x) = inner(scale * x): argument rescaling of another gauge."""

    scale: float
    inner: Gauge

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError("composite gauge requires a positive finite scale")
        self._validate()

    def __call__(self, x):
        return self.inner(np.asarray(x, dtype=np.float64) * self.scale)

    def validation_grid(self) -> np.ndarray:
        return self.inner.validation_grid() / self.scale

    def to_dict(self) -> dict:
        return {"kind": "composite", "scale": self.scale, "inner": self.inner.to_dict()}


# ---------------------------------------------------------------------------
# Certificates and probe outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbeResult:
    """Outcome of the heuristic c0-membership probe."""

    plausible: bool
    reason: str = ""
    witness_range: Optional[tuple] = None
    witness_tail: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "plausible": self.plausible,
            "reason": self.reason,
            "witness_range": list(self.witness_range) if self.witness_range else None,
            "witness_tail": self.witness_tail,
        }


@dataclass(frozen=True)
class GoverningCertificate:
    """Result of testing whether a family governs a weak-orbit truncation.

    ``constant`` is the domination constant c with |a|*_n <= c f_n on
    ``checked_range``; when ``verdict == "governed"`` the stored residual is
    exactly 0 there.  ``exact`` marks conclusions valid for the full infinite
    sequence (certified zero tail and full range coverage), not just the
    truncation.
    """

    verdict: Verdict
    governing_index: Optional[int] = None
    constant: float = 0.0
    checked_range: tuple = (0, 0)
    residual: float = 0.0
    exact: bool = False
    scale_mu: float = 1.0
    probe: Optional[ProbeResult] = None
    failures: tuple = ()

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "governing_index": self.governing_index,
            "constant": self.constant,
            "checked_range": list(self.checked_range),
            "residual": self.residual,
            "exact": self.exact,
            "scale_mu": self.scale_mu,
            "probe": self.probe.to_dict() if self.probe else None,
            "failures": list(self.failures),
        }


# ---------------------------------------------------------------------------
# Elementary operations
# ---------------------------------------------------------------------------


def modulus(a: ComplexSeq) -> NonNegSeq:
    """Entry-wise |a_n|; truncation length and tail bound carry over."""
    return NonNegSeq(np.abs(a.entries), tail_bound=a.tail_bound)


def rearrange(f: NonNegSeq) -> NonNegSeq:
    """Non-increasing rearrangement of the truncated part.

    The rearrangement beyond the truncation is undefined unless the tail is
    certified zero, so the tail bound is carried forward unchanged and the
    result is exact only when ``tail_bound == 0``.
    """
    out = np.sort(f.entries)[::-1]
    return NonNegSeq(out, tail_bound=f.tail_bound, sorted_flag=True)


def _minimal_constant(g: np.ndarray, f: np.ndarray) -> tuple:
    """Smallest c with g <= c * f entrywise; raises on g_n > 0 = f_n.

    Convention 0/0 = 0: a zero entry of g imposes no constraint.  The returned
    c is bumped by ulps if rounding of max-ratio * f would undershoot g, so
    ``max(g - c*f, 0) == 0`` holds exactly.
    """
    zero_f = f == 0.0
    bad = zero_f & (g > 0.0)
    if np.any(bad):
        idx = int(np.argmax(bad))
        raise ZeroDivisorViolation(idx, float(g[idx]))
    ratios = np.zeros_like(g)
    np.divide(g, f, out=ratios, where=~zero_f)
    argmax = int(np.argmax(ratios))
    c = float(ratios[argmax])
    for _ in range(4):
        if not np.any(g > c * f):
            break
        c = math.nextafter(c, math.inf)
    return c, argmax


def domination_constant(g: NonNegSeq, f: NonNegSeq) -> float:
    """Minimal c >= 0 with g_n <= c f_n for all n < N (0/0 = 0).

    Both sequences must share a truncation length (callers pad or truncate).
    Raises ZeroDivisorViolation when some g_n > 0 meets f_n = 0: g is then
    definitively outside the principal ideal of f on the checked range.
    """
    if len(g) != len(f):
        raise DimensionMismatch(f"lengths differ: {len(g)} vs {len(f)}")
    c, _ = _minimal_constant(g.entries, f.entries)
    return c


def domination_exact(g: NonNegSeq, f: NonNegSeq) -> bool:
    """Whether a domination constant on the truncation binds the full sequence.

    Only a certified zero tail of g makes the conclusion unconditional; a
    lower bound on f's tail would also do but plain truncations carry none.
    """
    del f
    return g.tail_bound == 0.0


def c0_membership_probe(a: ComplexSeq, epsilon: float) -> ProbeResult:
    """Heuristic refutation of a -> 0 at scale epsilon.

    Rejects when the certified tail bound is >= epsilon, or when every entry
    in the final quarter of the truncation exceeds epsilon in modulus.  A
    truncation can never *prove* membership, so "plausible" is the best
    possible positive answer.
    """
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = len(a)
    start = (3 * n) // 4
    block = np.abs(a.entries[start:])
    if np.all(block > epsilon):
        return ProbeResult(False, "last_quarter_exceeds_epsilon", witness_range=(start, n))
    if a.tail_bound is not None and a.tail_bound >= epsilon:
        return ProbeResult(False, "tail_bound_at_or_above_epsilon", witness_tail=a.tail_bound)
    return ProbeResult(True)


def governs(
    F: Sequence[NonNegSeq],
    a: ComplexSeq,
    probe_eps: float = C0_PROBE_EPS,
) -> GoverningCertificate:
    """Test whether the family F governs a (first success wins).

    Pipeline: modulus, rearrangement, c0 probe, then the domination test
    against each member in order.  Comparisons run on the common truncation
    range min(len(a), len(f)); failures caused purely by uncertified tails
    yield the "inconclusive_truncation" verdict.
    """
    if not F:
        raise EmptyFamily("governing family must be non-empty")
    astar = rearrange(modulus(a))
    probe = c0_membership_probe(a, probe_eps)
    if not probe.plausible:
        verdict = INCONCLUSIVE if probe.reason == "tail_bound_at_or_above_epsilon" else NOT_GOVERNED
        return GoverningCertificate(verdict, probe=probe, failures=(probe.reason,))
    failures = []
    for k, f in enumerate(F):
        m = min(len(astar), len(f))
        try:
            c, _ = _minimal_constant(astar.entries[:m], f.entries[:m])
        except ZeroDivisorViolation as exc:
            failures.append(f"f[{k}]: {exc}")
            continue
        exact = a.tail_bound == 0.0 and len(a) <= len(f)
        return GoverningCertificate(
            GOVERNED,
            governing_index=k,
            constant=c,
            checked_range=(0, m),
            residual=0.0,
            exact=exact,
            probe=probe,
        )
    return GoverningCertificate(NOT_GOVERNED, probe=probe, failures=tuple(failures))


def merge_governing(F: Sequence[NonNegSeq]) -> NonNegSeq:
    """Weighted merge g = sum_k 2^-k f(k)/||f(k)||_inf over nonzero members.

    Zero members are dropped first.  The defining inequality
    f(k) <= 2^k ||f(k)||_inf g is re-checked entrywise before returning.
    All members must share a truncation length.
    """
    nonzero = [f for f in F if np.any(f.entries > 0.0)]
    if not nonzero:
        raise EmptyFamily("all members are zero")
    n = len(nonzero[0])
    if any(len(f) != n for f in nonzero):
        raise DimensionMismatch("family members must share a truncation length")
    acc = np.zeros(n)
    tail = 0.0
    tail_known = True
    for k, f in enumerate(nonzero, start=1):
        sup = f.sup_norm()
        acc = acc + (2.0 ** -k / sup) * f.entries
        if f.tail_bound is None:
            tail_known = False
        else:
            tail += (2.0 ** -k / sup) * f.tail_bound
    g = NonNegSeq(acc, tail_bound=tail if tail_known else None)
    for k, f in enumerate(nonzero, start=1):
        bound = (2.0 ** k) * f.sup_norm() * g.entries
        slack = CERT_SLACK * np.maximum(1.0, f.entries)
        if np.any(f.entries > bound + slack):
            raise AssertionError("merge postcondition violated")  # pragma: no cover
    return g


def gauge_sum(phi: Gauge, a: ComplexSeq):
    """(sum_{n<N} phi(|a_n|), exact_flag).

    The flag is True only when the tail is certified zero; otherwise the value
    is a lower bound for the infinite sum.
    """
    value = float(np.sum(phi(np.abs(a.entries))))
    return value, a.tail_bound == 0.0


def scale_to_unit_sum(phi: Gauge, a: ComplexSeq) -> float:
    """Largest mu in {1, 1/2, 1/4, ...} with sum phi(mu |a_n|) <= 1.

    At most 64 halvings are tried; exhaustion means phi does not vanish at 0
    on this data (e.g. a counting gauge on a sequence with >= 2 nonzero
    entries) and NoAdmissibleScale is raised.
    """
    mods = np.abs(a.entries)
    mu = 1.0
    for _ in range(64):
        if float(np.sum(phi(mu * mods))) <= 1.0:
            return mu
        mu *= 0.5
    raise NoAdmissibleScale("64 halvings did not bring the gauge sum below 1")


# ---------------------------------------------------------------------------
# Staircase construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Staircase:
    """Thresholds m_k (strictly increasing, m_k phi(1/k) >= 1) and the
    staircase sequence: value 1 on [0, m_1), value 1/(k-1) on [m_{k-1}, m_k).

    ``seq`` is the dense truncation at min(m_K, dense_cap); values beyond can
    be read off the blocks via ``value_at``.
    """

    m: tuple
    seq: NonNegSeq
    blocks: int

    def value_at(self, j: int) -> float:
        if j < 0:
            raise IndexError(j)
        if j >= self.m[-1]:
            raise IndexError(f"index {j} beyond the truncation m_K = {self.m[-1]}")
        k = bisect.bisect_right(self.m, j) + 1  # block number, 1-based
        return 1.0 if k == 1 else 1.0 / (k - 1)


def _ceil_snapped(y: float) -> int:
    """ceil with 1e-12-relative snapping so float noise cannot inflate m_k."""
    return int(math.ceil(y - CERT_SLACK * max(1.0, abs(y))))


def staircase_from_gauge(phi: Gauge, K: int, dense_cap: int = 4096) -> Staircase:
    """Minimal admissible staircase for phi up to block K.

    m_k = max(m_{k-1} + 1, ceil(1/phi(1/k))) with m_0 = 0.  Postconditions
    (m strictly increasing, m_k phi(1/k) >= 1 up to certification slack, f
    non-increasing) are re-checked before returning.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    m = []
    prev = 0
    for k in range(1, K + 1):
        val = float(phi(1.0 / k))
        if val <= 0.0:
            raise GaugeVanishes(k)
        need = _ceil_snapped(1.0 / val)
        mk = max(prev + 1, need)
        if mk * val < 1.0 - CERT_SLACK:
            raise AssertionError("staircase postcondition m_k phi(1/k) >= 1 failed")  # pragma: no cover
        m.append(mk)
        prev = mk
    length = min(m[-1], dense_cap)
    f = np.empty(length)
    f[: min(m[0], length)] = 1.0
    for k in range(2, K + 1):
        lo, hi = m[k - 2], min(m[k - 1], length)
        if lo >= length:
            break
        f[lo:hi] = 1.0 / (k - 1)
    if np.any(np.diff(f) > 0.0):
        raise AssertionError("staircase must be non-increasing")  # pragma: no cover
    return Staircase(m=tuple(m), seq=NonNegSeq(f, sorted_flag=True), blocks=K)


def staircase_covering(phi: Gauge, min_len: int, start_blocks: int = 64, max_blocks: int = 1 << 20) -> Staircase:
    """Staircase whose dense truncation covers at least ``min_len`` entries
    (the block count K doubles until m_K reaches the target)."""
    k = start_blocks
    while True:
        stair = staircase_from_gauge(phi, k, dense_cap=max(min_len, 1))
        if stair.m[-1] >= min_len or k >= max_blocks:
            return stair
        k = min(2 * k, max_blocks)


def staircase_counting_ok(stair: Staircase, scaled_moduli: np.ndarray) -> bool:
    """Check #{n : scaled |a_n| >= 1/k} <= m_k for every block k.

    This is the combinatorial heart of the gauge-summability argument: each
    such entry contributes phi(1/k) >= 1/m_k to the unit gauge sum, so more
    than m_k of them would push the sum above 1.
    """
    sorted_desc = np.sort(scaled_moduli)[::-1]
    for k in range(1, stair.blocks + 1):
        count = int(np.searchsorted(-sorted_desc, -1.0 / k, side="right"))
        if count > stair.m[k - 1]:
            return False
    return True


def staircase_governs(
    phi: Gauge,
    a: ComplexSeq,
    K: int = 64,
    probe_eps: float = C0_PROBE_EPS,
    stair: Optional[Staircase] = None,
) -> GoverningCertificate:
    """Governing certificate for a single gauge via the staircase construction.

    Runs the c0 probe, finds mu with sum phi(mu |a_n|) <= 1, verifies the
    counting claim against the staircase thresholds, and emits the domination
    constant c/mu for |a|* against the staircase sequence.
    """
    probe = c0_membership_probe(a, probe_eps)
    if not probe.plausible:
        verdict = INCONCLUSIVE if probe.reason == "tail_bound_at_or_above_epsilon" else NOT_GOVERNED
        return GoverningCertificate(verdict, probe=probe, failures=(probe.reason,))
    mu = scale_to_unit_sum(phi, a)
    if stair is None or stair.blocks < K:
        stair = staircase_from_gauge(phi, K)
    mods = np.abs(a.entries)
    if not staircase_counting_ok(stair, mu * mods):
        # Unreachable when sum phi(mu|a_n|) <= 1 actually holds; reported as a
        # refutation rather than ever emitting a false certificate.
        return GoverningCertificate(
            NOT_GOVERNED, probe=probe, failures=("counting_claim_failed",), scale_mu=mu
        )
    f = stair.seq
    m = min(len(a), len(f))
    scaled_star = np.sort(mu * mods)[::-1][:m]
    c, _ = _minimal_constant(scaled_star, f.entries[:m])
    exact = a.tail_bound == 0.0 and len(a) <= len(f)
    return GoverningCertificate(
        GOVERNED,
        governing_index=0,
        constant=c / mu,
        checked_range=(0, m),
        residual=0.0,
        exact=exact,
        scale_mu=mu,
        probe=probe,
    )


def rearrangement_inequality_check(f: NonNegSeq, g: NonNegSeq):
    """(lhs, rhs, holds) for sum f*_n g_n >= sum f_n g_n, g non-increasing.

    ``holds`` allows 1e-12 relative slack on the lhs; a failure beyond that on
    valid inputs is a bug, not a data property.
    """
    if not g.sorted_flag:
        raise NotSorted("g must carry sorted_flag")
    if len(f) != len(g):
        raise DimensionMismatch(f"lengths differ: {len(f)} vs {len(g)}")
    fstar = np.sort(f.entries)[::-1]
    lhs = float(np.dot(fstar, g.entries))
    rhs = float(np.dot(f.entries, g.entries))
    holds = lhs >= rhs - REARRANGEMENT_REL * lhs
    return lhs, rhs, holds


def gauge_from_dict(doc: dict) -> Gauge:
    """Inverse of Gauge.to_dict (shared by plans and report echoes)."""
    kind = doc.get("kind")
    if kind == "power":
        return PowerGauge(float(doc["p"]))
    if kind == "table":
        return TableGauge(tuple((x, y) for x, y in doc["breakpoints"]))
    if kind == "composite":
        return ComposedGauge(float(doc["scale"]), gauge_from_dict(doc["inner"]))
    raise ValueError(f"unknown gauge kind: {kind!r}")
