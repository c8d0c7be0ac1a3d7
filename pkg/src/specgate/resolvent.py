"""Discrete-time certificate machinery.

The estimate chain verified here is, link by link,

    |<x', R(r lam, T) x>|  <=  sum |a_n| / r^{n+1}
                           <=  sum |a|*_n / r^{n+1}
                           <=  c * e(r) / (r - 1),

with a_n = <x', T^n x>, the middle link being the rearrangement inequality
with weights g_n = r^{-(n+1)}, and e(r) = (r-1) sum f_n / r^{n+1}.  On the
other side, a unimodular spectral value lam forces
||R(r lam, T)|| >= 1/(r-1), so e(r) -> 0 as r -> 1 is incompatible with a
unimodular spectral value once every weak orbit is governed.

In finite dimensions the contradiction can never be observed (governed orbits
already force r(T) < 1 through the eigenvalue oracle), so the analyses here
validate each estimate direction separately and report any theorem-violating
configuration as ``counterexample_candidate`` -- a verdict that is designed to
be unreachable and is treated as a bug by the fuzz harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    DivergentSeries,
    EmptyFamily,
    InconclusiveTruncation,
    InvalidR,
    NotSpectral,
    TailTooLarge,
)
from .operators import (
    OperatorSpec,
    as_vector,
    gelfand_estimate,
    pair,
    spectral_radius_oracle,
    weak_orbit,
)
from .seqspace import (
    GOVERNED,
    INCONCLUSIVE,
    NOT_GOVERNED,
    ComplexSeq,
    Gauge,
    GoverningCertificate,
    NonNegSeq,
    Staircase,
    governs,
    merge_governing,
    staircase_from_gauge,
    staircase_governs,
)
from .tolerances import C0_PROBE_EPS, CHAIN_TOL, SPECTRAL_DIST


def default_r_grid() -> tuple:
    """r = 1 + 2^-k for k = 1..12: resolves the r -> 1 asymptotics."""
    return tuple(1.0 + 2.0 ** -k for k in range(1, 13))


# ---------------------------------------------------------------------------
# e(r) and its decay certificate
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EValue:
    """e(r) on the truncation plus a bound on the missing tail.

    ``tail_from_sup`` marks the conservative fallback t = ||f||_inf used when
    f carries no certified tail bound.
    """

    value: float
    tail_bound: float
    tail_from_sup: bool


def e_of_r(f: NonNegSeq, r: float) -> EValue:
    """e(r) = (r-1) sum_{n<N} f_n / r^{n+1}.

    The discarded tail is bounded by t * r^{-N} where t is f's tail bound if
    present, else ||f||_inf (conservative, flagged).
    """
    if r <= 1.0:
        raise InvalidR(f"need r > 1, got {r}")
    n = len(f)
    weights = np.power(r, -(np.arange(n, dtype=np.float64) + 1.0))
    value = (r - 1.0) * float(np.dot(f.entries, weights))
    if f.tail_bound is not None:
        t, from_sup = f.tail_bound, False
    else:
        t, from_sup = f.sup_norm(), True
    return EValue(value, t * r ** (-n), from_sup)


@dataclass(frozen=True)
class DecayCertificate:
    """Witness that e(r) <= 2 eps (+ tail) on (1, 1 + delta)."""

    eps: float
    n0: int
    delta: float
    max_e: float
    samples: tuple  # rows (r, e_value, tail_bound)
    ok: bool

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "n0": self.n0,
            "delta": self.delta,
            "max_e": self.max_e,
            "ok": self.ok,
        }


def e_decay_certificate(f: NonNegSeq, eps: float, samples: int = 16) -> DecayCertificate:
    """Certify e(r) <= 2 eps + tail for r in (1, 1 + delta).

    n0 is the first index from which the truncated entries stay <= eps
    (clamped to >= 1 to keep delta = eps / (n0 ||f||_inf) finite), and the
    bound is re-checked numerically on a sampled r-grid.
    """
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if not np.any(f.entries > 0.0):
        raise EmptyFamily("f must be nonzero")
    if f.tail_bound is not None and f.tail_bound > eps:
        raise TailTooLarge(f"tail bound {f.tail_bound} exceeds eps {eps}")
    suffix_max = np.maximum.accumulate(f.entries[::-1])[::-1]
    below = suffix_max <= eps
    if not below[-1]:
        raise InconclusiveTruncation("no suffix of the truncation stays below eps")
    n0 = max(1, int(np.argmax(below)))
    delta = eps / (n0 * f.sup_norm())
    rows = []
    worst = 0.0
    ok = True
    for j in range(1, samples + 1):
        r = 1.0 + delta * j / (samples + 1.0)
        ev = e_of_r(f, r)
        rows.append((r, ev.value, ev.tail_bound))
        worst = max(worst, ev.value)
        if ev.value > 2.0 * eps + ev.tail_bound + CHAIN_TOL:
            ok = False
    return DecayCertificate(eps, n0, delta, worst, tuple(rows), ok)


# ---------------------------------------------------------------------------
# Resolvents: direct and Neumann
# ---------------------------------------------------------------------------


def resolvent_norm(matrix: np.ndarray, z: complex) -> float:
    """||(z I - M)^{-1}||_2 = 1 / sigma_min(z I - M)."""
    shifted = z * np.eye(matrix.shape[0], dtype=np.complex128) - matrix
    smin = float(np.linalg.svd(shifted, compute_uv=False)[-1])
    if smin == 0.0:
        return math.inf
    return 1.0 / smin


@dataclass(frozen=True)
class NeumannResult:
    matrix: np.ndarray
    terms: int
    tail_bound: float
    rho: float  # Gelfand root ||T^terms||^{1/terms} at the used horizon


def neumann_resolvent(
    T: OperatorSpec,
    r: float,
    lam: complex,
    terms: Optional[int] = None,
    target_rel: float = 1e-10,
    max_terms: int = 65536,
) -> NeumannResult:
    """Partial Neumann sum sum_{n<terms} T^n / (r lam)^{n+1}.

    With ``terms=None`` the horizon doubles adaptively until the geometric
    tail bound ||T^m|| r^{-m} / (r - rho) drops below target_rel * ||S||,
    which also enforces the precondition r > (Gelfand root at the horizon).
    Term norms growing for 32 consecutive steps raise DivergentSeries.
    """
    if r <= 1.0:
        raise InvalidR(f"need r > 1, got {r}")
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("lam must be unimodular")
    m = T.densify()
    n_dim = T.dim
    inv = 1.0 / (r * lam)
    s = np.zeros((n_dim, n_dim), dtype=np.complex128)
    p = np.eye(n_dim, dtype=np.complex128)
    coeff = inv
    budget = max_terms if terms is None else terms
    checkpoint = 32 if terms is None else terms
    growth = 0
    prev_term = math.inf
    tail = math.inf
    rho = math.inf
    n = 0
    while n < budget:
        s = s + coeff * p
        term_norm = abs(coeff) * float(np.linalg.norm(p))
        if term_norm > prev_term:
            growth += 1
            if growth >= 32:
                raise DivergentSeries(f"term norms grew for 32 consecutive steps (n={n})")
        else:
            growth = 0
        prev_term = term_norm
        p = m @ p
        coeff = coeff * inv
        n += 1
        if n >= checkpoint or n >= budget:
            pn = float(np.linalg.norm(p, 2))
            rho = pn ** (1.0 / n) if pn > 0.0 else 0.0
            if rho < r:
                tail = pn * r ** (-n) / (r - rho)
            else:
                tail = math.inf
            if terms is not None:
                if n >= terms:
                    break
            else:
                if tail <= target_rel * float(np.linalg.norm(s, 2)):
                    break
                checkpoint = min(2 * checkpoint, budget)
    return NeumannResult(s, n, tail, rho)


# ---------------------------------------------------------------------------
# Estimate chain and lower bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainRecord:
    """Per-link residuals of the governed resolvent estimate chain.

    Residuals are (upper side) - (lower side); the chain holds when all three
    stay above -CHAIN_TOL.  ``tail_term`` enters link 1 only, derived from the
    orbit's certified tail bound (0 when none is available, flagged).
    """

    r: float
    lam: complex
    lhs: float
    s_moduli: float
    s_rearranged: float
    rhs: float
    tail_term: float
    tail_certified: bool
    residual_direct: float
    residual_rearranged: float
    residual_domination: float

    @property
    def holds(self) -> bool:
        scale = max(1.0, self.lhs, self.rhs)
        floor = -CHAIN_TOL * scale
        return (
            self.residual_direct >= floor
            and self.residual_rearranged >= -1e-12 * max(self.s_rearranged, 1e-300)
            and self.residual_domination >= floor
        )

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "lam": [self.lam.real, self.lam.imag],
            "lhs": self.lhs,
            "s_moduli": self.s_moduli,
            "s_rearranged": self.s_rearranged,
            "rhs": self.rhs,
            "tail_term": self.tail_term,
            "tail_certified": self.tail_certified,
            "residuals": [
                self.residual_direct,
                self.residual_rearranged,
                self.residual_domination,
            ],
            "holds": self.holds,
        }


def weak_resolvent_bound_check(
    T: OperatorSpec,
    x: np.ndarray,
    xp: np.ndarray,
    f: NonNegSeq,
    c: float,
    r: float,
    lam: complex,
    orbit: Optional[ComplexSeq] = None,
) -> ChainRecord:
    """Verify the three-link estimate chain at (r, lam).

    Precondition: {f} governs the weak orbit of (x, x') with constant c on
    the common range.  The orbit is recomputed (or passed in) at length
    len(f); all sums run over that truncation.
    """
    if r <= 1.0:
        raise InvalidR(f"need r > 1, got {r}")
    n = len(f)
    if orbit is None:
        orbit = weak_orbit(T, x, xp, n)
    if len(orbit) != n:
        raise DimensionMismatch("orbit and f must share a truncation length")
    mods = np.abs(orbit.entries)
    astar = np.sort(mods)[::-1]
    weights = np.power(r, -(np.arange(n, dtype=np.float64) + 1.0))
    s1 = float(np.dot(mods, weights))
    s2 = float(np.dot(astar, weights))
    rhs = c * float(np.dot(f.entries, weights))
    mat = r * lam * np.eye(T.dim, dtype=np.complex128) - T.densify()
    lhs = abs(pair(as_vector(xp, T.dim), np.linalg.solve(mat, as_vector(x, T.dim))))
    if orbit.tail_bound is not None:
        tail = orbit.tail_bound * r ** (-n) / (r - 1.0)
        certified = True
    else:
        tail = 0.0
        certified = False
    return ChainRecord(
        r=r,
        lam=complex(lam),
        lhs=lhs,
        s_moduli=s1,
        s_rearranged=s2,
        rhs=rhs,
        tail_term=tail,
        tail_certified=certified,
        residual_direct=s1 + tail - lhs,
        residual_rearranged=s2 - s1,
        residual_domination=rhs - s2,
    )


@dataclass(frozen=True)
class LowerBoundRecord:
    """||R(r lam, T)|| >= 1/dist(r lam, sigma(T)) >= 1/(r-1) for spectral lam.

    ``dist_budget`` carries the solver error allowed when certifying that lam
    sits on the spectrum; the distances themselves are reported raw.
    """

    r: float
    lam: complex
    resolvent_norm: float
    dist_to_spectrum: float
    lower_from_dist: float
    lower_universal: float
    dist_budget: float
    attained: bool

    def to_dict(self) -> dict:
        return {
            "r": self.r,
            "lam": [self.lam.real, self.lam.imag],
            "resolvent_norm": self.resolvent_norm,
            "dist_to_spectrum": self.dist_to_spectrum,
            "lower_from_dist": self.lower_from_dist,
            "lower_universal": self.lower_universal,
            "dist_budget": self.dist_budget,
            "attained": self.attained,
        }


def resolvent_lower_bound_check(T: OperatorSpec, r: float, lam: complex) -> LowerBoundRecord:
    """Check the lower-bound side of the chain at a certified spectral lam."""
    if r <= 1.0:
        raise InvalidR(f"need r > 1, got {r}")
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError("lam must be unimodular")
    eigs = T.eigenvalues()
    if float(np.min(np.abs(eigs - lam))) > SPECTRAL_DIST:
        raise NotSpectral(f"{lam} is not within {SPECTRAL_DIST} of the spectrum")
    z = r * lam
    norm = resolvent_norm(T.densify(), z)
    dist = float(np.min(np.abs(eigs - z)))
    lower_from_dist = 1.0 / dist if dist > 0.0 else math.inf
    lower_universal = 1.0 / (r - 1.0)
    attained = norm >= lower_universal * (1.0 - 1e-8)
    return LowerBoundRecord(
        r=r,
        lam=lam,
        resolvent_norm=norm,
        dist_to_spectrum=dist,
        lower_from_dist=lower_from_dist,
        lower_universal=lower_universal,
        dist_budget=SPECTRAL_DIST,
        attained=attained,
    )


# ---------------------------------------------------------------------------
# Resolvent probe (per unimodular direction)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResolventProbe:
    """Direct vs Neumann resolvent norms along r -> 1 in direction lam."""

    lam: complex
    r_grid: tuple
    norms: tuple
    neumann_norms: tuple
    e_values: tuple
    tail_estimates: tuple

    def rows(self):
        """(r, e(r), ||R(r lam, T)||, neumann_norm, tail) per grid point."""
        return list(zip(self.r_grid, self.e_values, self.norms, self.neumann_norms, self.tail_estimates))


def probe_direction(
    T: OperatorSpec,
    lam: complex,
    f: NonNegSeq,
    r_grid: Optional[Sequence[float]] = None,
    max_terms: int = 4096,
) -> ResolventProbe:
    """Assemble a ResolventProbe: direct solves, budgeted Neumann sums with
    honest tail estimates, and e(r) from the governing sequence f."""
    grid = tuple(sorted(r_grid or default_r_grid(), reverse=True))
    if any(r <= 1.0 for r in grid):
        raise InvalidR("grid entries must exceed 1")
    dense = T.densify()
    norms, neu_norms, e_vals, tails = [], [], [], []
    for r in grid:
        norms.append(resolvent_norm(dense, r * lam))
        res = neumann_resolvent(T, r, lam, max_terms=max_terms)
        neu_norms.append(float(np.linalg.norm(res.matrix, 2)))
        tails.append(res.tail_bound)
        e_vals.append(e_of_r(f, r).value)
    return ResolventProbe(
        lam=complex(lam),
        r_grid=grid,
        norms=tuple(norms),
        neumann_norms=tuple(neu_norms),
        e_values=tuple(e_vals),
        tail_estimates=tuple(tails),
    )


# ---------------------------------------------------------------------------
# Sample plans and the top-level discrete analysis
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SamplePlan:
    """(x, x') pair generation: coordinate pairs (dim <= 8) + random unit pairs."""

    coordinate_pairs: bool = True
    random_pairs: int = 32
    seed: int = 0

    def generate(self, dim: int):
        """Returns (xs, xps, pairs) with pairs = (x_index, xp_index, label)."""
        xs, xps, pairs = [], [], []
        if self.coordinate_pairs and dim <= 8:
            eye = np.eye(dim, dtype=np.complex128)
            for i in range(dim):
                xs.append(eye[i])
                xps.append(eye[i])
            for i in range(dim):
                for j in range(dim):
                    pairs.append((i, j, f"e{i}|e{j}"))
        base_x, base_p = len(xs), len(xps)
        rng = np.random.default_rng(self.seed)
        for k in range(self.random_pairs):
            x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            xp = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
            xs.append(x / np.linalg.norm(x))
            xps.append(xp / np.linalg.norm(xp))
            pairs.append((base_x + k, base_p + k, f"rnd{k}"))
        if not pairs:
            raise ValueError("sample plan generated no pairs")
        return xs, xps, pairs


def _orbit_table(T: OperatorSpec, xs, xps, n_terms: int) -> np.ndarray:
    """All cross weak orbits <xp_i, T^n x_j> in one iterated block product."""
    dense = T.densify()
    X = np.column_stack(xs)
    P = np.column_stack(xps)
    out = np.empty((n_terms, P.shape[1], X.shape[1]), dtype=np.complex128)
    y = X
    for n in range(n_terms):
        out[n] = P.T @ y
        if n + 1 < n_terms:
            y = dense @ y
    return out


@dataclass(frozen=True)
class PairAnalysis:
    label: str
    certificate: GoverningCertificate
    gauge_index: Optional[int] = None
    via_merge: bool = False
    errors: tuple = ()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "certificate": self.certificate.to_dict(),
            "gauge_index": self.gauge_index,
            "via_merge": self.via_merge,
            "errors": list(self.errors),
        }


@dataclass(frozen=True)
class StabilityReport:
    """Executable form of the governed => r(T) < 1 implication on samples."""

    operator: dict
    dim: int
    family_kind: str
    n_terms: int
    pair_results: tuple
    r_oracle: float
    gelfand: float
    hypothesis_met: bool
    all_exact: bool
    verdict: str
    e_decay_record: tuple

    def to_dict(self) -> dict:
        return {
            "operator": self.operator,
            "dim": self.dim,
            "family_kind": self.family_kind,
            "n_terms": self.n_terms,
            "pairs": [p.to_dict() for p in self.pair_results],
            "r_oracle": self.r_oracle,
            "gelfand": self.gelfand,
            "hypothesis_met": self.hypothesis_met,
            "all_exact": self.all_exact,
            "verdict": self.verdict,
            "e_decay_record": [
                rec if isinstance(rec, str) else rec.to_dict() for rec in self.e_decay_record
            ],
        }


CONSISTENT = "consistent_with_theorem"
COUNTEREXAMPLE = "counterexample_candidate"
REPORT_INCONCLUSIVE = "inconclusive"


def analyze_discrete(
    T: OperatorSpec,
    plan: Optional[SamplePlan] = None,
    sequences: Optional[Sequence[NonNegSeq]] = None,
    gauges: Optional[Sequence[Gauge]] = None,
    n_terms: int = 256,
    staircase_blocks: int = 64,
    probe_eps: float = C0_PROBE_EPS,
) -> StabilityReport:
    """Governing analysis of every sampled weak orbit, aggregated with the
    spectral oracle into a theorem-consistency verdict.

    Exactly one of ``sequences`` (domination against the family, with the
    weighted merge as a backstop member) or ``gauges`` (staircase certificates
    per gauge, first success wins) must be given.  A p-list reduces to power
    gauges upstream.
    """
    if (sequences is None) == (gauges is None):
        raise ValueError("exactly one of sequences/gauges must be given")
    plan = plan or SamplePlan()
    xs, xps, pairs = plan.generate(T.dim)
    table = _orbit_table(T, xs, xps, n_terms)

    family: list = []
    merged: Optional[NonNegSeq] = None
    stairs: list = []
    if sequences is not None:
        family = list(sequences)
        try:
            merged = merge_governing(family)
        except (EmptyFamily, DimensionMismatch):
            merged = None
    else:
        for phi in gauges:
            try:
                stairs.append(staircase_from_gauge(phi, staircase_blocks))
            except Exception:
                stairs.append(None)

    results = []
    for ix, ip, label in pairs:
        a = ComplexSeq(table[:, ip, ix])
        if sequences is not None:
            trial = family + ([merged] if merged is not None else [])
            cert = governs(trial, a, probe_eps=probe_eps)
            via_merge = cert.governing_index is not None and cert.governing_index >= len(family)
            results.append(PairAnalysis(label, cert, via_merge=via_merge))
        else:
            errors = []
            failed_certs = []
            for k, phi in enumerate(gauges):
                try:
                    cert = staircase_governs(
                        phi, a, K=staircase_blocks, probe_eps=probe_eps, stair=stairs[k]
                    )
                except Exception as exc:
                    errors.append(f"gauge[{k}]: {type(exc).__name__}: {exc}")
                    continue
                if cert.verdict == GOVERNED:
                    chosen = PairAnalysis(label, cert, gauge_index=k, errors=tuple(errors))
                    break
                failed_certs.append(cert)
                errors.append(f"gauge[{k}]: {cert.verdict}")
            else:
                # no gauge succeeded; an inconclusive verdict (truncation) wins
                # over a hard refutation for honesty of the aggregate
                pick = next((c for c in failed_certs if c.verdict == INCONCLUSIVE), None)
                if pick is None:
                    pick = failed_certs[-1] if failed_certs else GoverningCertificate(
                        NOT_GOVERNED, failures=tuple(errors)
                    )
                chosen = PairAnalysis(label, pick, gauge_index=None, errors=tuple(errors))
            results.append(chosen)

    r_oracle = spectral_radius_oracle(T)
    gelfand = gelfand_estimate(T, max(8, min(n_terms, 128))).value
    hypothesis_met = all(p.certificate.verdict == GOVERNED for p in results)
    all_exact = hypothesis_met and all(p.certificate.exact for p in results)
    if hypothesis_met and r_oracle >= 1.0:
        verdict = COUNTEREXAMPLE if all_exact else REPORT_INCONCLUSIVE
    else:
        verdict = CONSISTENT

    rep_f = merged if sequences is not None else _first_staircase_seq(stairs)
    decay: list = []
    if rep_f is not None:
        for k in range(2, 7):
            eps = 2.0 ** -k
            try:
                decay.append(e_decay_certificate(rep_f, eps))
            except Exception as exc:
                decay.append(f"eps=2^-{k}: {type(exc).__name__}")

    return StabilityReport(
        operator=T.to_dict(),
        dim=T.dim,
        family_kind="sequences" if sequences is not None else "gauges",
        n_terms=n_terms,
        pair_results=tuple(results),
        r_oracle=r_oracle,
        gelfand=gelfand,
        hypothesis_met=hypothesis_met,
        all_exact=all_exact,
        verdict=verdict,
        e_decay_record=tuple(decay),
    )


def _first_staircase_seq(stairs) -> Optional[NonNegSeq]:
    for s in stairs:
        if isinstance(s, Staircase):
            return s.seq
    return None
