"""The operator zoo: structured finite-dimensional operators with exact
spectral oracles, orbits, weak orbits, and power norms.

Infinite-dimensional phenomena (shifts, unimodular diagonals) are modelled by
N-dimensional truncations with e_{N-1} mapped to 0; every structured variant
keeps a closed-form action and a closed-form spectral radius so dense linear
algebra can be cross-checked against an independent route.

The coordinate space is C^N with the Euclidean norm; functionals pair
bilinearly (no conjugation), <x', x> = sum_j x'_j x_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DegenerateFamily,
    DimensionMismatch,
    EigenFailure,
    NumericOverflow,
)
from .seqspace import ComplexSeq, NonNegSeq
from .tolerances import POWER_BOUNDED_THRESHOLD

_MAX_SCALED_DEPTH = 8


# ---------------------------------------------------------------------------
# Operator variants
# ---------------------------------------------------------------------------


class OperatorSpec:
    """Base class; every variant provides dim, apply, densify, and oracles."""

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def densify(self) -> np.ndarray:
        raise NotImplementedError

    def eigenvalues(self) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_vec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"vector shape {x.shape} vs dimension {self.dim}")
        return x


def _finite_complex(values, shape_name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.complex128)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{shape_name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dense(OperatorSpec):
    matrix: np.ndarray

    def __post_init__(self):
        m = _finite_complex(self.matrix, "matrix")
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise DimensionMismatch(f"dense matrix must be square, got {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, x):
        return self.matrix @ self._check_vec(x)

    def densify(self):
        return np.array(self.matrix)

    def eigenvalues(self):
        try:
            return np.linalg.eigvals(self.matrix)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails here
            raise EigenFailure(str(exc)) from exc

    def to_dict(self):
        return {"variant": "dense", "rows": [[[z.real, z.imag] for z in row] for row in self.matrix]}


@dataclass(frozen=True)
class Diagonal(OperatorSpec):
    entries: np.ndarray

    def __post_init__(self):
        e = _finite_complex(np.atleast_1d(self.entries), "entries")
        if e.ndim != 1 or len(e) < 1:
            raise DimensionMismatch("diagonal needs at least one entry")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def apply(self, x):
        return self.entries * self._check_vec(x)

    def densify(self):
        return np.diag(self.entries)

    def eigenvalues(self):
        return np.array(self.entries)

    def to_dict(self):
        return {"variant": "diagonal", "entries": [[z.real, z.imag] for z in self.entries]}


@dataclass(frozen=True)
class WeightedShift(OperatorSpec):
    """e_j -> w_j e_{j+1} for j < N-1, e_{N-1} -> 0 (nilpotent truncation)."""

    weights: np.ndarray
    dimension: int

    def __post_init__(self):
        w = _finite_complex(np.asarray(self.weights, dtype=np.complex128).reshape(-1), "weights")
        if self.dimension < 1:
            raise DimensionMismatch("dimension must be >= 1")
        if len(w) != self.dimension - 1:
            raise DimensionMismatch(
                f"need {self.dimension - 1} weights for dimension {self.dimension}, got {len(w)}"
            )
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.dimension

    def apply(self, x):
        x = self._check_vec(x)
        out = np.zeros_like(x)
        out[1:] = self.weights * x[:-1]
        return out

    def densify(self):
        m = np.zeros((self.dim, self.dim), dtype=np.complex128)
        idx = np.arange(self.dim - 1)
        m[idx + 1, idx] = self.weights
        return m

    def eigenvalues(self):
        return np.zeros(self.dim, dtype=np.complex128)

    def to_dict(self):
        return {
            "variant": "weighted_shift",
            "weights": [[z.real, z.imag] for z in self.weights],
            "dim": self.dimension,
        }


@dataclass(frozen=True)
class Jordan(OperatorSpec):
    """Lower bidiagonal Jordan block: e_j -> lambda e_j + e_{j+1}."""

    eigenvalue: complex
    size: int

    def __post_init__(self):
        lam = complex(self.eigenvalue)
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            raise ValueError("eigenvalue must be finite")
        if self.size < 1:
            raise DimensionMismatch("size must be >= 1")
        object.__setattr__(self, "eigenvalue", lam)

    @property
    def dim(self) -> int:
        return self.size

    def apply(self, x):
        x = self._check_vec(x)
        out = self.eigenvalue * x
        out[1:] += x[:-1]
        return out

    def densify(self):
        m = np.diag(np.full(self.size, self.eigenvalue, dtype=np.complex128))
        idx = np.arange(self.size - 1)
        m[idx + 1, idx] = 1.0
        return m

    def eigenvalues(self):
        return np.full(self.size, self.eigenvalue, dtype=np.complex128)

    def to_dict(self):
        return {
            "variant": "jordan",
            "lambda": [self.eigenvalue.real, self.eigenvalue.imag],
            "size": self.size,
        }


@dataclass(frozen=True)
class Scaled(OperatorSpec):
    """factor * inner; nested factors are folded on construction."""

    factor: complex
    inner: OperatorSpec

    def __post_init__(self):
        factor = complex(self.factor)
        inner = self.inner
        depth = 0
        while isinstance(inner, Scaled):
            factor *= inner.factor
            inner = inner.inner
            depth += 1
            if depth > _MAX_SCALED_DEPTH:
                raise DimensionMismatch("scaled nesting depth exceeds 8")
        if not (math.isfinite(factor.real) and math.isfinite(factor.imag)):
            raise ValueError("factor must be finite")
        object.__setattr__(self, "factor", factor)
        object.__setattr__(self, "inner", inner)

    @property
    def dim(self) -> int:
        return self.inner.dim

    def apply(self, x):
        return self.factor * self.inner.apply(x)

    def densify(self):
        return self.factor * self.inner.densify()

    def eigenvalues(self):
        return self.factor * self.inner.eigenvalues()

    def to_dict(self):
        return {
            "variant": "scaled",
            "factor": [self.factor.real, self.factor.imag],
            "inner": self.inner.to_dict(),
        }


def operator_from_dict(doc: dict) -> OperatorSpec:
    """Inverse of OperatorSpec.to_dict (the wire format used by plans)."""
    variant = doc.get("variant")
    if variant == "dense":
        rows = [[complex(re, im) for re, im in row] for row in doc["rows"]]
        return Dense(np.array(rows, dtype=np.complex128))
    if variant == "diagonal":
        return Diagonal(np.array([complex(re, im) for re, im in doc["entries"]]))
    if variant == "weighted_shift":
        w = np.array([complex(re, im) for re, im in doc["weights"]], dtype=np.complex128)
        return WeightedShift(w, int(doc["dim"]))
    if variant == "jordan":
        re, im = doc["lambda"]
        return Jordan(complex(re, im), int(doc["size"]))
    if variant == "scaled":
        re, im = doc["factor"]
        return Scaled(complex(re, im), operator_from_dict(doc["inner"]))
    raise ValueError(f"unknown operator variant: {variant!r}")


# ---------------------------------------------------------------------------
# Vectors, functionals, families
# ---------------------------------------------------------------------------


def as_vector(coords, dim: Optional[int] = None) -> np.ndarray:
    v = np.asarray(coords, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatch("vectors are 1-d")
    if dim is not None and len(v) != dim:
        raise DimensionMismatch(f"vector length {len(v)} vs dimension {dim}")
    return v


def pair(xp: np.ndarray, x: np.ndarray) -> complex:
    """Bilinear duality pairing <x', x> = sum x'_j x_j (no conjugation)."""
    if xp.shape != x.shape:
        raise DimensionMismatch("functional/vector length mismatch")
    return complex(np.sum(xp * x))


@dataclass(frozen=True)
class FunctionalFamily:
    """Finite stand-in for an almost norming subspace: unit-scaled members
    plus the norming constant measured on whatever samples were used."""

    members: tuple
    norming_constant: float = math.inf

    def __post_init__(self):
        mem = []
        for m in self.members:
            v = as_vector(m)
            n = float(np.linalg.norm(v))
            if n == 0.0:
                raise ValueError("zero functional in family")
            mem.append((v / n).copy())
        for v in mem:
            v.setflags(write=False)
        object.__setattr__(self, "members", tuple(mem))


def norming_constant(E: FunctionalFamily, samples: Sequence[np.ndarray]) -> float:
    """Measured C >= 1 with ||x|| <= C sup_{x' in E} |<x', x>| on the samples.

    Certifies E as almost norming on the sample set only.
    """
    if not E.members:
        raise DegenerateFamily("empty functional family")
    if not samples:
        raise ValueError("need at least one sample vector")
    worst = 1.0
    for x in samples:
        x = as_vector(x)
        nx = float(np.linalg.norm(x))
        if nx == 0.0:
            raise ValueError("samples must be nonzero")
        sup = max(abs(pair(xp, x)) for xp in E.members)
        if sup == 0.0:
            raise DegenerateFamily("a sample annihilates every member")
        worst = max(worst, nx / sup)
    return worst


# ---------------------------------------------------------------------------
# Orbits and norms
# ---------------------------------------------------------------------------


def apply(T: OperatorSpec, x: np.ndarray) -> np.ndarray:
    """Structured matrix-vector product (never densifies)."""
    return T.apply(x)


def weak_orbit(
    T: OperatorSpec,
    x: np.ndarray,
    xp: np.ndarray,
    n_terms: int,
    tail_fit: Optional[tuple] = None,
) -> ComplexSeq:
    """a_n = <x', T^n x> for n < n_terms by iterated application.

    Tail bounds attached when certifiable: exactly 0 for nilpotent truncations
    once n_terms >= dim, the closed-form sum for diagonal operators with all
    |lambda_j| <= 1, else the heuristic power-norm fit (kappa, rho) if the
    caller supplies one (rho from a Gelfand estimate makes this a heuristic,
    not a certificate).
    """
    if n_terms < 1:
        raise DimensionMismatch("n_terms must be >= 1")
    x = as_vector(x, T.dim)
    xp = as_vector(xp, T.dim)
    out = np.empty(n_terms, dtype=np.complex128)
    v = x
    for n in range(n_terms):
        out[n] = np.sum(xp * v)
        if n + 1 < n_terms:
            v = T.apply(v)
    tail = _closed_form_tail(T, x, xp, n_terms)
    if tail is None and tail_fit is not None:
        kappa, rho = tail_fit
        if 0.0 <= rho < 1.0:
            tail = float(np.linalg.norm(x) * np.linalg.norm(xp) * kappa * rho ** n_terms)
    return ComplexSeq(out, tail_bound=tail)


def _closed_form_tail(T: OperatorSpec, x, xp, n_terms: int) -> Optional[float]:
    factor = 1.0
    inner = T
    if isinstance(inner, Scaled):
        factor = abs(inner.factor)
        inner = inner.inner
    if isinstance(inner, (WeightedShift, Jordan)) and spectral_radius_oracle(T) == 0.0:
        return 0.0 if n_terms >= T.dim else None
    if isinstance(inner, Diagonal):
        lam_mod = np.abs(inner.entries) * factor
        if np.all(lam_mod <= 1.0):
            # |a_n| <= sum_j |x'_j x_j| |lam_j|^n, non-increasing in n
            return float(np.sum(np.abs(xp * x) * lam_mod ** n_terms))
    return None


@dataclass(frozen=True)
class PowerNorms:
    seq: NonNegSeq
    power_bounded_probe: bool


def power_norms(T: OperatorSpec, n_terms: int) -> PowerNorms:
    """||T^n|| for n < n_terms (spectral norm), with closed forms where exact.

    Dense/densified routes take the largest singular value of the iterated
    power; diagonal, weighted shift, and scaled variants use closed forms so
    tests can cross-check the two routes.
    """
    if n_terms < 1:
        raise DimensionMismatch("n_terms must be >= 1")
    norms = _power_norms_raw(T, n_terms)
    if not np.all(np.isfinite(norms)):
        raise NumericOverflow("power norms left the representable range")
    seq = NonNegSeq(norms)
    probe = bool(np.max(norms) / norms[0] <= POWER_BOUNDED_THRESHOLD)
    return PowerNorms(seq, probe)


def _power_norms_raw(T: OperatorSpec, n_terms: int) -> np.ndarray:
    if isinstance(T, Diagonal):
        r = float(np.max(np.abs(T.entries)))
        return r ** np.arange(n_terms, dtype=np.float64)
    if isinstance(T, WeightedShift):
        w = np.abs(T.weights)
        norms = np.zeros(n_terms)
        norms[0] = 1.0
        for n in range(1, min(n_terms, T.dim)):
            # max over j of |w_j ... w_{j+n-1}|
            prods = np.array([np.prod(w[j : j + n]) for j in range(T.dim - n)])
            norms[n] = float(np.max(prods)) if len(prods) else 0.0
        return norms
    if isinstance(T, Scaled):
        return (abs(T.factor) ** np.arange(n_terms)) * _power_norms_raw(T.inner, n_terms)
    m = T.densify()
    norms = np.empty(n_terms)
    p = np.eye(T.dim, dtype=np.complex128)
    for n in range(n_terms):
        norms[n] = np.linalg.norm(p, 2)
        if not math.isfinite(norms[n]):
            raise NumericOverflow(f"||T^{n}|| overflowed")
        if n + 1 < n_terms:
            p = m @ p
    return norms


def spectral_radius_oracle(T: OperatorSpec) -> float:
    """r(T): exact for structured variants, dense via the QR eigensolver."""
    if isinstance(T, Diagonal):
        return float(np.max(np.abs(T.entries)))
    if isinstance(T, WeightedShift):
        return 0.0
    if isinstance(T, Jordan):
        return abs(T.eigenvalue)
    if isinstance(T, Scaled):
        return abs(T.factor) * spectral_radius_oracle(T.inner)
    return float(np.max(np.abs(T.eigenvalues())))


@dataclass(frozen=True)
class GelfandEstimate:
    value: float
    sequence: np.ndarray  # ||T^n||^{1/n} for n = 1 .. n_terms-1


def gelfand_estimate(T: OperatorSpec, n_terms: int) -> GelfandEstimate:
    """||T^{n_terms-1}||^{1/(n_terms-1)} plus the whole root sequence.

    Upper-biased and slowly (logarithmically) convergent to r(T); use the
    exact oracle when the variant admits one.
    """
    if n_terms < 8:
        raise DimensionMismatch("gelfand estimate needs n_terms >= 8")
    norms = power_norms(T, n_terms).seq.entries
    ns = np.arange(1, n_terms, dtype=np.float64)
    seq = norms[1:] ** (1.0 / ns)
    return GelfandEstimate(float(seq[-1]), seq)


def power_norm_fit(T: OperatorSpec, n_terms: int) -> Optional[tuple]:
    """(kappa, rho) with ||T^n|| <= kappa rho^n fitted over the observed range.

    rho is the Gelfand root at the horizon; None when rho >= 1.  Extrapolation
    beyond the horizon is heuristic and flagged as such by consumers.
    """
    est = gelfand_estimate(T, n_terms)
    rho = est.value
    if rho >= 1.0:
        return None
    norms = power_norms(T, n_terms).seq.entries
    if rho == 0.0:
        return (float(np.max(norms)), 0.0)
    kappa = float(np.max(norms / rho ** np.arange(n_terms)))
    return (kappa, rho)
