"""Truncated Fock-space primitives.

Operators built from isotropic phase-space densities are diagonal in the
number basis, so they are stored as a vector of diagonal entries together
with an analytic bound on the mass lost beyond the truncation.  Genuinely
non-diagonal operators (the gamma-ordered Weyl map) use :class:`DenseOperator`.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .errors import DomainError, NotNormalized, TruncationTooCoarse

MAX_INDEX = 4096
TOL_POS = 1e-12
# accuracy demanded of the (2n+1)-weighted sum in quantum_moments_from_operator
MOMENT_TAIL_TOL = 1e-8

LOG_FACTORIAL = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, MAX_INDEX + 1)))))
LOG_FACTORIAL.setflags(write=False)


# ---------------------------------------------------------------------------
# Operator containers
# ---------------------------------------------------------------------------


def geometric_tail_bound(first: float, ratio: float, dim: int) -> float:
    """Bound on ``|sum_{n >= dim} first * ratio**n|``; infinite if the series diverges."""
    r = abs(ratio)
    if r >= 1.0:
        return 0.0 if first == 0.0 else math.inf
    return abs(first) * r**dim / (1.0 - r)


@dataclass(frozen=True)
class FockDiagonal:
    """Diagonal operator in a truncated number basis.

    ``entries[n]`` is the matrix element ``<n|rho|n>`` for ``n < dim``.
    ``ratio`` is set when the entries form a geometric sequence, which lets
    the tail beyond the truncation be bounded analytically.
    """

    entries: np.ndarray
    tail_bound: float = 0.0
    ratio: Optional[float] = None
    dim: int = field(init=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=float)
        if entries.ndim != 1 or entries.size < 1:
            raise ValueError("entries must be a non-empty 1-D array")
        if not self.tail_bound >= 0:
            raise ValueError(f"tail_bound must be nonnegative, got {self.tail_bound}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dim", entries.size)

    @classmethod
    def geometric(cls, first: float, ratio: float, dim: int) -> "FockDiagonal":
        """Entries ``first * ratio**n`` for ``n < dim`` with the analytic tail bound."""
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        n = np.arange(dim)
        if ratio == 0.0:
            entries = np.where(n == 0, first, 0.0)
        else:
            with np.errstate(over="ignore"):
                entries = first * np.power(float(ratio), n)
        return cls(entries, geometric_tail_bound(first, ratio, dim), float(ratio))

    def __len__(self):
        return self.dim


@dataclass(frozen=True)
class DenseOperator:
    """Complex ``dim x dim`` matrix in the number basis."""

    entries: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise ValueError("entries must be a non-empty square matrix")
        if not np.all(np.isfinite(entries)):
            raise ValueError("entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "dim", entries.shape[0])

    def diagonal(self) -> np.ndarray:
        return np.diag(self.entries).copy()


class Verdict(str, enum.Enum):
    PURE_VALID = "pure"
    MIXED_VALID = "mixed"
    NON_POSITIVE = "nonpositive"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    min_eigenvalue: float
    max_eigenvalue: float


class OperatorMoments(NamedTuple):
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    error_bound: float


# ---------------------------------------------------------------------------
# Displaced-exponential matrix elements
# ---------------------------------------------------------------------------


def _genlaguerre(n: int, alpha: int, x):
    """L_n^{(alpha)}(x) by the three-term recurrence (stable where the power sum is not)."""
    prev = np.ones_like(x, dtype=float)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + alpha - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def _check_index(*indices: int) -> None:
    for idx in indices:
        if idx < 0 or idx > MAX_INDEX:
            raise DomainError(f"Fock index {idx} outside [0, {MAX_INDEX}]")


def displaced_matrix_element(n: int, m: int, xi: complex) -> complex:
    """``<n| exp(xi a^dag) exp(-conj(xi) a) |m>``.

    The finite double sum collapses to an associated Laguerre polynomial,

        n >= m:  sqrt(m!/n!) xi^(n-m) L_m^(n-m)(|xi|^2)
        n <  m:  sqrt(n!/m!) (-conj xi)^(m-n) L_n^(m-n)(|xi|^2)

    and on the diagonal to ``L_n(|xi|^2)``.
    """
    _check_index(n, m)
    xi = complex(xi)
    x = abs(xi) ** 2
    if n >= m:
        k, low, base = n - m, m, xi
    else:
        k, low, base = m - n, n, -xi.conjugate()
    poly = float(_genlaguerre(low, k, np.float64(x)))
    if k == 0:
        return complex(poly)
    if base == 0:
        return 0j
    log_mag = k * math.log(abs(base)) + 0.5 * (LOG_FACTORIAL[low] - LOG_FACTORIAL[low + k])
    return cmath.exp(complex(log_mag, k * cmath.phase(base))) * poly


def laguerre_diagonal(dim: int, x) -> np.ndarray:
    """``L_n(x)`` for ``n < dim``, stacked along a new last axis."""
    _check_index(dim - 1)
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (dim,))
    prev = np.ones_like(x)
    out[..., 0] = prev
    if dim > 1:
        cur = 1.0 - x
        out[..., 1] = cur
        for j in range(1, dim - 1):
            prev, cur = cur, ((2 * j + 1 - x) * cur - j * prev) / (j + 1)
            out[..., j + 1] = cur
    return out


def displaced_matrix(dim: int, xi) -> np.ndarray:
    """All elements ``<n|exp(xi a^dag) exp(-conj(xi) a)|m>`` for ``n, m < dim``.

    ``xi`` may be an array; the result has shape ``xi.shape + (dim, dim)``.
    """
    _check_index(dim - 1)
    xi = np.asarray(xi, dtype=complex)
    x = np.abs(xi) ** 2
    out = np.zeros(xi.shape + (dim, dim), dtype=complex)
    with np.errstate(divide="ignore"):
        log_r = np.log(np.abs(xi))
    phase = np.angle(xi)
    for k in range(dim):
        # L_j^{(k)}(x) for j = 0 .. dim-1-k
        count = dim - k
        lag = np.empty(xi.shape + (count,))
        prev = np.ones_like(x)
        lag[..., 0] = prev
        if count > 1:
            cur = 1.0 + k - x
            lag[..., 1] = cur
            for j in range(1, count - 1):
                prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
                lag[..., j + 1] = cur
        j = np.arange(count)
        if k == 0:
            out[..., j, j] = lag
            continue
        norm = 0.5 * (LOG_FACTORIAL[j] - LOG_FACTORIAL[j + k])
        with np.errstate(invalid="ignore"):
            mag = np.exp(k * log_r[..., None] + norm)
        mag = np.where(np.isfinite(mag), mag, 0.0)
        lower = mag * np.exp(1j * k * phase)[..., None] * lag
        # (-conj xi)^k = |xi|^k exp(i k (pi - phase))
        upper = mag * np.exp(1j * k * (np.pi - phase))[..., None] * lag
        out[..., j + k, j] = lower
        out[..., j, j + k] = upper
    return out


# ---------------------------------------------------------------------------
# Diagonal-operator diagnostics
# ---------------------------------------------------------------------------


def trace(op: FockDiagonal) -> float:
    """Sum of the stored entries (the tail is not included)."""
    return float(math.fsum(op.entries))


def classify_state(op: FockDiagonal, tol: float = TOL_POS) -> Classification:
    """Positivity verdict for a diagonal operator; its entries are its eigenvalues."""
    deviation = abs(trace(op) - 1.0)
    if not deviation <= 1e-9 + op.tail_bound:
        raise NotNormalized(
            f"trace deviates from 1 by {deviation:.3e} (tail bound {op.tail_bound:.3e})"
        )
    entries = op.entries
    lo, hi = float(entries.min()), float(entries.max())
    if lo < -tol:
        verdict = Verdict.NON_POSITIVE
    else:
        band = tol + op.tail_bound
        top = int(np.argmax(entries))
        rest = np.delete(entries, top)
        if abs(hi - 1.0) <= band and (rest.size == 0 or np.max(np.abs(rest)) <= band):
            verdict = Verdict.PURE_VALID
        else:
            verdict = Verdict.MIXED_VALID
    return Classification(verdict, lo, hi)


def classify_dense(op: DenseOperator, tol: float = TOL_POS, herm_tol: float = 1e-7) -> Classification:
    """Verdict for a dense operator; a non-Hermitian matrix is never a state."""
    a = op.entries
    defect = float(np.max(np.abs(a - a.conj().T)))
    eig = np.linalg.eigvalsh(0.5 * (a + a.conj().T))
    lo, hi = float(eig[0]), float(eig[-1])
    if defect > herm_tol or lo < -tol:
        return Classification(Verdict.NON_POSITIVE, lo, hi)
    if abs(hi - 1.0) <= tol and np.all(np.abs(eig[:-1]) <= tol):
        return Classification(Verdict.PURE_VALID, lo, hi)
    return Classification(Verdict.MIXED_VALID, lo, hi)


def _weighted_tail(op: FockDiagonal) -> float:
    """Bound on ``sum_{n >= dim} (2n+1) |rho_nn|``."""
    N = op.dim
    if op.ratio is not None:
        r = abs(op.ratio)
        c = abs(op.entries[0])
        if c == 0.0 or r == 0.0:
            return 0.0
        if r >= 1.0:
            return math.inf
        return c * r**N * ((2 * N + 1) / (1 - r) + 2 * r / (1 - r) ** 2)
    # no shape information: treat the tail mass as sitting at the cut
    return (2 * N + 1) * op.tail_bound


def quantum_moments_from_operator(op: FockDiagonal) -> OperatorMoments:
    """Position/momentum moments of a diagonal operator.

    First moments vanish identically and ``Tr q^2 rho = Tr p^2 rho =
    (1/2) sum (2n+1) rho_nn``.
    """
    tail = 0.5 * _weighted_tail(op)
    if not tail <= MOMENT_TAIL_TOL:
        raise TruncationTooCoarse(
            f"(2n+1)-weighted tail {tail:.3e} exceeds {MOMENT_TAIL_TOL:.0e} at dim={op.dim}"
        )
    n = np.arange(op.dim)
    var = 0.5 * math.fsum((2 * n + 1) * op.entries)
    return OperatorMoments(0.0, 0.0, var, var, tail)


def dense_position_variance(op: DenseOperator) -> float:
    """``Re Tr q^2 rho`` using ``q^2 = (a^2 + a^dag^2 + 2N + 1)/2``."""
    a = op.entries
    n = np.arange(op.dim)
    diag = np.sum((2 * n + 1) * np.diag(a))
    k = np.arange(op.dim - 2)
    w = np.sqrt((k + 1) * (k + 2))
    lowering = np.sum(w * a[k + 2, k])  # Tr a^2 rho
    raising = np.sum(w * a[k, k + 2])  # Tr a^dag^2 rho
    return float(np.real(0.5 * (diag + lowering + raising)))
