"""Closed-form diagnostics for quantized Gaussians and classical grid densities."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from .errors import DomainError
from .fock_core import Classification, Verdict
from .quantizers import OrderingLike, OrderingParams, RadialTransform

PURE_REL_TOL = 1e-12
HEISENBERG_TOL = 1e-12
CONDITION_TOL = 1e-12
NORMALIZATION_TOL = 1e-6


def _s(ordering: OrderingLike):
    # keep exact types (Fraction) intact so boundary checks can be done in rationals
    return ordering.s if isinstance(ordering, OrderingParams) else ordering


def critical_lambda(s) -> float:
    """Largest lambda whose s-ordered quantization is positive: ``1/(1+s)``, or +inf for s <= -1."""
    if s <= -1:
        return math.inf
    return 1 / (1 + s)


def classify_parameters(lam, ordering: OrderingLike) -> Classification:
    """Verdict for the s-ordered Gaussian straight from the parameters.

    Eigenvalue bounds are the extremes of the full geometric sequence
    ``first * ratio**n`` (an infimum of 0 is reported for ``ratio >= 0``).
    """
    s = _s(ordering)
    if not lam > 0:
        raise DomainError(f"lambda must be positive, got {lam}")
    lam_c = critical_lambda(s)
    denom = 1 + (1 - s) * lam
    first = float(2 * lam / denom)
    ratio = float((1 - (1 + s) * lam) / denom)
    if ratio >= 0:
        lo, hi = 0.0, first
    elif ratio > -1:
        lo, hi = first * ratio, first
    elif ratio == -1:
        lo, hi = -first, first
    else:
        lo, hi = -math.inf, math.inf

    if math.isfinite(lam_c) and abs(lam - lam_c) <= PURE_REL_TOL * lam_c:
        verdict = Verdict.PURE_VALID
    elif lam < lam_c:
        verdict = Verdict.MIXED_VALID
    else:
        verdict = Verdict.NON_POSITIVE
    return Classification(verdict, lo, hi)


class HeisenbergCheck(NamedTuple):
    var_q: float
    heisenberg_ok: bool


def quantum_moments(lam, ordering: OrderingLike) -> HeisenbergCheck:
    """``Tr q^2 Omega_s(rho_lam) = (1 - lam s)/(2 lam)`` and whether it reaches 1/2."""
    s = _s(ordering)
    var_q = (1 - lam * s) / (2 * lam)
    return HeisenbergCheck(var_q, bool(var_q >= 0.5 - HEISENBERG_TOL))


def beta_from_lambda(lam, s):
    """Inverse temperature of the thermal state matching the quantized Gaussian."""
    return (1 / lam - s - 1) / 2


def lambda_from_beta(beta, s):
    denom = 2 * beta + 1 + s
    if not denom > 0:
        raise DomainError(f"2 beta + 1 + s = {denom} <= 0: no finite lambda")
    return 1 / denom


# ---------------------------------------------------------------------------
# Classical densities on a grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridDensity:
    """Density samples ``values[i, j] = rho(q_i, p_j)`` on a uniform rectangular grid.

    Densities whose trapezoid integral misses 1 by more than 1e-6 are
    rescaled and flagged with ``renormalized``.
    """

    q_min: float
    q_max: float
    p_min: float
    p_max: float
    values: np.ndarray
    renormalized: bool = field(default=False, init=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or min(values.shape) < 2:
            raise DomainError("values must be a 2-D array with at least 2 points per axis")
        if not np.all(np.isfinite(values)):
            raise DomainError("density contains non-finite samples")
        if np.any(values < 0):
            raise DomainError(f"density has negative samples (min {values.min():.3e})")
        if not (self.q_max > self.q_min and self.p_max > self.p_min):
            raise DomainError("grid bounds must satisfy q_min < q_max and p_min < p_max")
        total = trapezoid(trapezoid(values, self.p_axis(values.shape[1]), axis=1), self.q_axis(values.shape[0]))
        if not total >= 1e-12:
            raise DomainError(f"density is not normalizable (integral {total:.3e})")
        if abs(total - 1.0) > NORMALIZATION_TOL:
            warnings.warn(f"density integrates to {total:.9g}; renormalizing", stacklevel=2)
            values = values / total
            object.__setattr__(self, "renormalized", True)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_q(self) -> int:
        return self.values.shape[0]

    @property
    def n_p(self) -> int:
        return self.values.shape[1]

    def q_axis(self, n=None) -> np.ndarray:
        return np.linspace(self.q_min, self.q_max, self.n_q if n is None else n)

    def p_axis(self, n=None) -> np.ndarray:
        return np.linspace(self.p_min, self.p_max, self.n_p if n is None else n)

    @classmethod
    def from_function(
        cls,
        func: Callable[[np.ndarray, np.ndarray], np.ndarray],
        q_range: tuple[float, float],
        p_range: tuple[float, float],
        n_q: int,
        n_p: int,
    ) -> "GridDensity":
        q = np.linspace(*q_range, n_q)
        p = np.linspace(*p_range, n_p)
        Q, P = np.meshgrid(q, p, indexing="ij")
        return cls(q_range[0], q_range[1], p_range[0], p_range[1], func(Q, P))


@dataclass(frozen=True)
class UncertaintySummary:
    mean_q: float
    mean_p: float
    var_q: float
    var_p: float
    sum_vars: float = field(init=False)
    product: float = field(init=False)

    def __post_init__(self):
        if self.var_q < 0 or self.var_p < 0:
            raise DomainError("variances must be nonnegative")
        object.__setattr__(self, "sum_vars", self.var_q + self.var_p)
        object.__setattr__(self, "product", math.sqrt(self.var_q) * math.sqrt(self.var_p))


@dataclass(frozen=True)
class CovarianceMatrix2x2:
    """Symmetric covariance with the half-anticommutator convention (vacuum = diag(1/2, 1/2))."""

    vqq: float
    vpp: float
    vqp: float = 0.0

    def __post_init__(self):
        if self.vqq < 0 or self.vpp < 0:
            raise DomainError("diagonal covariances must be nonnegative")
        if abs(self.vqp) > math.sqrt(self.vqq * self.vpp) * (1 + 1e-12):
            raise DomainError("|vqp| exceeds sqrt(vqq * vpp)")

    def as_array(self) -> np.ndarray:
        return np.array([[self.vqq, self.vqp], [self.vqp, self.vpp]])


def classical_moments_from_grid(d: GridDensity) -> UncertaintySummary:
    q = d.q_axis()
    p = d.p_axis()

    def integrate(f):
        return trapezoid(trapezoid(f, p, axis=1), q)

    rho = d.values
    norm = integrate(rho)
    if not norm >= 1e-12:
        raise DomainError(f"density is not normalizable (integral {norm:.3e})")
    Q = q[:, None]
    P = p[None, :]
    mean_q = integrate(rho * Q) / norm
    mean_p = integrate(rho * P) / norm
    var_q = integrate(rho * (Q - mean_q) ** 2) / norm
    var_p = integrate(rho * (P - mean_p) ** 2) / norm
    return UncertaintySummary(float(mean_q), float(mean_p), float(var_q), float(var_p))


def grid_radial_transform(d: GridDensity) -> RadialTransform:
    """Radial Fourier transform of a rotation-invariant sampled density.

    For an isotropic density ``F(r) = (1/pi) int rho(q, p) cos(sqrt2 r p) dq dp``,
    so only the p-marginal is needed; the q-marginal gives the same answer and
    the two are averaged.  The decay hint is half the rate of the Gaussian
    with the same second moments, which keeps the quadrature cutoff generous.
    """
    q, p = d.q_axis(), d.p_axis()
    marg_p = trapezoid(d.values, q, axis=0)
    marg_q = trapezoid(d.values, p, axis=1)
    u = classical_moments_from_grid(d)

    def func(r):
        k = math.sqrt(2.0) * float(r)
        fp = trapezoid(marg_p * np.cos(k * (p - u.mean_p)), p)
        fq = trapezoid(marg_q * np.cos(k * (q - u.mean_q)), q)
        return 0.5 * (fp + fq) / math.pi

    return RadialTransform(func, decay=u.sum_vars / 4)


class ConditionResult(NamedTuple):
    passes: bool
    margin: float


def uncertainty_condition(u: UncertaintySummary, s) -> ConditionResult:
    """Necessary condition ``var_q + var_p >= 1 + s`` for a positive s-ordered quantization.

    Failing it certifies a non-positive operator; passing proves nothing.
    """
    margin = u.sum_vars - (1 + s)
    return ConditionResult(bool(margin >= -CONDITION_TOL), float(margin))


def quantized_covariance(u: UncertaintySummary, s) -> CovarianceMatrix2x2:
    """Covariance of the s-ordered quantization of a centred density.

    The operator is diagonal in the number basis, so the q and p variances
    coincide at ``(var_q + var_p)/2 - s/2`` and the cross term vanishes.
    """
    delta = 0.5 * u.sum_vars - 0.5 * s
    return CovarianceMatrix2x2(max(delta, 0.0), max(delta, 0.0), 0.0)


def gaussification_positive(v: CovarianceMatrix2x2) -> bool:
    """Physicality of a Gaussian covariance: ``V + i Omega/2 >= 0``, i.e. ``det V >= 1/4``."""
    det = v.vqq * v.vpp - v.vqp**2
    return bool(v.vqq >= 0 and v.vpp >= 0 and det >= 0.25 - 1e-12)
