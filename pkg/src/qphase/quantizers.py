"""Quantization maps for isotropic phase-space densities.

Conventions
-----------
Complex coordinate ``z = (q + i p)/sqrt(2)``; annihilation operator
``a = (q + i p)/sqrt(2)``.  The s-ordered map of a density with radial
transform ``F(|xi|)`` is

    Omega_s(f) = int d^2xi F(|xi|) exp(xi a^dag) exp(-conj(xi) a) exp(-(1-s)|xi|^2/2)

with ``d^2xi`` the Lebesgue measure on the complex plane.  For the
Gaussian ``(lam/pi) exp(-lam (q^2 + p^2))`` the transform is
``F(r) = exp(-r^2/(2 lam))/pi`` and the map reproduces the closed forms
below with unit measure constant (checked by ``test_measure_calibration``).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from .errors import DomainError, NotQuantizable, QuadratureError
from .fock_core import (
    DenseOperator,
    FockDiagonal,
    laguerre_diagonal,
    displaced_matrix,
)

# d^2xi = pi d(|xi|^2) for radial integrands
RADIAL_MEASURE = math.pi
# Tr[rho U_s(z)] = DEQUANT_NORM * int d^2xi chi(xi) exp(-(1+s)|xi|^2/2) exp(conj(xi) z - xi conj(z))
DEQUANT_NORM = 1.0 / (2.0 * math.pi**2)

_TAIL_EXPONENT = math.log(1e16)


@dataclass(frozen=True)
class ClassicalGaussian:
    """Isotropic Gaussian ``(lam/pi) exp(-lam (q^2 + p^2))`` centred at the origin."""

    lam: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive and finite, got {self.lam}")

    @property
    def variance(self) -> float:
        """Variance of q (and of p)."""
        return 1.0 / (2.0 * self.lam)

    def density(self, q, p):
        return self.lam / np.pi * np.exp(-self.lam * (np.asarray(q) ** 2 + np.asarray(p) ** 2))

    def density_z(self, z):
        """Same density written in ``z``; ``(lam/pi) exp(-2 lam |z|^2)``."""
        return self.lam / np.pi * np.exp(-2.0 * self.lam * np.abs(z) ** 2)


@dataclass(frozen=True)
class OrderingParams:
    """Ordering weights: ``gamma`` for q,p products, ``s`` for a, a^dag products."""

    gamma: float = 0.0
    s: float = 0.0
    extended_s: bool = False

    def __post_init__(self):
        if not -1.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if not math.isfinite(self.s):
            raise DomainError(f"s must be finite, got {self.s}")
        if not self.extended_s and not -1.0 <= self.s <= 1.0:
            raise DomainError(f"s={self.s} outside [-1, 1]; pass extended_s=True to allow it")


OrderingLike = Union[OrderingParams, float]


def _ordering(ordering: OrderingLike) -> OrderingParams:
    if isinstance(ordering, OrderingParams):
        return ordering
    return OrderingParams(s=float(ordering))


@dataclass(frozen=True)
class RadialTransform:
    """Radial Fourier transform ``F(|xi|)`` with its Gaussian decay rate.

    ``decay`` is the ``c`` in ``|F(r)| <~ exp(-c r^2)``; it fixes the
    quadrature cutoff and the convergence test.
    """

    func: Callable[[np.ndarray], np.ndarray]
    decay: float

    def __call__(self, r):
        return self.func(r)


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------


def gaussian_fourier_radial(g: ClassicalGaussian, xi_abs):
    return np.exp(-np.asarray(xi_abs, dtype=float) ** 2 / (2.0 * g.lam)) / np.pi


def gaussian_transform(g: ClassicalGaussian) -> RadialTransform:
    return RadialTransform(lambda r: gaussian_fourier_radial(g, r), 1.0 / (2.0 * g.lam))


def _closed_form(lam: float, s: float, dim: int) -> FockDiagonal:
    denom = 1.0 + (1.0 - s) * lam
    if not denom > 0:
        raise DomainError(f"1 + (1-s) lambda = {denom} must be positive")
    first = 2.0 * lam / denom
    ratio = (1.0 - (1.0 + s) * lam) / denom
    return FockDiagonal.geometric(first, ratio, dim)


def weyl_gaussian_closed(g: ClassicalGaussian, dim: int) -> FockDiagonal:
    """Symmetric (Weyl) quantization: ``rho_nn = 2lam/(1+lam) ((1-lam)/(1+lam))^n``."""
    return _closed_form(g.lam, 0.0, dim)


def cg_gaussian_closed(g: ClassicalGaussian, ordering: OrderingLike, dim: int) -> FockDiagonal:
    """s-ordered quantization of the Gaussian.

    ``rho_nn = 2lam/(1+(1-s)lam) * ((1-(1+s)lam)/(1+(1-s)lam))^n``; off-diagonal
    elements vanish.
    """
    return _closed_form(g.lam, _ordering(ordering).s, dim)


def delta_quantize(ordering: OrderingLike, dim: int) -> FockDiagonal:
    """Infinite-lambda limit of :func:`cg_gaussian_closed`.

    Only antinormal-or-beyond orderings (``s <= -1``) give a state; for
    ``s = -1`` it is the vacuum projector.
    """
    s = _ordering(ordering).s
    if s == 1.0:
        raise NotQuantizable("delta has no finite quantization at s = 1", None)
    first = 2.0 / (1.0 - s)
    ratio = -(1.0 + s) / (1.0 - s)
    op = FockDiagonal.geometric(first, ratio, dim)
    if s > -1.0:
        raise NotQuantizable(
            f"delta maps to a non-positive operator at s={s} (ratio {ratio:+.3g})", op
        )
    return op


# ---------------------------------------------------------------------------
# Numeric quantization
# ---------------------------------------------------------------------------


def _radial_cutoff(rate: float, degree: int) -> float:
    """Smallest ``U`` with ``exp(-rate U) U^degree < 1e-16`` (``U = |xi|^2``)."""
    def excess(u):
        return rate * u - degree * math.log(max(u, 1.0)) - _TAIL_EXPONENT

    hi = max(1.0, _TAIL_EXPONENT / rate)
    while excess(hi) < 0:
        hi *= 2.0
    lo = 0.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return hi


def _quad(func, lo, hi, rel_tol, abs_tol, what):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(
            func, lo, hi, epsrel=rel_tol, epsabs=abs_tol, limit=2000, full_output=True
        )[:3]
    if not (math.isfinite(value) and err <= 10.0 * max(abs_tol, rel_tol * abs(value))):
        raise QuadratureError(
            f"{what}: estimated error {err:.3e} on value {value:.3e} after "
            f"{info['last']} subintervals"
        )
    return value


def cg_quantize_numeric(
    ftilde: RadialTransform,
    ordering: OrderingLike,
    dim: int,
    rel_tol: float = 1e-10,
) -> FockDiagonal:
    """s-ordered quantization by adaptive radial quadrature.

    The angular integral is done analytically; only diagonal elements
    survive and ``<n|exp(xi a^dag) exp(-conj(xi) a)|n> = L_n(|xi|^2)``, so

        rho_nn = pi * int_0^U du F(sqrt(u)) exp(-(1-s) u/2) L_n(u).

    Independent of the closed forms; used as their oracle.
    """
    s = _ordering(ordering).s
    rate = 0.5 * (1.0 - s) + ftilde.decay
    if not rate > 0:
        raise DomainError(
            f"radial integrand does not decay: (1-s)/2 + decay = {rate:.3g} <= 0"
        )
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    cutoff = _radial_cutoff(rate, dim)
    damping = 0.5 * (1.0 - s)
    abs_tol = rel_tol * 1e-3

    entries = np.empty(dim)
    for n in range(dim):
        def integrand(u, n=n):
            lag = laguerre_diagonal(n + 1, u)[n]
            return RADIAL_MEASURE * float(ftilde(math.sqrt(u))) * math.exp(-damping * u) * lag

        entries[n] = _quad(integrand, 0.0, cutoff, rel_tol, abs_tol, f"rho_{n}{n}")

    return FockDiagonal(entries, tail_bound=_estimated_tail(entries))


def _estimated_tail(entries: np.ndarray) -> float:
    """Tail mass extrapolated from the last two entries as a geometric series."""
    if entries.size < 2 or entries[-2] == 0.0:
        return math.inf if entries.size < 2 else abs(float(entries[-1])) * 1e3
    r = abs(float(entries[-1] / entries[-2]))
    if r >= 1.0:
        return math.inf
    return abs(float(entries[-1])) * r / (1.0 - r)


def _hermite_rule(npts: int, scale: float):
    """Nodes/weights for ``int dx exp(-scale x^2) g(x)``."""
    t, w = special.roots_hermite(npts)
    return t / math.sqrt(scale), w / math.sqrt(scale)


def _weyl_integrate(g: ClassicalGaussian, gamma: float, dim: int, npts: int) -> np.ndarray:
    # Gaussian weight: transform exp(-(x^2+y^2)/(4 lam)) times exp(-|beta|^2/2) from D(beta)
    scale = 0.25 / g.lam + 0.25
    x, w = _hermite_rule(npts, scale)
    out = np.zeros((dim, dim), dtype=complex)
    y = x
    for xi_, wx in zip(x, w):
        beta = (y - 1j * xi_) / math.sqrt(2.0)
        mats = displaced_matrix(dim, beta)
        phase = np.exp(0.5j * gamma * xi_ * y)
        out += wx * np.einsum("j,jnm->nm", w * phase, mats)
    return out / (2.0 * math.pi)


def weyl_gamma_quantize_numeric(
    g: ClassicalGaussian,
    gamma: float,
    dim: int,
    rel_tol: float = 1e-10,
) -> DenseOperator:
    """gamma-ordered Weyl quantization of the Gaussian as a dense matrix.

    Evaluates ``int dx dy F(x, y) <n|exp(-i(x q + y p))|m> exp(i gamma x y / 2)``
    with ``F = exp(-(x^2+y^2)/(4 lam))/(2 pi)`` on a tensor Gauss-Hermite rule,
    doubling the node count until successive results agree.
    """
    OrderingParams(gamma=gamma)
    if not 1 <= dim <= 64:
        raise DomainError(f"dim must lie in [1, 64] for the 2-D quadrature, got {dim}")
    npts = max(32, 2 * dim)
    prev = _weyl_integrate(g, gamma, dim, npts)
    while npts < 1024:
        npts *= 2
        cur = _weyl_integrate(g, gamma, dim, npts)
        diff = np.max(np.abs(cur - prev))
        if diff <= rel_tol * max(1.0, np.max(np.abs(cur))):
            return DenseOperator(cur)
        prev = cur
    raise QuadratureError(f"2-D Weyl quadrature did not converge (last change {diff:.3e})")


def hermiticity_defect(op: DenseOperator) -> float:
    a = op.entries
    return float(np.max(np.abs(a - a.conj().T)))


# ---------------------------------------------------------------------------
# Dequantization
# ---------------------------------------------------------------------------


def _decay_rate(op: FockDiagonal, s: float) -> float:
    """Gaussian decay rate in ``u = |xi|^2`` of the dequantizer integrand."""
    if op.ratio is not None:
        r = op.ratio
        if abs(r) >= 1.0:
            raise DomainError(f"|ratio| = {abs(r):.3g} >= 1: operator is not trace class")
        # sum_n c r^n L_n(u) = c/(1-r) exp(-r u/(1-r))
        return r / (1.0 - r) + 0.5 * (1.0 + s)
    return 0.5 * (1.0 + s)


def dequantize_point(
    op: FockDiagonal,
    ordering: OrderingLike,
    z: complex,
    rel_tol: float = 1e-8,
) -> float:
    """Phase-space value ``Tr[op U_s(z)]`` of a diagonal operator.

    The dequantizer is the quantizer kernel with ``s -> -s``.  With the
    angular integral done in closed form,

        Tr[op U_s(z)] = 1/(2 pi) int_0^U du J0(2|z| sqrt(u)) exp(-(1+s) u/2) sum_n rho_nn L_n(u).

    The n-sum is taken inside the integral so that antinormal ordering
    works whenever the summed kernel decays.
    """
    s = _ordering(ordering).s
    z = complex(z)
    if abs(z) > 20:
        raise DomainError(f"|z| = {abs(z):.3g} exceeds 20")
    rate = _decay_rate(op, s)
    if not rate > 0:
        raise DomainError(
            f"dequantizer integral diverges for s={s} with these entries (decay rate {rate:.3g})"
        )
    # Fock-sum roundoff grows like exp(|r| u), so the cutoff is kept no larger
    # than the tolerance needs; quad reports failure if roundoff still dominates
    cutoff = math.log(1.0 / (rate * rel_tol * 1e-2)) / rate
    if op.ratio is None:
        cutoff = max(cutoff, _radial_cutoff(rate, op.dim))

    entries = [float(v) for v in op.entries]
    dim = len(entries)
    stop = rel_tol / 10.0
    two_z = 2.0 * abs(z)

    def integrand(u):
        # L_n(u) recurrence with the n-sum truncated once increments stay small
        total = entries[0]
        prev, cur = 1.0, 1.0 - u
        small = 0
        for n in range(1, dim):
            inc = entries[n] * cur
            total += inc
            if n > u and abs(inc) < stop * max(1.0, abs(total)):
                small += 1
                if small >= 3:
                    break
            else:
                small = 0
            prev, cur = cur, ((2 * n + 1 - u) * cur - n * prev) / (n + 1)
        return special.j0(two_z * math.sqrt(u)) * math.exp(-0.5 * (1.0 + s) * u) * total

    value = _quad(integrand, 0.0, cutoff, rel_tol, rel_tol * 1e-3, "dequantizer")
    return DEQUANT_NORM * RADIAL_MEASURE * value
