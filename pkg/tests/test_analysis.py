import math
import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from qphase import (
    ClassicalGaussian,
    DomainError,
    Verdict,
    cg_gaussian_closed,
    cg_quantize_numeric,
    classify_state,
    quantum_moments_from_operator,
)
from qphase.analysis import (
    CovarianceMatrix2x2,
    GridDensity,
    UncertaintySummary,
    beta_from_lambda,
    classical_moments_from_grid,
    classify_parameters,
    critical_lambda,
    gaussification_positive,
    grid_radial_transform,
    lambda_from_beta,
    quantized_covariance,
    quantum_moments,
    uncertainty_condition,
)

LAMBDAS = [0.1, 0.5, 1.0, 2.0, 5.0]
ORDERINGS = [-1.0, -0.5, 0.0, 0.5, 1.0]


def gaussian_grid(lam, half_width=8.0, n=401):
    g = ClassicalGaussian(lam)
    return GridDensity.from_function(g.density, (-half_width, half_width), (-half_width, half_width), n, n)


# -- critical line and verdicts ----------------------------------------------


def test_critical_lambda_examples():
    assert critical_lambda(0.0) == 1.0
    assert critical_lambda(1.0) == 0.5
    assert critical_lambda(-0.5) == 2.0
    assert critical_lambda(-1.0) == math.inf
    assert critical_lambda(-3.0) == math.inf


def test_classify_parameters_examples():
    assert classify_parameters(1.0, 0.0).verdict is Verdict.PURE_VALID
    assert classify_parameters(0.5, 0.0).verdict is Verdict.MIXED_VALID
    bad = classify_parameters(2.0, 0.0)
    assert bad.verdict is Verdict.NON_POSITIVE
    assert bad.min_eigenvalue == pytest.approx(-4 / 9, abs=1e-15)
    assert classify_parameters(1e6, -1.0).verdict is Verdict.MIXED_VALID
    with pytest.raises(DomainError):
        classify_parameters(0.0, 0.0)


@pytest.mark.parametrize("lam", LAMBDAS)
@pytest.mark.parametrize("s", ORDERINGS)
def test_parameter_verdict_matches_operator_verdict(lam, s):
    op = cg_gaussian_closed(ClassicalGaussian(lam), s, 64)
    from_params = classify_parameters(lam, s).verdict
    if from_params is Verdict.NON_POSITIVE and abs(op.ratio) >= 1:
        # entries do not decay, so the truncated trace is not 1; negativity is still visible
        assert op.entries.min() < 0
        return
    assert classify_state(op).verdict is from_params


@given(st.floats(0.01, 100.0), st.floats(-0.99, 1.0))
def test_verdict_monotone_in_lambda(lam, s):
    lam_c = critical_lambda(s)
    v = classify_parameters(lam, s).verdict
    if lam < lam_c * (1 - 1e-9):
        assert v is Verdict.MIXED_VALID
    elif lam > lam_c * (1 + 1e-9):
        assert v is Verdict.NON_POSITIVE


@given(st.floats(0.01, 100.0), st.floats(-0.99, 0.99))
def test_eigenvalue_bounds_contain_entries(lam, s):
    c = classify_parameters(lam, s)
    entries = cg_gaussian_closed(ClassicalGaussian(lam), s, 40).entries
    slack = 1e-12 * np.abs(entries).max()
    assert c.min_eigenvalue <= entries.min() + slack
    assert c.max_eigenvalue >= entries.max() - slack


# -- Heisenberg check ---------------------------------------------------------


def test_quantum_moments_examples():
    assert quantum_moments(0.5, 0.0).var_q == 1.0
    r = quantum_moments(1.0, 0.0)
    assert r.var_q == 0.5 and r.heisenberg_ok
    r = quantum_moments(2.0, 0.0)
    assert r.var_q == 0.25 and not r.heisenberg_ok


@pytest.mark.parametrize("s", [Fraction(-9, 10), Fraction(-1, 2), Fraction(0), Fraction(1, 3), Fraction(1)])
def test_heisenberg_boundary_is_critical_line_exactly(s):
    lam_c = 1 / (1 + s)
    assert quantum_moments(lam_c, s).var_q == Fraction(1, 2)
    eps = Fraction(1, 10**9)
    assert quantum_moments(lam_c - eps, s).var_q > Fraction(1, 2)
    assert quantum_moments(lam_c + eps, s).var_q < Fraction(1, 2)


@given(st.floats(0.01, 10.0), st.floats(-1.0, 1.0))
def test_heisenberg_agrees_with_verdict(lam, s):
    assume(abs(lam * (1 + s) - 1) > 1e-9)
    ok = quantum_moments(lam, s).heisenberg_ok
    assert ok == (classify_parameters(lam, s).verdict is not Verdict.NON_POSITIVE)


@pytest.mark.parametrize("lam,s", [(0.5, 0.0), (1.0, -0.5), (5.0, -1.0), (0.1, 1.0), (0.3, 0.5)])
def test_closed_variance_matches_operator(lam, s):
    op = cg_gaussian_closed(ClassicalGaussian(lam), s, 2048)
    assert quantum_moments_from_operator(op).var_q == pytest.approx(quantum_moments(lam, s).var_q, abs=1e-9)


# -- thermal correspondence ---------------------------------------------------


def test_beta_examples():
    assert beta_from_lambda(1.0, 0.0) == 0.0
    assert beta_from_lambda(0.5, 0.0) == 0.5
    assert beta_from_lambda(2.0, 0.0) == -0.25
    assert beta_from_lambda(0.5, 1.0) == 0.0
    assert lambda_from_beta(0.0, 0.0) == 1.0
    assert lambda_from_beta(1.5, 0.0) == 0.25
    with pytest.raises(DomainError):
        lambda_from_beta(-0.5, -1.0)


@given(st.floats(1e-3, 1e3), st.floats(-1.0, 1.0))
def test_beta_round_trip(lam, s):
    assert lambda_from_beta(beta_from_lambda(lam, s), s) == pytest.approx(lam, rel=1e-12)


@given(st.floats(1e-3, 1e3), st.floats(-0.999, 1.0))
def test_beta_sign_follows_verdict(lam, s):
    lam_c = critical_lambda(s)
    assume(abs(lam - lam_c) > 1e-9 * lam_c)
    beta = beta_from_lambda(lam, s)
    assert (beta > 0) == (lam < lam_c)


@given(st.floats(0.01, 10.0), st.floats(-1.0, 1.0))
def test_beta_matches_thermal_ratio(lam, s):
    # substituting lam = 1/(2 beta + 1 + s) into the ratio gives r = beta/(beta + 1)
    op = cg_gaussian_closed(ClassicalGaussian(lam), s, 2)
    beta = beta_from_lambda(lam, s)
    assume(abs(beta + 1) > 1e-6)
    assert op.ratio == pytest.approx(beta / (beta + 1), rel=1e-9, abs=1e-12)


# -- grid densities -----------------------------------------------------------


def test_grid_moments_of_gaussian():
    u = classical_moments_from_grid(gaussian_grid(0.5))
    assert u.var_q == pytest.approx(1.0, abs=1e-4)
    assert u.var_p == pytest.approx(1.0, abs=1e-4)
    assert abs(u.mean_q) < 1e-12 and abs(u.mean_p) < 1e-12


def test_grid_moments_of_narrow_gaussian():
    # lambda = 1e4 has sigma = 0.007: a fine grid over a small window
    g = ClassicalGaussian(1e4)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        d = GridDensity.from_function(g.density, (-0.1, 0.1), (-0.1, 0.1), 801, 801)
    u = classical_moments_from_grid(d)
    assert u.var_q < 1e-3
    assert u.var_q == pytest.approx(g.variance, rel=1e-4)


def test_grid_renormalizes_with_warning():
    g = ClassicalGaussian(0.5)
    with pytest.warns(UserWarning, match="renormaliz"):
        d = GridDensity.from_function(lambda q, p: 3 * g.density(q, p), (-8, 8), (-8, 8), 101, 101)
    assert d.renormalized
    assert classical_moments_from_grid(d).var_q == pytest.approx(1.0, abs=1e-3)


def test_grid_rejects_bad_densities():
    with pytest.raises(DomainError):
        GridDensity(-1, 1, -1, 1, np.zeros((5, 5)))
    with pytest.raises(DomainError):
        GridDensity(-1, 1, -1, 1, -np.ones((5, 5)))
    with pytest.raises(DomainError):
        GridDensity(1, -1, -1, 1, np.ones((5, 5)))
    with pytest.raises(DomainError):
        GridDensity(-1, 1, -1, 1, np.full((5, 5), np.nan))


def test_grid_centred_variance_of_offset_density():
    g = ClassicalGaussian(0.5)
    d = GridDensity.from_function(lambda q, p: g.density(q - 1.5, p + 0.5), (-9, 9), (-9, 9), 401, 401)
    u = classical_moments_from_grid(d)
    assert u.mean_q == pytest.approx(1.5, abs=1e-6)
    assert u.mean_p == pytest.approx(-0.5, abs=1e-6)
    assert u.var_q == pytest.approx(1.0, abs=1e-4)


def test_grid_transform_of_gaussian_mixture():
    """Quantizing the samples of an isotropic mixture gives the mixture of closed forms."""
    g1, g2 = ClassicalGaussian(0.4), ClassicalGaussian(1.5)
    d = GridDensity.from_function(
        lambda q, p: 0.3 * g1.density(q, p) + 0.7 * g2.density(q, p), (-10, 10), (-10, 10), 401, 401
    )
    F = grid_radial_transform(d)
    assert F(0.0) == pytest.approx(1 / math.pi, rel=1e-12)
    op = cg_quantize_numeric(F, 0.25, 12, rel_tol=1e-8)
    ref = 0.3 * cg_gaussian_closed(g1, 0.25, 12).entries + 0.7 * cg_gaussian_closed(g2, 0.25, 12).entries
    np.testing.assert_allclose(op.entries, ref, atol=1e-9)


# -- uncertainty condition and Gaussification ---------------------------------


def test_condition_examples():
    assert uncertainty_condition(classical_moments_from_grid(gaussian_grid(0.5)), 0.0).passes
    fails = uncertainty_condition(classical_moments_from_grid(gaussian_grid(2.0)), 0.0)
    assert not fails.passes and fails.margin == pytest.approx(-0.5, abs=1e-4)
    assert uncertainty_condition(UncertaintySummary(0, 0, 0.0, 0.0), -1.0).passes


@given(st.floats(0.05, 10.0), st.floats(-1.0, 1.0))
def test_condition_failure_implies_nonpositive(lam, s):
    """For Gaussians the condition is exact: it fails precisely off the positive side of the critical line."""
    v = 1 / (2 * lam)
    res = uncertainty_condition(UncertaintySummary(0, 0, v, v), s)
    assume(abs(res.margin) > 1e-9)
    if not res.passes:
        assert classify_parameters(lam, s).verdict is Verdict.NON_POSITIVE
    else:
        assert classify_parameters(lam, s).verdict is not Verdict.NON_POSITIVE


@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_product_bound(vq, vp):
    # AM-GM: sqrt(vq vp) <= (vq + vp)/2
    u = UncertaintySummary(0, 0, vq, vp)
    assert u.product <= u.sum_vars / 2 * (1 + 1e-15) + 1e-300


def test_quantized_covariance_examples():
    u = UncertaintySummary(0, 0, 1.0, 1.0)
    assert quantized_covariance(u, 0.0).as_array() == pytest.approx(np.diag([1.0, 1.0]))
    assert quantized_covariance(u, 1.0).vqq == 0.5
    assert gaussification_positive(quantized_covariance(u, 1.0))
    narrow = UncertaintySummary(0, 0, 0.25, 0.25)
    assert not gaussification_positive(quantized_covariance(narrow, 0.0))


@given(st.floats(0.05, 10.0), st.floats(-1.0, 1.0))
def test_quantized_covariance_matches_operator_variance(lam, s):
    v = 1 / (2 * lam)
    cov = quantized_covariance(UncertaintySummary(0, 0, v, v), s)
    expected = quantum_moments(lam, s).var_q
    if expected > 0:
        assert cov.vqq == pytest.approx(expected, rel=1e-12)


def test_gaussification_matches_condition():
    for lam in LAMBDAS:
        for s in ORDERINGS:
            v = 1 / (2 * lam)
            u = UncertaintySummary(0, 0, v, v)
            cond = uncertainty_condition(u, s)
            if abs(cond.margin) > 1e-9:
                assert gaussification_positive(quantized_covariance(u, s)) == cond.passes


def test_covariance_validation():
    with pytest.raises(DomainError):
        CovarianceMatrix2x2(-1.0, 1.0)
    with pytest.raises(DomainError):
        CovarianceMatrix2x2(1.0, 1.0, 2.0)
