import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levy_inventory import (
    DemandModel,
    DomainError,
    Exponential,
    Gamma,
    Policy,
    fpt_laplace,
    fpt_moments,
    laplace_exponent,
    phi_inverse,
)
from oracles import phi_bisect

POISSON = DemandModel(1.0, 1.0, 1.0)
EXPO = DemandModel(1.0, 0.0, 0.0, 2.0, Exponential(4.0))
GAMMA = DemandModel(0.7, 0.0, 0.0, 1.3, Gamma(2.5, 3.0))
GENERAL = DemandModel(0.8, 1.2, 0.7, 1.5, Gamma(2.2, 3.0))
PURE_JUMP = DemandModel(0.0, 0.5, 2.0, 1.0, Gamma(0.6, 1.5))
S_GRID = np.geomspace(0.01, 1000.0, 20)


@pytest.mark.parametrize("model", [POISSON, EXPO, GAMMA, GENERAL, PURE_JUMP, DemandModel(2.5)])
@pytest.mark.parametrize("s", [0.0, 0.1, 1.0, 10.0, 100.0])
def test_phi_residual(model, s):
    theta = phi_inverse(model, s)
    assert theta >= 0
    assert abs(laplace_exponent(model, theta) - s) <= 1e-10 * max(1.0, s)


@pytest.mark.parametrize("model, branch", [(POISSON, "lambert"), (EXPO, "quadratic")])
def test_closed_branches_agree_with_newton(model, branch):
    for s in S_GRID:
        closed = phi_inverse(model, s, method=branch)
        newton = phi_inverse(model, s, method="newton")
        assert closed == pytest.approx(newton, rel=1e-9)


@pytest.mark.parametrize("model", [POISSON, EXPO, GAMMA, GENERAL])
@pytest.mark.parametrize("s", [0.5, 2.0, 30.0])
def test_phi_matches_bisection_oracle(model, s):
    assert phi_inverse(model, s) == pytest.approx(phi_bisect(model, s), rel=1e-12)


def test_phi_poisson_example():
    theta = phi_inverse(POISSON, 2.0)
    assert abs(laplace_exponent(POISSON, theta) - 2.0) < 1e-12
    assert theta == pytest.approx(phi_bisect(POISSON, 2.0), rel=1e-9)


def test_phi_drift_only_and_zero():
    assert phi_inverse(DemandModel(4.0), 3.0) == 0.75
    assert phi_inverse(GENERAL, 0.0) == 0.0


def test_phi_lambert_survives_huge_s():
    # the naive closed form overflows exp() here
    s = 5e3
    theta = phi_inverse(POISSON, s)
    assert math.isfinite(theta)
    assert abs(laplace_exponent(POISSON, theta) - s) <= 1e-10 * s


def test_phi_errors():
    with pytest.raises(DomainError):
        phi_inverse(POISSON, -1.0)
    with pytest.raises(ValueError):
        phi_inverse(GAMMA, 1.0, method="quadratic")
    with pytest.raises(ValueError):
        phi_inverse(EXPO, 1.0, method="lambert")
    with pytest.raises(ValueError):
        phi_inverse(EXPO, 1.0, method="secant")


@given(
    st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3), st.floats(0.05, 3),
    st.floats(0.3, 4), st.floats(0.5, 5), st.floats(1e-3, 1e4),
)
def test_phi_residual_property(mu, alpha, lam, lam_c, beta, eta, s):
    model = DemandModel(mu, alpha, lam, lam_c, Gamma(beta, eta))
    theta = phi_inverse(model, s)
    assert 0 <= theta < eta
    if abs(laplace_exponent(model, theta) - s) <= 1e-9 * max(1.0, s):
        return
    # near the gamma pole psi is too steep for that; the root must then sit within a few ulps
    below, above = theta, theta
    for _ in range(3):
        below, above = math.nextafter(below, 0.0), math.nextafter(above, eta)
    assert laplace_exponent(model, below) <= s <= laplace_exponent(model, above)


def test_phi_huge_s_newton():
    theta = phi_inverse(POISSON, 1e300, method="newton")
    assert abs(laplace_exponent(POISSON, theta) / 1e300 - 1) <= 1e-9
    # beyond what psi reaches below the pole in floating point the root pins to the pole
    theta = phi_inverse(GENERAL, 1e300, method="newton")
    assert 0 < GENERAL.jump_dist.rate - theta <= 4 * math.ulp(GENERAL.jump_dist.rate)


def test_fpt_laplace_values():
    assert fpt_laplace(GENERAL, Policy(5, 2, 1), 3, 0.0) == 1.0
    assert fpt_laplace(DemandModel(1.0), Policy(5, 2, 1), 1, 3.0) == pytest.approx(math.exp(-6), rel=1e-15)


def test_fpt_laplace_monotone():
    p = Policy(5, 2, 1)
    s = np.linspace(0, 5, 30)
    v = [fpt_laplace(GENERAL, p, 2, x) for x in s]
    assert np.all(np.diff(v) < 0)
    assert fpt_laplace(GENERAL, p, 3, 1.0) < fpt_laplace(GENERAL, p, 2, 1.0)


@pytest.mark.parametrize("model", [POISSON, EXPO, GAMMA, GENERAL])
def test_moments_are_transform_derivatives(model):
    p, n, h = Policy(10, 2, 3), 2, 1e-5
    f = [fpt_laplace(model, p, n, k * h) for k in (0, 1, 2)]
    # one-sided differences: the transform is not defined for s < 0
    d1 = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    m = fpt_moments(model, p, n)
    assert -d1 == pytest.approx(m.mean, rel=1e-4)
    h2 = 1e-3
    g = [fpt_laplace(model, p, n, k * h2) for k in range(4)]
    d2 = (2 * g[0] - 5 * g[1] + 4 * g[2] - g[3]) / h2**2
    assert d2 == pytest.approx(m.mean**2 + m.variance, rel=1e-3)


def test_moment_examples():
    m = fpt_moments(DemandModel(2.0), Policy(10, 4, 2), 3)
    assert (m.mean, m.variance) == (4.0, 0.0)
    m = fpt_moments(POISSON, Policy(10, 2, 3), 1)
    assert (m.mean, m.variance) == pytest.approx((1.0, 0.25), rel=1e-15)
    m = fpt_moments(DemandModel(1.0, 0.0, 0.0, 2.0, Exponential(4.0)), Policy(10, 3, 1), 2)
    assert (m.mean, m.variance) == pytest.approx((8 / 3, 64 / 216), rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_moment_specializations(n):
    p = Policy(10, 1.7, 2.3)
    k = 1.7 + (n - 1) * 2.3
    mu, alpha, lam, lam_c, beta, eta = 0.9, 1.3, 0.6, 1.4, 2.7, 2.1
    cases = [
        (DemandModel(mu, alpha, lam), k / (mu + alpha * lam), alpha**2 * lam * k / (mu + alpha * lam) ** 3),
        (
            DemandModel(mu, 0, 0, lam_c, Exponential(eta)),
            eta * k / (mu * eta + lam_c),
            2 * eta * lam_c * k / (mu * eta + lam_c) ** 3,
        ),
        (
            DemandModel(mu, 0, 0, lam_c, Gamma(beta, eta)),
            eta * k / (mu * eta + beta * lam_c),
            beta * (beta + 1) * eta * lam_c * k / (mu * eta + beta * lam_c) ** 3,
        ),
        (
            DemandModel(mu, alpha, lam, lam_c, Gamma(beta, eta)),
            eta * k / (mu * eta + alpha * eta * lam + beta * lam_c),
            (alpha**2 * eta**3 * lam + beta * (beta + 1) * eta * lam_c) * k
            / (mu * eta + alpha * eta * lam + beta * lam_c) ** 3,
        ),
    ]
    for model, mean, var in cases:
        m = fpt_moments(model, p, n)
        assert m.mean == pytest.approx(mean, rel=1e-13)
        assert m.variance == pytest.approx(var, rel=1e-13)


def test_moments_increase_with_n():
    p = Policy(10, 2, 3)
    ms = [fpt_moments(GENERAL, p, n) for n in (1, 2, 3)]
    assert ms[0].mean < ms[1].mean < ms[2].mean
    assert ms[0].variance < ms[1].variance < ms[2].variance


def test_gamma_one_moments_equal_exponential():
    p = Policy(10, 2, 3)
    a = fpt_moments(DemandModel(0.5, 0.2, 1.0, 2.0, Exponential(3.0)), p, 2)
    b = fpt_moments(DemandModel(0.5, 0.2, 1.0, 2.0, Gamma(1.0, 3.0)), p, 2)
    assert a.mean == pytest.approx(b.mean, rel=1e-12)
    assert a.variance == pytest.approx(b.variance, rel=1e-12)


def test_moment_index_validation():
    with pytest.raises(DomainError):
        fpt_moments(GENERAL, Policy(1, 1, 1), 0)
    with pytest.raises(DomainError):
        fpt_laplace(GENERAL, Policy(1, 1, 1), 0, 1.0)
