"""Published reference values, checked against the full pipeline."""

import numpy as np
import pytest

from gptcorners.coeffs import b_from_sigma, mu_from_b
from gptcorners.geometry import cap_constants
from gptcorners.oracle import regular_polygon, sc_taylor

CAP_SIGMA = np.array([
    0.336144826114240 - 0.076400757440234j,
    -1.75172536453942 - 0.64675188584893j,
    0.03406793409600 + 1.78388113685821j,
    0.82403911365013 - 0.50742133234639j,
    0.49942961065065 + 0.12520990108117j,
    -0.1083287142652 - 0.8609605708526j,
    -0.3918884064658 - 0.1538531930618j,
    -0.147595479311 + 0.493831447944j,
    -0.072598481664 - 0.719868325959j,
    -0.330200317533 + 1.052309941949j,
    0.186721819078 - 0.595616065541j,
    0.023499384397 + 0.939740685579j,
    0.49141111608 - 0.42493152167j,
    0.14107795747 - 0.23706422509j,
    -0.11870768404 + 0.08096200618j,
    0.0444798323 - 0.8639904912j,
    -0.6290121604 + 0.8209980128j,
    0.1981029905 - 0.6878495747j,
    -0.4512400133 + 0.9581338937j,
    0.407788339 - 0.162013757j,
])


def test_cap_sigma_leading(cap_run):
    s = cap_run["factors"].sigma.sigma
    assert abs(s[0] - CAP_SIGMA[0]) < 1e-4
    assert abs(s[1] - CAP_SIGMA[1]) < 1e-4
    assert np.max(np.abs(s[2:8] - CAP_SIGMA[2:8])) < 1e-3


def test_cap_sigma_all_twenty(cap_run):
    # the dyadic solver actually matches every tabulated digit pair to ~1e-7
    s = cap_run["factors"].sigma.sigma[:20]
    assert np.max(np.abs(s - CAP_SIGMA)) < 1e-6


def test_cap_corner_parameters():
    *_, t1, t2 = cap_constants()
    assert t1 == pytest.approx(0.1122, abs=1e-4)
    assert t2 == pytest.approx(0.4731, abs=1e-4)


def test_triangle_capacity_and_gamma11(triangle_run):
    g = triangle_run["gamma"]
    assert g.gamma2(1, 1) == pytest.approx(-1.0, abs=1e-5)
    assert triangle_run["factors"].coefficients.C == pytest.approx(1.0, abs=1e-5)


def test_triangle_periodic_sigma(triangle_run):
    s = triangle_run["factors"].sigma.sigma[:20]
    k = np.arange(1, 21)
    target = np.where(k % 3 == 0, 2.0, 0.0)
    assert np.max(np.abs(s - target)[:10]) < 1e-4
    assert np.max(np.abs(s - target)) < 1e-2


def test_b2_from_gamma(cap_run):
    g = cap_run["gamma"]
    b = cap_run["factors"].coefficients.b
    assert abs(b[1] - g.gamma2(2, 1) * (-g.gamma2(1, 1)) ** -1.5) < 1e-9


def test_mu_low_order(cap_run):
    co = cap_run["factors"].coefficients
    b, mu = co.b, co.mu
    assert co.mu_k(-1) == 1.0
    assert abs(co.mu_k(0) + b[1]) < 1e-14
    assert abs(co.mu_k(1) - (-b[2] - b[1] * co.mu_k(0))) < 1e-14


def test_sigma_closed_forms(cap_run):
    s1, s2, s3 = cap_run["factors"].sigma.sigma[:3]
    co = cap_run["factors"].coefficients
    assert abs(co.b_k(2) - s1 / 2) < 1e-13
    assert abs(co.b_k(3) - (s2 + s1**2) / 6) < 1e-13
    assert abs(co.b_k(4) - (2 * s3 + 3 * s1 * s2 + s1**3) / 24) < 1e-13
    assert abs(co.mu_k(0) + s1 / 2) < 1e-13
    assert abs(co.mu_k(1) - (-2 * s2 + s1**2) / 12) < 1e-13
    assert abs(co.mu_k(2) - (-2 * s3 + s1 * s2) / 24) < 1e-13


def test_gamma_closed_forms(cap_run):
    g = cap_run["gamma"]
    C = cap_run["factors"].coefficients.C
    s1, s2, s3 = cap_run["factors"].sigma.sigma[:3]
    assert abs(g.gamma1(1, 1) - (-C**2 / 6 * s2 + C**2 / 12 * s1**2)) < 1e-8
    assert abs(g.gamma1(1, 2) - C**3 * (-s3 / 6 + s1 * s2 / 4 - s1**3 / 12)) < 1e-8
    assert abs(g.gamma1(2, 1) - C**3 * (-s3 / 12 + s1 * s2 / 8 - s1**3 / 24)) < 1e-8
    assert abs(g.gamma2(2, 1) - C**3 * s1 / 2) < 1e-8
    # the forward recurrence (and the GPT symmetry) give the conjugate here
    assert abs(g.gamma2(1, 2) - C**3 * np.conj(s1)) < 1e-8


def test_ellipse_known_coefficients(ellipse_run):
    co = ellipse_run["factors"].coefficients
    s = ellipse_run["factors"].sigma.sigma
    assert co.C == pytest.approx(1.5, abs=1e-12)
    assert abs(co.b_k(3) + 1 / 3) < 1e-12
    assert abs(co.b_k(5) - 1 / 9) < 1e-12
    assert abs(s[1] + 2) < 1e-12
    assert abs(s[3] - 2 / 9) < 1e-12


def test_triangle_prevertex_sigma():
    b, sig = sc_taylor(regular_polygon(3), 12)
    k = np.arange(1, 13)
    assert np.max(np.abs(sig.sigma - np.where(k % 3 == 0, 2.0, 0.0))) < 1e-14
    assert np.allclose(b_from_sigma(sig), b, atol=1e-14)
    assert abs(b[3] - 1 / 6) < 1e-15


def test_low_order_identities_on_synthetic_sigma(rng):
    s = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = b_from_sigma(s)
    mu = mu_from_b(b)
    s1, s2, s3 = s
    assert abs(b[1] - s1 / 2) < 1e-14
    assert abs(b[2] - (s2 + s1**2) / 6) < 1e-13
    assert abs(b[3] - (2 * s3 + 3 * s1 * s2 + s1**3) / 24) < 1e-13
    assert abs(mu[1] + s1 / 2) < 1e-14
    assert abs(mu[2] - (-2 * s2 + s1**2) / 12) < 1e-13
    assert abs(mu[3] - (-2 * s3 + s1 * s2) / 24) < 1e-13
