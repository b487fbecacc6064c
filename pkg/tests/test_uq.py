import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_uq import uq


def mp_normal_quantile(q, dps=40):
    """Bisection on the high-precision normal CDF."""
    mpmath.mp.dps = dps
    q = mpmath.mpf(q)
    lo, hi = mpmath.mpf(-40), mpmath.mpf(40)
    for _ in range(200):
        mid = (lo + hi) / 2
        if mpmath.ncdf(mid) < q:
            lo = mid
        else:
            hi = mid
    return float((lo + hi) / 2)


# --- quantiles ----------------------------------------------------------------

def test_normal_quantile_reference_points():
    assert uq.normal_quantile(0.5) == 0.0
    assert math.isclose(uq.normal_quantile(0.975), 1.959964, abs_tol=1e-6)
    for q in (1e-12, 1e-6, 0.001, 0.02, 0.3, 0.975, 0.999999):
        assert math.isclose(uq.normal_quantile(q), mp_normal_quantile(q), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=100, deadline=None)
@given(q=st.floats(1e-10, 1 - 1e-10))
def test_normal_quantile_symmetry_and_inverse(q):
    upper = 1 - q
    q = 1 - upper  # exact pair, so the symmetry is not blurred by rounding of 1 - q
    x = uq.normal_quantile(q)
    assert math.isclose(x, -uq.normal_quantile(upper), rel_tol=1e-9, abs_tol=1e-9)
    assert math.isclose(float(uq.normal_cdf(x)), q, rel_tol=1e-9, abs_tol=1e-15)


def test_normal_quantile_array_and_domain():
    out = uq.normal_quantile(np.array([[0.1, 0.5], [0.9, 0.975]]))
    assert out.shape == (2, 2)
    for bad in (0.0, 1.0, -0.1, float("nan")):
        with pytest.raises(ValueError):
            uq.normal_quantile(bad)


def test_rayleigh_quantile():
    assert uq.rayleigh_quantile(1.0) == 0.0
    assert math.isclose(uq.rayleigh_quantile(math.exp(-2)), 2.0, rel_tol=1e-15)
    assert math.isclose(uq.rayleigh_quantile(0.05), 2.447747, abs_tol=1e-6)
    with pytest.raises(ValueError):
        uq.rayleigh_quantile(0.0)


# --- regions ------------------------------------------------------------------

def test_circle_radius_examples():
    assert uq.confidence_circle(0j, 0.0, 1.0, 10, 0.05).radius == 0.0
    assert math.isclose(uq.confidence_circle(0j, 1.0, 1.0, 4, math.exp(-1)).radius, 0.5, rel_tol=1e-15)


def test_interval_radius_examples():
    r = uq.confidence_interval(0.0, 1.0, 1.0, 2, 0.05).radius
    assert math.isclose(r, 0.979982, abs_tol=1e-6)
    assert uq.confidence_interval(1 + 2j, 0.0, 1.0, 3, 0.1, "imag").radius == 0.0
    assert uq.confidence_interval(1 + 2j, 1.0, 1.0, 3, 0.1, "imag").center == 2.0


def test_region_validation():
    with pytest.raises(ValueError):
        uq.confidence_circle(0j, 1.0, 1.0, 4, 1.5)
    with pytest.raises(ValueError):
        uq.confidence_circle(0j, -1.0, 1.0, 4, 0.05)
    with pytest.raises(ValueError):
        uq.confidence_interval(0.0, 1.0, 0.0, 4, 0.05)
    with pytest.raises(ValueError):
        uq.confidence_interval(0.0, 1.0, 1.0, 4, 0.05, axis="both")


def test_circle_coverage_monte_carlo():
    rng = np.random.default_rng(0)
    m, n, sigma = 100_000, 50, 0.7
    # sqrt(n)(center - truth) ~ CN(0, sigma^2)
    err = sigma / math.sqrt(2 * n) * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    region = uq.confidence_circle(err, sigma, np.ones(m), n, 0.05)
    cov = uq.hitrate(np.zeros(m), region, []).h
    assert abs(cov - 0.95) <= 0.01


def test_interval_coverage_monte_carlo():
    rng = np.random.default_rng(1)
    m, n, sigma = 100_000, 30, 1.3
    err = sigma / math.sqrt(2 * n) * (rng.standard_normal(m) + 1j * rng.standard_normal(m))
    region = uq.confidence_interval(err, sigma, np.ones(m), n, 0.1, "real")
    cov = uq.hitrate(np.zeros(m), region, []).h
    assert abs(cov - 0.90) <= 0.01


def test_boundary_counts_as_hit():
    region = uq.ConfidenceRegion(np.array([1.0 + 0j]), np.array([1.0]), "circle", 0.05)
    assert uq.contains(region, np.array([0.0]))[0]


# --- hitrates -----------------------------------------------------------------

def test_hitrate_extremes():
    truth = np.array([1.0, 0.0, 2.0j, 0.0])
    far = truth + 5
    inf = uq.ConfidenceRegion(far, np.full(4, np.inf), "circle", 0.05)
    rep = uq.hitrate(truth, inf, [0, 2])
    assert rep.h == 1.0 and rep.h_support == 1.0
    zero = uq.ConfidenceRegion(far, np.zeros(4), "circle", 0.05)
    rep = uq.hitrate(truth, zero, [0, 2])
    assert rep.h == 0.0 and rep.h_support == 0.0


def test_hitrate_list_of_regions_and_empty_support():
    truth = np.array([0.0, 1.0])
    regions = [uq.confidence_circle(0.1, 1.0, 1.0, 1, 0.05), uq.confidence_circle(5.0, 1.0, 1.0, 1, 0.05)]
    rep = uq.hitrate(truth, regions, [])
    assert rep.h == 0.5 and rep.support_empty and math.isnan(rep.h_support)
    assert rep.to_dict()["h_support"] is None
    with pytest.raises(ValueError):
        uq.hitrate(truth, regions, [7])


def test_combine_reports():
    truth = np.zeros(3)
    a = uq.hitrate(truth, uq.ConfidenceRegion(np.zeros(3), np.ones(3), "circle", 0.05), [1])
    b = uq.hitrate(truth, uq.ConfidenceRegion(np.ones(3) * 2, np.ones(3), "circle", 0.05), [1])
    c = uq.combine_reports([a, b])
    assert c.h == 0.5 and c.h_support == 0.5 and c.trials == 2
    assert c.per_coordinate_hits.tolist() == [1, 1, 1]


# --- Q-Q and KS ---------------------------------------------------------------

def test_qq_identity_on_exact_quantiles():
    m = 500
    x = uq.normal_quantile((np.arange(1, m + 1) - 0.5) / m)
    qq = uq.qq_points(x[::-1].copy())
    assert np.max(np.abs(qq[:, 0] - qq[:, 1])) <= 1e-9


def test_qq_constant_sample():
    qq = uq.qq_points(np.full(10, 3.5))
    assert np.all(qq[:, 1] == 3.5)
    assert np.all(np.diff(qq[:, 0]) > 0)


def test_qq_monte_carlo_central_band():
    x = np.random.default_rng(2).standard_normal(10_000)
    qq = uq.qq_points(x)
    central = qq[100:-100]
    assert np.max(np.abs(central[:, 0] - central[:, 1])) <= 0.1


def test_ks_trivial_cases():
    m = 200
    grid = uq.normal_quantile((np.arange(1, m + 1) - 0.5) / m)
    assert uq.ks_statistic(grid) <= 1 / m
    assert uq.ks_statistic(np.zeros(50)) == 0.5


def test_ks_matches_explicit_formula():
    x = np.sort(np.random.default_rng(3).standard_normal(777) * 1.1 + 0.05)
    cdf = np.array([float(mpmath.ncdf(v)) for v in x])
    i = np.arange(1, x.size + 1)
    ref = max(np.max(i / x.size - cdf), np.max(cdf - (i - 1) / x.size))
    assert math.isclose(uq.ks_statistic(x), ref, rel_tol=1e-10)


def test_ks_normal_draws_small():
    rng = np.random.default_rng(4)
    small = sum(uq.ks_statistic(rng.standard_normal(10_000)) <= 0.02 for _ in range(100))
    assert small >= 99


# --- SSIM ---------------------------------------------------------------------

def test_ssim_identity_and_symmetry():
    rng = np.random.default_rng(5)
    a, b = rng.random((20, 24)), rng.random((20, 24))
    assert math.isclose(uq.ssim(a, a), 1.0, rel_tol=1e-12)
    assert math.isclose(uq.ssim(a, b), uq.ssim(b, a), rel_tol=1e-12)
    assert uq.ssim(a, b) < 0.5
    with pytest.raises(ValueError):
        uq.ssim(a, b[:, :3])


def test_ssim_matches_scikit_image_valid_windows():
    from skimage.metrics import structural_similarity

    rng = np.random.default_rng(6)
    a = rng.random((30, 30))
    b = a + 0.2 * rng.standard_normal((30, 30))
    ref = structural_similarity(a, b, win_size=7, data_range=2.0, use_sample_covariance=False)
    assert math.isclose(uq.ssim(a, b, window=7, data_range=2.0), ref, rel_tol=1e-10)


def test_regions_csv_columns():
    region = uq.confidence_circle(np.array([0.0, 1.0 + 1j]), 1.0, np.ones(2), 4, 0.05)
    text = uq.regions_csv(region, np.array([0.0, 5.0]))
    lines = text.strip().split("\n")
    assert lines[0] == "coordinate,center_re,center_im,radius,hit"
    assert lines[1].endswith(",1") and lines[2].endswith(",0")


def test_zero_radius_tolerates_roundoff_only():
    region = uq.ConfidenceRegion(np.array([1.0 + 1e-15, 0.0]), np.zeros(2), "circle", 0.05)
    assert uq.contains(region, np.array([1.0, 1e-16])).tolist() == [True, True]
    assert not uq.contains(region, np.array([1.0 + 1e-9, 0.0]))[0]
