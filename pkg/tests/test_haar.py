import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bos_uq import haar


def pow2(max_exp=10):
    return st.integers(0, max_exp).map(lambda e: 2 ** e)


def test_constant_maps_to_scaling_coefficient():
    assert np.allclose(haar.haar_forward(np.ones(4)), [2, 0, 0, 0], atol=1e-15)
    assert np.allclose(haar.haar_inverse(np.array([2.0, 0, 0, 0])), np.ones(4), atol=1e-15)


def test_inverse_of_zero():
    assert np.array_equal(haar.haar_inverse(np.zeros(16)), np.zeros(16))


@settings(max_examples=50, deadline=None)
@given(p=pow2(), seed=st.integers(0, 2**31))
def test_parseval_and_roundtrip(p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(p) + 1j * rng.standard_normal(p)
    z = haar.haar_forward(x)
    assert math.isclose(np.linalg.norm(z), np.linalg.norm(x), rel_tol=1e-12, abs_tol=1e-12)
    assert np.max(np.abs(haar.haar_inverse(z) - x)) <= 1e-12


def test_roundtrip_p1024():
    x = np.random.default_rng(3).standard_normal(1024)
    assert np.max(np.abs(haar.haar_inverse(haar.haar_forward(x)) - x)) <= 1e-12


@pytest.mark.parametrize("p", [1, 2, 8, 64, 256])
def test_matches_explicit_matrix(p):
    H = haar.haar_matrix(p)
    assert np.allclose(H @ H.T, np.eye(p), atol=1e-12)
    x = np.random.default_rng(p).standard_normal(p)
    assert np.max(np.abs(haar.haar_forward(x) - H @ x)) <= 1e-12
    assert np.max(np.abs(haar.haar_inverse(x) - H.T @ x)) <= 1e-12


def test_piecewise_constant_is_sparse():
    # 4 constant blocks need only the scaling and 3 coarsest detail coefficients
    x = np.repeat([1.0, -2.0, 0.5, 3.0], 16)
    z = haar.haar_forward(x)
    assert np.count_nonzero(np.abs(z) > 1e-12) <= 4
    assert np.all(np.abs(z[4:]) <= 1e-12)


def test_non_power_of_two_rejected():
    for bad in (0, 3, 6, 100):
        with pytest.raises(ValueError):
            haar.check_length(bad)
    with pytest.raises(ValueError):
        haar.haar_forward(np.ones(6))
    with pytest.raises(ValueError):
        haar.haar_inverse(np.ones((2, 2)))


def test_transform_object():
    t = haar.HaarTransform(8)
    assert t.levels == 3
    with pytest.raises(ValueError):
        t.forward(np.ones(4))


def test_kappa_values():
    th = haar.kappa_weights(16, "theorem")
    assert math.isclose(th.kappa[0], 3 * math.sqrt(2 * math.pi), rel_tol=1e-15)
    assert math.isclose(th.kappa[0], 7.5199, abs_tol=1e-4)
    cl = haar.kappa_weights(16, "clipped")
    assert cl.kappa[0] == 1.0
    assert np.all(cl.kappa <= 1.0) and np.all(cl.kappa > 0)
    j = np.arange(1, 17)
    assert np.allclose(th.kappa, 3 * math.sqrt(2 * math.pi) / np.sqrt(j), rtol=1e-15)
    assert math.isclose(th.norm_sq, np.sum(th.kappa ** 2), rel_tol=1e-15)


@pytest.mark.parametrize("p", [2, 16, 1024, 2 ** 15])
def test_kappa_norm_bound(p):
    assert haar.kappa_weights(p, "theorem").norm <= 52 * math.sqrt(math.log2(p))


def test_kappa_unknown_variant():
    with pytest.raises(ValueError):
        haar.kappa_weights(8, "other")


def test_frequency_rank_assignment():
    order = haar.frequency_rank_order(8)
    assert order.tolist() == [0, 1, 7, 2, 6, 3, 5, 4]
    kap = haar.kappa_weights(8, "theorem")
    ranked = haar.assign_to_rows(kap, "frequency_rank")
    assert ranked.kappa[7] == kap.kappa[2]
    assert math.isclose(ranked.norm_sq, kap.norm_sq)
    assert haar.assign_to_rows(kap, "index") is kap
