import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bos_uq import haar
from bos_uq.bos_design import (
    ExplicitBos,
    PreconditionedHaarFourier,
    Preconditioner,
    SamplingPattern,
    SubsampledFourier,
    apply_adjoint,
    apply_forward,
    build_preconditioner,
    fourier_matrix,
    sample_density_rows,
    sample_uniform_rows,
    sigma_hat_diag,
)


def naive_dft_rows(rows, p, beta):
    out = np.zeros(len(rows), dtype=complex)
    for a, l in enumerate(rows):
        for k in range(p):
            out[a] += beta[k] * (math.cos(2 * math.pi * l * k / p) + 1j * math.sin(2 * math.pi * l * k / p))
    return out


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


# --- sampling -----------------------------------------------------------------

def test_full_draw_without_replacement_is_permutation():
    for seed in range(5):
        pat = sample_uniform_rows(4, 4, False, seed)
        assert sorted(pat.indices.tolist()) == [0, 1, 2, 3]


def test_uniform_with_replacement_chi_square():
    pat = sample_uniform_rows(8, 100_000, True, 1)
    counts = pat.multiplicities()
    sd = math.sqrt(100_000 * (1 / 8) * (7 / 8))
    assert np.all(np.abs(counts - 100_000 / 8) <= 3 * sd)
    assert stats.chisquare(counts).pvalue > 0.001


def test_without_replacement_marginals_uniform():
    # every row equally likely to be selected
    counts = np.zeros(10)
    for s in range(4000):
        counts[sample_uniform_rows(10, 3, False, s).indices] += 1
    assert stats.chisquare(counts).pvalue > 0.001


def test_uniform_rejects_too_many_distinct():
    with pytest.raises(ValueError):
        sample_uniform_rows(4, 5, False, 0)


def test_density_rows_chi_square():
    kap = haar.kappa_weights(16, "theorem")
    nu = kap.density()
    # nu proportional to 1/j
    j = np.arange(1, 17)
    assert np.allclose(nu, (1 / j) / np.sum(1 / j), rtol=1e-13)
    pat = sample_density_rows(nu, 1_000_000, 7)
    counts = pat.multiplicities()
    assert stats.chisquare(counts, nu * 1_000_000).pvalue > 0.001


def test_density_uniform_matches_uniform_sampler():
    a = sample_density_rows(np.full(6, 1 / 6), 60_000, 3).multiplicities()
    b = sample_uniform_rows(6, 60_000, True, 4).multiplicities()
    table = np.vstack([a, b])
    assert stats.chi2_contingency(table).pvalue > 0.001


def test_density_validation():
    with pytest.raises(ValueError):
        sample_density_rows([0.5, 0.6], 3, 0)
    with pytest.raises(ValueError):
        sample_density_rows([1.5, -0.5], 3, 0)


def test_sampling_deterministic_given_seed():
    a = sample_uniform_rows(100, 40, False, 11).indices
    b = sample_uniform_rows(100, 40, False, 11).indices
    assert np.array_equal(a, b)


def test_pattern_json_roundtrip():
    pat = sample_density_rows(haar.kappa_weights(8).density(), 20, 2)
    back = SamplingPattern.from_json(pat.to_json())
    assert np.array_equal(back.indices, pat.indices)
    assert back.with_replacement and back.p == 8
    assert np.array_equal(back.density, pat.density)
    uni = sample_uniform_rows(9, 4, False, 0)
    assert SamplingPattern.from_dict(uni.to_dict()).density is None


def test_pattern_validation():
    with pytest.raises(ValueError):
        SamplingPattern(np.array([0, 0]), 4, False)
    with pytest.raises(ValueError):
        SamplingPattern(np.array([4]), 4, True)


# --- operators ----------------------------------------------------------------

def test_full_fourier_first_column_is_ones():
    op = SubsampledFourier(SamplingPattern(np.arange(8), 8, False))
    e1 = np.zeros(8, dtype=complex)
    e1[0] = 1
    assert np.allclose(apply_forward(op, e1), np.ones(8), atol=1e-14)


def test_full_fourier_isometry_and_adjoint():
    rng = np.random.default_rng(0)
    p = 32
    op = SubsampledFourier(SamplingPattern(rng.permutation(p), p, False))
    beta = crandn(rng, p)
    assert math.isclose(np.linalg.norm(op.forward(beta)), math.sqrt(p) * np.linalg.norm(beta),
                        rel_tol=1e-12)
    assert np.allclose(apply_adjoint(op, apply_forward(op, beta)), p * beta, atol=1e-10)


def test_forward_matches_naive_dft():
    rng = np.random.default_rng(5)
    pat = sample_uniform_rows(16, 5, False, rng)
    beta = crandn(rng, 16)
    ref = naive_dft_rows(pat.indices, 16, beta)
    assert np.max(np.abs(SubsampledFourier(pat).forward(beta) - ref)) <= 1e-10


def test_adjoint_of_zero_is_zero():
    op = SubsampledFourier(sample_uniform_rows(10, 4, True, 0))
    assert np.array_equal(op.adjoint(np.zeros(4, dtype=complex)), np.zeros(10))


@settings(max_examples=40, deadline=None)
@given(p=st.integers(2, 40), frac=st.floats(0.1, 1.0), repl=st.booleans(), seed=st.integers(0, 2**31))
def test_adjoint_matches_conjugate_transpose(p, frac, repl, seed):
    rng = np.random.default_rng(seed)
    n = max(1, int(frac * p))
    op = SubsampledFourier(sample_uniform_rows(p, n, repl, rng))
    X = fourier_matrix(op.pattern.indices, p)
    v = crandn(rng, n)
    beta = crandn(rng, p)
    assert np.allclose(op.adjoint(v), X.conj().T @ v, atol=1e-9 * p)
    assert np.allclose(op.forward(beta), X @ beta, atol=1e-9 * p)
    # <X b, v> = <b, X^* v>
    assert abs(np.vdot(v, op.forward(beta)) - np.vdot(op.adjoint(v), beta)) <= 1e-9 * p * n


def test_sq_norm_matches_dense_with_duplicates():
    pat = SamplingPattern(np.array([1, 1, 3, 5, 1]), 8, True)
    op = SubsampledFourier(pat)
    assert math.isclose(op.sq_norm(), np.linalg.norm(op.to_dense(), 2) ** 2, rel_tol=1e-10)


def test_sigma_hat_diag_values():
    op = SubsampledFourier(sample_uniform_rows(12, 7, True, 0))
    assert np.array_equal(sigma_hat_diag(op), np.ones(12))
    rng = np.random.default_rng(1)
    M = np.exp(1j * rng.uniform(0, 2 * np.pi, (6, 9))) * rng.uniform(0, 1, (6, 9))
    bos = ExplicitBos(M)
    assert np.allclose(bos.sigma_hat_diag(), np.real(np.diag(M.conj().T @ M)) / 6, atol=1e-14)
    pat = sample_uniform_rows(8, 5, True, 3)
    pre = PreconditionedHaarFourier(pat, Preconditioner.identity(5))
    assert np.allclose(pre.sigma_hat_diag(), 1.0)


def test_explicit_bos_bound_enforced():
    with pytest.raises(ValueError):
        ExplicitBos(np.array([[2.0, 0.0]]), K=1.0)


def test_preconditioned_operator_matches_dense():
    rng = np.random.default_rng(9)
    p = 16
    kap = haar.kappa_weights(p, "clipped")
    pat = sample_density_rows(kap.density(), 11, rng)
    D = build_preconditioner(kap.kappa, pat)
    A = PreconditionedHaarFourier(pat, D)
    dense = np.diag(D.diag) @ fourier_matrix(pat.indices, p) @ haar.haar_matrix(p).T
    z, v = crandn(rng, p), crandn(rng, 11)
    assert np.allclose(A.forward(z), dense @ z, atol=1e-10)
    assert np.allclose(A.adjoint(v), dense.conj().T @ v, atol=1e-10)
    assert math.isclose(A.sq_norm(), np.linalg.norm(dense, 2) ** 2, rel_tol=1e-10)


def test_restrict_rows():
    op = SubsampledFourier(sample_uniform_rows(10, 6, False, 2))
    sub = op.restrict_rows([0, 2, 5])
    assert np.allclose(sub.to_dense(), op.to_dense()[[0, 2, 5]])


# --- preconditioner -----------------------------------------------------------

def test_constant_kappa_gives_unit_weights():
    pat = sample_uniform_rows(10, 6, True, 0)
    D = build_preconditioner(np.full(10, 2.5), pat)
    assert np.allclose(D.diag, 1.0, atol=1e-15)


def test_preconditioner_direct_formula_p4():
    kappa = 3 * math.sqrt(2 * math.pi) / np.sqrt(np.arange(1, 5))
    norm = math.sqrt(sum((3 * math.sqrt(2 * math.pi)) ** 2 / j for j in range(1, 5)))
    pat = SamplingPattern(np.array([0, 1, 2, 3, 3]), 4, True)
    D = build_preconditioner(kappa, pat)
    expect = [norm / (2 * (3 * math.sqrt(2 * math.pi) / math.sqrt(j + 1))) for j in pat.indices]
    assert np.allclose(D.diag, expect, rtol=1e-14)


def test_max_weight_attained_at_smallest_kappa():
    p = 64
    kap = haar.kappa_weights(p, "theorem")
    pat = SamplingPattern(np.arange(p), p, True)
    D = build_preconditioner(kap.kappa, pat)
    assert math.isclose(np.max(D.diag ** 2), kap.norm_sq / (18 * math.pi), rel_tol=1e-12)


def test_preconditioner_rejects_nonpositive():
    pat = sample_uniform_rows(3, 2, True, 0)
    with pytest.raises(ValueError):
        build_preconditioner(np.array([1.0, 0.0, 1.0]), pat)
