"""Block Hankel assembly, the Schur chain, and the structural identities.

Placement examples are pinned by hand; the linear identities between the
plain, endpoint-weighted and reflected Hankel matrices are checked on
random Hermitian data, and the parallel-sum factorization of the doubly
weighted Hankel matrix runs on cone members produced by the extension
machinery (which guarantees the range conditions it needs).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hausmom import (
    ExtensionPolicy,
    MomentSequence,
    build_hankel,
    extend,
    random_F,
    reflected,
    schur_chain,
    structural,
    theta,
)
from hausmom.classes import derive
from hausmom.hankel import block_column, block_row
from hausmom.matrix_core import parallel_sum, pinv, spec_norm
from support import hermitian, rng_for

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def scalar_seq(moments, alpha=0.0, beta=1.0):
    return MomentSequence(1, alpha, beta, tuple([[v]] for v in moments))


def random_hermitian_seq(seed, q, m, alpha=0.0, beta=1.0):
    rng = rng_for(seed)
    mats = tuple(hermitian(rng, q) for _ in range(m + 1))
    return MomentSequence(q, alpha, beta, mats)


def rel(x, ref):
    return spec_norm(x) / max(1.0, spec_norm(ref))


# ---------------------------------------------------------------------------
# assembly


def test_hankel_placement_scalar():
    view = build_hankel(scalar_seq([1.0, 2.0, 3.0]), 1)
    np.testing.assert_array_equal(view.H, np.array([[1.0, 2.0], [2.0, 3.0]]))


def test_shifted_matrices_at_order_zero():
    view = build_hankel(scalar_seq([1.0, 2.0, 3.0]), 0)
    np.testing.assert_array_equal(view.K, np.array([[2.0]]))
    np.testing.assert_array_equal(view.G, np.array([[3.0]]))


def test_block_placement_q2():
    seq = random_hermitian_seq(5, q=2, m=3)
    view = build_hankel(seq, 1)
    np.testing.assert_array_equal(view.H[:2, :2], seq.moments[0])
    np.testing.assert_array_equal(view.H[:2, 2:], seq.moments[1])
    np.testing.assert_array_equal(view.H[2:, 2:], seq.moments[2])
    np.testing.assert_array_equal(view.K[2:, 2:], seq.moments[3])
    assert view.G is None  # would need s_4


def test_hankel_index_bounds():
    seq = scalar_seq([1.0, 2.0, 3.0])
    with pytest.raises(IndexError):
        build_hankel(seq, 2)
    with pytest.raises(IndexError):
        build_hankel(seq, -1)


def test_block_column_and_row():
    seq = random_hermitian_seq(9, q=2, m=4)
    y = block_column(seq, 1, 3)
    z = block_row(seq, 1, 3)
    assert y.shape == (6, 2) and z.shape == (2, 6)
    np.testing.assert_array_equal(y[2:4], seq.moments[2])
    np.testing.assert_array_equal(z[:, 4:], seq.moments[3])
    with pytest.raises(IndexError):
        block_column(seq, 2, 5)


def test_hankel_block_partitions():
    # H_{n+1} carves into [[H_n, y], [z, s_{2n+2}]] exactly
    seq = random_hermitian_seq(11, q=2, m=4)
    q = seq.q
    big = build_hankel(seq, 2).H
    small = build_hankel(seq, 1).H
    np.testing.assert_array_equal(big[: 2 * q, : 2 * q], small)
    np.testing.assert_array_equal(big[: 2 * q, 2 * q :], block_column(seq, 2, 3))
    np.testing.assert_array_equal(big[2 * q :, : 2 * q], block_row(seq, 2, 3))
    np.testing.assert_array_equal(big[2 * q :, 2 * q :], seq.moments[4])


def test_moment_sequence_validation():
    with pytest.raises(ValueError):
        MomentSequence(1, 1.0, 0.0, ([[1.0]],))
    with pytest.raises(ValueError):
        MomentSequence(2, 0.0, 1.0, ([[1.0]],))
    with pytest.raises(ValueError):
        MomentSequence(0, 0.0, 1.0, ())


def test_prefix_and_append():
    seq = scalar_seq([1.0, 0.5, 0.375])
    assert seq.m == 2
    assert seq.prefix(1).m == 1
    grown = seq.appended([[0.3125]])
    assert grown.m == 3
    np.testing.assert_array_equal(grown.moments[3], [[0.3125]])


# ---------------------------------------------------------------------------
# Schur chain


def test_theta_and_l_scalar():
    seq = scalar_seq([1.0, 0.5, 0.5])
    chain = schur_chain(seq, 1)
    assert chain.theta[1][0, 0] == pytest.approx(0.25)
    assert chain.L[1][0, 0] == pytest.approx(0.25)
    np.testing.assert_array_equal(chain.theta[0], np.zeros((1, 1)))
    np.testing.assert_array_equal(chain.M[0], np.zeros((1, 1)))


def test_mixed_product_scalar():
    seq = scalar_seq([1.0, 0.5, 0.5, 0.3])
    chain = schur_chain(seq, 1)
    assert chain.M[1][0, 0] == pytest.approx(0.25)


def test_l0_is_s0():
    seq = random_hermitian_seq(3, q=3, m=2)
    chain = schur_chain(seq, 1)
    np.testing.assert_array_equal(chain.L[0], seq.moments[0])


def test_theta_needs_only_odd_count():
    # Theta_1 uses moments up to 1 only, so a 2-moment sequence suffices
    seq = scalar_seq([2.0, 1.0])
    assert theta(seq, 1)[0, 0] == pytest.approx(0.5)
    with pytest.raises(IndexError):
        theta(seq, 2)


def test_schur_chain_range_warning_flags():
    clean = schur_chain(scalar_seq([1.0, 0.5, 0.5]), 1)
    assert not clean.has_range_warning
    # s_0 = 0 with s_1 = 1: y_{1,1} = [1] cannot sit inside R(H_0) = {0}
    broken = schur_chain(scalar_seq([0.0, 1.0, 0.0]), 1)
    assert broken.has_range_warning


@given(seeds, st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_schur_matches_single_theta(seed, q, upto):
    seq = random_hermitian_seq(seed, q=q, m=2 * upto)
    chain = schur_chain(seq, upto)
    for n in range(upto + 1):
        np.testing.assert_allclose(chain.theta[n], theta(seq, n), atol=1e-12)
        np.testing.assert_allclose(
            chain.L[n], seq.moments[2 * n] - chain.theta[n], atol=1e-12
        )


# ---------------------------------------------------------------------------
# structural matrices


def test_signature_matrix_small():
    np.testing.assert_array_equal(structural(1, 1).J, np.diag([1.0, -1.0]))
    np.testing.assert_array_equal(structural(1, 2).J, np.diag([1.0, -1.0, 1.0]))


def test_selectors_small():
    st_mats = structural(1, 1)
    np.testing.assert_array_equal(st_mats.Delta, np.array([[1.0], [0.0]]))
    np.testing.assert_array_equal(st_mats.Nabla, np.array([[0.0], [1.0]]))


def test_signature_is_involutive_unitary():
    j = structural(3, 4).J
    np.testing.assert_allclose(j @ j, np.eye(15))
    np.testing.assert_allclose(j, j.conj().T)


# ---------------------------------------------------------------------------
# linear identities between the weighted Hankel matrices


@given(seeds, st.integers(1, 3), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_weighted_hankel_linear_identities(seed, q, m):
    rng = rng_for(seed)
    alpha = float(rng.uniform(-2.0, 1.0))
    beta = alpha + float(rng.uniform(0.5, 3.0))
    seq = random_hermitian_seq(seed + 1, q=q, m=m, alpha=alpha, beta=beta)
    der = derive(seq)
    ba = beta - alpha
    top = (m - 1) // 2
    for n in range(top + 1):
        view = build_hankel(seq, n)
        h_a = build_hankel(der.alpha_seq(), n).H
        h_b = build_hankel(der.beta_seq(), n).H
        assert rel(h_a - (-alpha * view.H + view.K), h_a) <= 1e-12
        assert rel(h_b - (beta * view.H - view.K), h_b) <= 1e-12
        assert rel(ba * view.H - (h_a + h_b), view.H) <= 1e-12
        assert rel(ba * view.K - (beta * h_a + alpha * h_b), view.K) <= 1e-12


@given(seeds, st.integers(1, 3), st.integers(2, 6))
@settings(max_examples=40, deadline=None)
def test_doubly_weighted_quadratic_identities(seed, q, m):
    # (beta-alpha) H_alpha_n = (Nabla - alpha Delta)* H_{n+1} (Nabla - alpha Delta) + Hc_n
    # and the beta twin; both hold for arbitrary Hermitian data.
    rng = rng_for(seed)
    alpha = float(rng.uniform(-1.5, 0.5))
    beta = alpha + float(rng.uniform(0.5, 2.5))
    seq = random_hermitian_seq(seed + 7, q=q, m=m, alpha=alpha, beta=beta)
    der = derive(seq)
    ba = beta - alpha
    for n in range((m - 2) // 2 + 1):
        st_mats = structural(q, n + 1)
        big = build_hankel(seq, n + 1).H
        h_c = build_hankel(der.c_seq(), n).H
        h_a = build_hankel(der.alpha_seq(), n).H
        h_b = build_hankel(der.beta_seq(), n).H
        low = st_mats.Nabla - alpha * st_mats.Delta
        up = beta * st_mats.Delta - st_mats.Nabla
        assert rel(ba * h_a - (low.conj().T @ big @ low + h_c), h_c) <= 1e-11
        assert rel(ba * h_b - (up.conj().T @ big @ up + h_c), h_c) <= 1e-11


def test_parallel_sum_hankel_factorization_on_cone_members():
    # Hc_{n-1} = (beta-alpha) Delta* (H_alpha_n par H_beta_n) Delta on
    # sequences whose tail columns satisfy the needed range conditions;
    # extension-generated members provide exactly those.
    for seed, q in ((0, 1), (1, 2), (2, 3)):
        base = random_F(q, -0.5, 2.0, 0, seed=seed, pd=True)
        seq = extend(base, ExtensionPolicy.central(steps=5))
        der = derive(seq)
        ba = seq.beta - seq.alpha
        for n in range(1, (seq.m - 1) // 2 + 1):
            h_a = build_hankel(der.alpha_seq(), n).H
            h_b = build_hankel(der.beta_seq(), n).H
            ps = parallel_sum(h_a, h_b, seq.tol)
            assert ps.ps_pair
            delta = structural(q, n).Delta
            h_c = build_hankel(der.c_seq(), n - 1).H
            resid = rel(h_c - ba * delta.conj().T @ ps.value @ delta, h_c)
            assert resid <= 1e-9, (seed, q, n, resid)


# ---------------------------------------------------------------------------
# reflection


def test_reflected_flips_interval_and_signs():
    seq = scalar_seq([1.0, 0.5, 0.375], alpha=0.0, beta=1.0)
    refl = reflected(seq)
    assert (refl.alpha, refl.beta) == (-1.0, 0.0)
    np.testing.assert_array_equal(refl.moments[1], -seq.moments[1])
    np.testing.assert_array_equal(refl.moments[2], seq.moments[2])


@given(seeds, st.integers(1, 3), st.integers(1, 5))
@settings(max_examples=40, deadline=None)
def test_reflection_conjugates_hankel_matrices(seed, q, m):
    seq = random_hermitian_seq(seed, q=q, m=m, alpha=-0.75, beta=0.5)
    refl = reflected(seq)
    for n in range(m // 2 + 1):
        j_mat = structural(q, n).J
        hv, hr = build_hankel(seq, n), build_hankel(refl, n)
        np.testing.assert_allclose(hr.H, j_mat @ hv.H @ j_mat, atol=1e-12)
        if hv.K is not None:
            np.testing.assert_allclose(hr.K, -(j_mat @ hv.K @ j_mat), atol=1e-12)
        if hv.G is not None:
            np.testing.assert_allclose(hr.G, j_mat @ hv.G @ j_mat, atol=1e-12)


@given(seeds, st.integers(1, 3), st.integers(1, 3))
@settings(max_examples=30, deadline=None)
def test_reflection_fixes_schur_chain_up_to_sign(seed, q, upto):
    seq = random_hermitian_seq(seed, q=q, m=2 * upto, alpha=-1.0, beta=1.0)
    c_orig = schur_chain(seq, upto)
    c_refl = schur_chain(reflected(seq), upto)
    for n in range(upto + 1):
        scale = max(1.0, spec_norm(c_orig.theta[n]))
        assert spec_norm(c_refl.theta[n] - c_orig.theta[n]) <= 1e-10 * scale
        assert spec_norm(c_refl.L[n] - c_orig.L[n]) <= 1e-10 * scale
        assert spec_norm(c_refl.M[n] + c_orig.M[n]) <= 1e-10 * max(
            1.0, spec_norm(c_orig.M[n])
        )


def test_theta_uses_pseudoinverse_of_previous_hankel():
    # cross-check Theta_2 against a direct dense computation
    seq = random_hermitian_seq(17, q=2, m=4)
    h_1 = build_hankel(seq, 1).H
    z = block_row(seq, 2, 3)
    y = block_column(seq, 2, 3)
    np.testing.assert_allclose(theta(seq, 2), z @ pinv(h_1) @ y, atol=1e-12)
