import numpy as np
import pytest

from modswap.linalg import random_low_rank_rect
from modswap.oracle import MatrixOracle
from modswap.qpe import QPEConfig
from modswap.svdx import (
    embed,
    extended_spectrum_check,
    phase_ambiguity_demo,
    quantum_svd,
)


def _oracle(a):
    return MatrixOracle.from_matrix(np.asarray(a, dtype=complex))


def test_embed_scalar():
    ext = embed(_oracle([[1.0]]))
    dense = ext.materialize_baseline()
    np.testing.assert_allclose(dense, [[0, 1], [1, 0]], atol=1e-15)


def test_embed_diagonal_eigenvalues():
    ext = embed(_oracle(np.diag([3.0, 2.0])))
    w = np.linalg.eigvalsh(ext.materialize_baseline())
    np.testing.assert_allclose(np.sort(w), [-3, -2, 2, 3], atol=1e-12)


def test_embed_query_routing_and_counting():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    base = _oracle(a)
    ext = embed(base)
    # upper-right block forwards one call
    assert ext.oracle.query(1, 3 + 2) == complex(a[1, 2])
    assert base.report_calls() == 1
    # lower-left block conjugates, one call
    assert ext.oracle.query(3 + 2, 1) == complex(np.conj(a[1, 2]))
    assert base.report_calls() == 2
    # diagonal blocks are free
    assert ext.oracle.query(0, 1) == 0
    assert ext.oracle.query(3 + 1, 3 + 4) == 0
    assert base.report_calls() == 2


def test_embed_matches_blockwise_construction():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((3, 5)) + 1j * rng.standard_normal((3, 5))
    ext = embed(_oracle(a))
    dense = ext.oracle.materialize()
    assert np.max(np.abs(dense - dense.conj().T)) <= 1e-15
    np.testing.assert_allclose(dense[:3, 3:], a, atol=1e-15)
    np.testing.assert_allclose(dense[3:, :3], a.conj().T, atol=1e-15)
    np.testing.assert_allclose(dense[:3, :3], 0, atol=1e-15)
    np.testing.assert_allclose(dense[3:, 3:], 0, atol=1e-15)


def test_extended_spectrum_scalar_eigenpairs():
    report = extended_spectrum_check(embed(_oracle([[1.0]])))
    np.testing.assert_allclose(report.eigenvalues, [-1, 1], atol=1e-14)
    assert report.max_subvector_norm_deviation <= 1e-14


def test_extended_spectrum_wide_row():
    report = extended_spectrum_check(embed(_oracle([[1.0, 0.0]])))
    np.testing.assert_allclose(report.eigenvalues, [-1, 0, 1], atol=1e-12)
    assert report.max_eigenvalue_deviation <= 1e-12


def test_extended_spectrum_random_low_rank():
    rng = np.random.default_rng(2)
    a = random_low_rank_rect(4, 6, 2, 1.0, rng)
    report = extended_spectrum_check(embed(_oracle(a)))
    assert report.max_eigenvalue_deviation <= 1e-10
    assert report.max_subvector_norm_deviation <= 1e-10
    assert report.nonzero_count == 4  # rank doubling: 2r nonzero eigenvalues


def test_extended_spectrum_symmetry():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    w = extended_spectrum_check(embed(_oracle(a))).eigenvalues
    np.testing.assert_allclose(np.sort(w), np.sort(-w), atol=1e-10)


def test_eigenvector_phase_ambiguity_residual_identity():
    # twisting u_j by e^{i theta} breaks the eigenvector property with
    # residual norm |e^{i theta} - 1| sigma for the normalized eigenvector
    rng = np.random.default_rng(4)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    u, s, vh = np.linalg.svd(a)
    dense = embed(_oracle(a)).materialize_baseline()
    theta = 0.3
    j = 0
    twisted = np.concatenate([np.exp(1j * theta) * u[:, j], vh[j].conj()]) / np.sqrt(2)
    residual = np.linalg.norm(dense @ twisted - s[j] * twisted)
    assert residual == pytest.approx(abs(np.exp(1j * theta) - 1) * s[j], rel=1e-10)
    untwisted = np.concatenate([u[:, j], vh[j].conj()]) / np.sqrt(2)
    assert np.linalg.norm(dense @ untwisted - s[j] * untwisted) <= 1e-12


def test_quantum_svd_scalar():
    result = quantum_svd(_oracle([[0.75]]), QPEConfig(bits=6), threshold=0.05)
    assert result.rank == 1
    np.testing.assert_allclose(result.singular_values, [0.75], atol=1e-10)
    assert abs(abs(result.left_vectors[0, 0]) - 1.0) <= 1e-10
    assert abs(abs(result.right_vectors[0, 0]) - 1.0) <= 1e-10


def test_quantum_svd_two_by_two_real():
    a = np.array([[2.0, 1.0], [0.5, 1.5]])
    result = quantum_svd(_oracle(a), QPEConfig(bits=12), threshold=0.01)
    assert result.rank == 2
    assert result.residual(a) <= 1e-6 * np.linalg.norm(a)
    np.testing.assert_allclose(
        result.singular_values, np.linalg.svd(a, compute_uv=False), rtol=1e-8
    )


def test_quantum_svd_rectangular_random():
    rng = np.random.default_rng(5)
    a = random_low_rank_rect(3, 5, 2, 1.0, rng)
    result = quantum_svd(_oracle(a), QPEConfig(bits=10), threshold=0.02)
    assert result.rank == 2
    assert result.residual(a) <= 1e-8 * np.linalg.norm(a)
    # triplet invariant: A v_j = sigma_j u_j with the extracted phases
    for j in range(result.rank):
        lhs = a @ result.right_vectors[:, j]
        rhs = result.singular_values[j] * result.left_vectors[:, j]
        assert np.linalg.norm(lhs - rhs) <= 1e-8 * result.singular_values[j]


def test_quantum_svd_subvector_norms():
    rng = np.random.default_rng(6)
    a = random_low_rank_rect(4, 4, 2, 1.0, rng)
    result = quantum_svd(_oracle(a), QPEConfig(bits=10), threshold=0.02)
    for j in range(result.rank):
        assert np.linalg.norm(result.left_vectors[:, j]) == pytest.approx(1.0, abs=1e-9)
        assert np.linalg.norm(result.right_vectors[:, j]) == pytest.approx(1.0, abs=1e-9)


def test_quantum_svd_orthonormal_vectors():
    rng = np.random.default_rng(7)
    a = random_low_rank_rect(5, 5, 3, 1.0, rng)
    result = quantum_svd(_oracle(a), QPEConfig(bits=11), threshold=0.01)
    gram_u = result.left_vectors.conj().T @ result.left_vectors
    gram_v = result.right_vectors.conj().T @ result.right_vectors
    np.testing.assert_allclose(gram_u, np.eye(result.rank), atol=1e-8)
    np.testing.assert_allclose(gram_v, np.eye(result.rank), atol=1e-8)


def test_quantum_svd_skew_warning():
    rng = np.random.default_rng(8)
    a = random_low_rank_rect(2, 10, 1, 1.0, rng)
    with pytest.warns(UserWarning, match="skewed"):
        quantum_svd(_oracle(a), QPEConfig(bits=8), threshold=0.01)


def test_quantum_svd_threshold_filters():
    a = np.diag([3.0, 0.05]).astype(complex)
    result = quantum_svd(_oracle(a), QPEConfig(bits=9), threshold=0.2)
    # sigma/(M+N) = 0.75 passes, 0.0125 is filtered
    assert result.rank == 1
    np.testing.assert_allclose(result.singular_values, [3.0], atol=1e-8)


def test_phase_ambiguity_zero_thetas():
    rng = np.random.default_rng(9)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    report = phase_ambiguity_demo(a, np.zeros(3))
    assert report.distance <= 1e-12
    assert report.gram_deviation <= 1e-12


def test_phase_ambiguity_sign_flip_rank_one():
    rng = np.random.default_rng(10)
    u = rng.standard_normal(3)
    v = rng.standard_normal(4)
    a = np.outer(u, v)
    report = phase_ambiguity_demo(a, [np.pi])
    np.testing.assert_allclose(report.modified, -a, atol=1e-12)
    assert report.distance == pytest.approx(2 * np.linalg.norm(a), rel=1e-12)


def test_phase_ambiguity_random_about_gram_preservation():
    rng = np.random.default_rng(11)
    a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    thetas = rng.uniform(0, 2 * np.pi, size=3)
    report = phase_ambiguity_demo(a, thetas)
    assert report.gram_deviation <= 1e-10
    assert report.distance >= 0.1 * np.linalg.norm(a)
    np.testing.assert_allclose(
        report.singular_values_original, report.singular_values_modified, rtol=1e-10
    )
    assert report.pairing_residual <= 1e-10


def test_phase_ambiguity_warns_on_psd():
    a = np.eye(2, dtype=complex)
    with pytest.warns(UserWarning, match="semidefinite"):
        phase_ambiguity_demo(a, [0.5, 0.2])


def test_quantum_svd_degenerate_singular_values_flagged():
    # Hermitian source with eigenvalues {+2, -2} has a doubly degenerate
    # singular value; the pipeline returns an orthonormal basis of the
    # subspace, flags it, and the reconstruction invariant still holds
    from modswap.linalg import haar_unitary

    u = haar_unitary(2, np.random.default_rng(0))
    a = (u * np.array([2.0, -2.0])) @ u.conj().T
    result = quantum_svd(_oracle(a), QPEConfig(bits=10), threshold=0.1)
    assert result.rank == 2
    np.testing.assert_allclose(result.singular_values, [2.0, 2.0], atol=1e-9)
    assert result.degenerate == [True, True]
    assert result.residual(a) <= 1e-8 * np.linalg.norm(a)
