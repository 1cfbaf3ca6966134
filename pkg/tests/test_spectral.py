import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrected_sampler.config import DEFAULT_CONFIG
from corrected_sampler.errors import UnseparableSpectrumError
from corrected_sampler.spectral import cluster_eigenvalues, spectral_decomposition

TAU = 1e-8


def check_invariants(A, dec):
    n = A.shape[0]
    I = np.eye(n)
    total = sum(dec.projections)
    assert np.linalg.norm(total - I, 2) < TAU
    for j, Pj in enumerate(dec.projections):
        assert np.linalg.norm(Pj @ Pj - Pj, 2) < TAU
        for k, Pk in enumerate(dec.projections):
            if j != k:
                assert np.linalg.norm(Pj @ Pk, 2) < TAU
        lam, m = dec.eigenvalues[j], dec.multiplicities[j]
        shift = np.linalg.matrix_power(A - lam * I, m)
        assert np.linalg.norm(shift @ Pj, 2) < TAU * max(1.0, np.linalg.norm(A, 2)) ** m


def test_diagonal_coordinate_projectors():
    A = np.diag([-1.0, -2.0])
    B = np.array([[1.0], [2.0]])
    C = np.array([[3.0, 5.0]])
    dec = spectral_decomposition(A, B, C)
    by_eig = {round(lam.real): (P, j) for j, (lam, P) in enumerate(zip(dec.eigenvalues, dec.projections))}
    P1, j1 = by_eig[-1]
    np.testing.assert_allclose(P1, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(by_eig[-2][0], np.diag([0.0, 1.0]), atol=1e-12)
    np.testing.assert_allclose(dec.residue(j1, 1), C @ P1 @ B, atol=1e-12)
    check_invariants(A, dec)


def test_rmcf_conjugate_projectors_match_eigenvectors():
    A = np.array([[-1.0, -3.0], [3.0, -1.0]])
    dec = spectral_decomposition(A)
    eig = sorted(dec.eigenvalues, key=lambda z: z.imag)
    np.testing.assert_allclose(eig, [-1 - 3j, -1 + 3j], atol=1e-12)
    w, V = np.linalg.eig(A)
    Vinv = np.linalg.inv(V)
    for lam, P in zip(dec.eigenvalues, dec.projections):
        k = int(np.argmin(np.abs(w - lam)))
        ref = np.outer(V[:, k], Vinv[k])
        np.testing.assert_allclose(P, ref, atol=1e-12)
    P0, P1 = dec.projections
    np.testing.assert_allclose(P0, P1.conj(), atol=1e-12)
    np.testing.assert_allclose(P0 + P1, np.eye(2), atol=1e-12)


def test_jordan_block_single_projector():
    A = np.array([[-1.0, 1.0], [0.0, -1.0]])
    dec = spectral_decomposition(A)
    assert len(dec.eigenvalues) == 1
    assert dec.multiplicities == (2,)
    np.testing.assert_allclose(dec.projections[0], np.eye(2), atol=1e-12)
    assert np.linalg.norm(dec.residue(0, 2)) > 0.5


def test_three_by_three_jordan_block_escalates_cluster_tolerance():
    A = -2.0 * np.eye(3) + np.diag([1.0, 1.0], 1)
    dec = spectral_decomposition(A)
    assert dec.multiplicities == (3,)
    check_invariants(A, dec)


def test_residues_sum_to_cb():
    rng = np.random.default_rng(11)
    A = rng.standard_normal((4, 4)) - 2 * np.eye(4)
    B = rng.standard_normal((4, 2))
    C = rng.standard_normal((3, 4))
    dec = spectral_decomposition(A, B, C)
    total = sum(dec.residue(j, 1) for j in range(len(dec.eigenvalues)))
    np.testing.assert_allclose(total, C @ B, atol=1e-8)


def test_partial_fraction_resolvent_rebuild():
    A = np.array([[-1.0, 2.0, 0.0], [0.0, -2.0, 1.0], [0.5, 0.0, -3.0]])
    dec = spectral_decomposition(A)
    for s in (0.3 + 1j, 2.0, -0.5 + 4j):
        np.testing.assert_allclose(dec.resolvent(s), np.linalg.inv(s * np.eye(3) - A), atol=1e-9)


def test_clusters_too_close_are_rejected():
    # a cluster wider than the room its neighbour leaves cannot be isolated
    A = np.diag([1.0, 0.3, 0.4, 0.5])
    cfg = DEFAULT_CONFIG.with_tolerances(cluster=0.1)
    with pytest.raises(UnseparableSpectrumError):
        spectral_decomposition(A, config=cfg)


def test_cluster_eigenvalues_single_linkage():
    groups = cluster_eigenvalues(np.array([0.0, 1e-9, 5.0, 5.0 + 2e-9, 10.0]), 1e-8)
    assert sorted(map(sorted, groups)) == [[0, 1], [2, 3], [4]]


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(0, 2**31 - 1))
def test_random_matrices_satisfy_invariants(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    eig = np.linalg.eigvals(A)
    gaps = [abs(a - b) for i, a in enumerate(eig) for b in eig[i + 1:]]
    if gaps and min(gaps) < 1e-2:
        return
    dec = spectral_decomposition(A)
    check_invariants(A, dec)
