"""Spectral decomposition through Riesz projections.

Eigenvalues from a standard solve are only used to *locate* clusters; the
projectors themselves come from contour integrals of the resolvent, which
stay well defined for defective matrices where eigenvector bases do not.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG
from .contour import CircleContour, riesz_projection
from .errors import UnseparableSpectrumError
from .linalg import as_matrix, as_square

__all__ = ["SpectralDecomposition", "cluster_eigenvalues", "spectral_decomposition"]


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    multiplicities: tuple          # index m_j: size of the largest Jordan block
    projections: tuple
    nilpotents: tuple              # N_j = (A - lambda_j I) P_j
    residues: dict = field(default_factory=dict)  # (j, r) -> C (A - lambda_j I)^(r-1) P_j B, r >= 1
    contours: tuple = ()

    def residue(self, j: int, r: int) -> np.ndarray:
        return self.residues[(j, r)]

    def resolvent(self, s: complex) -> np.ndarray:
        """Resolvent rebuilt from the partial-fraction expansion."""
        n = self.projections[0].shape[0]
        out = np.zeros((n, n), dtype=np.complex128)
        for lam, m, P, N in zip(self.eigenvalues, self.multiplicities, self.projections, self.nilpotents):
            term = P.astype(np.complex128)
            for r in range(1, m + 1):
                out += term / (s - lam) ** r
                term = N @ term
        return out


def cluster_eigenvalues(eig, tol: float) -> list[list[int]]:
    """Single-linkage groups of eigenvalue indices closer than ``tol``."""
    eig = np.asarray(eig)
    parent = list(range(eig.size))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(eig.size):
        for j in range(i + 1, eig.size):
            if abs(eig[i] - eig[j]) <= tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(eig.size):
        groups.setdefault(find(i), []).append(i)
    # deterministic order: by real part, then imaginary part of the centroid
    out = list(groups.values())
    out.sort(key=lambda g: (round(float(np.mean(eig[g].real)), 12), round(float(np.mean(eig[g].imag)), 12)))
    return out


def _index(A, lam, P, size, tol):
    n = A.shape[0]
    shift = A - lam * np.eye(n)
    scale = max(1.0, np.linalg.norm(A, 2))
    term = P
    for m in range(1, size + 1):
        term = shift @ term
        if np.linalg.norm(term, 2) <= tol * scale ** m * max(1.0, np.linalg.norm(P, 2)):
            return m
    return size


def _attempt(A, cluster_tol, proj_tol, nodes, ambiguity):
    eig = np.linalg.eigvals(A)
    groups = cluster_eigenvalues(eig, cluster_tol)
    centers = np.array([np.mean(eig[g]) for g in groups])
    spreads = np.array([np.max(np.abs(eig[g] - c)) for g, c in zip(groups, centers)])
    contours = []
    for k, (center, spread) in enumerate(zip(centers, spreads)):
        if len(groups) > 1:
            others = np.delete(centers, k)
            radius = 0.5 * float(np.min(np.abs(others - center)))
        else:
            radius = max(1.0, 10.0 * float(spread))
        if spread > radius / 4:
            raise UnseparableSpectrumError(
                f"cluster at {center!r} has spread {spread:.3g} but the nearest "
                f"cluster allows a contour radius of only {radius:.3g}"
            )
        contours.append(CircleContour(complex(center), radius, nodes))
    projections = [riesz_projection(A, c, ambiguity) for c in contours]
    for g, P in zip(groups, projections):
        tr = np.trace(P).real
        if abs(tr - len(g)) > max(1e-6, 1e3 * proj_tol):
            return None
    return groups, centers, contours, projections


def spectral_decomposition(A, B=None, C=None, config=DEFAULT_CONFIG) -> SpectralDecomposition:
    """Eigenvalue clusters, Riesz projectors, nilpotent parts and residues.

    ``B`` and ``C`` default to the identity, so the residues are then the
    matrices ``(A - lambda_j I)^(r-1) P_j`` themselves.

    Clusters are first formed at ``tol.cluster * ||A||``.  If a projector's
    trace does not match its cluster size (a defective eigenvalue split by
    rounding wider than the tolerance), the tolerance is raised tenfold,
    up to ``1e-3 * ||A||``, before giving up.
    """
    A = as_square(A, "A")
    n = A.shape[0]
    B = np.eye(n) if B is None else as_matrix(B, "B")
    C = np.eye(n) if C is None else as_matrix(C, "C")
    tol = config.tolerances
    normA = float(np.linalg.norm(A, 2))
    cluster_tol = tol.cluster * normA
    result = None
    while result is None:
        result = _attempt(A, cluster_tol, tol.proj, config.circle_nodes, tol.ambiguity)
        if result is None:
            if cluster_tol >= 1e-3 * normA:
                raise UnseparableSpectrumError(
                    "projector traces disagree with cluster sizes; spectrum is near-defective"
                )
            cluster_tol = max(cluster_tol * 10, 1e-300)

    groups, centers, contours, projections = result
    eigenvalues, mults, nilpotents, residues = [], [], [], {}
    for j, (g, lam, P) in enumerate(zip(groups, centers, projections)):
        lam = complex(lam)
        m = _index(A, lam, P, len(g), tol.proj)
        N = (A - lam * np.eye(n)) @ P
        term = P
        for r in range(1, m + 1):
            residues[(j, r)] = C @ term @ B
            term = N @ term
        eigenvalues.append(lam)
        mults.append(m)
        nilpotents.append(N)
    return SpectralDecomposition(
        eigenvalues=tuple(eigenvalues),
        multiplicities=tuple(mults),
        projections=tuple(projections),
        nilpotents=tuple(nilpotents),
        residues=residues,
        contours=tuple(contours),
    )
