"""Dense complex linear algebra: expm, resolvent, spectral radius, JSON matrices.

Matrices are plain 2-D numpy arrays.  ``as_matrix`` is the single entry
point that validates shape and finiteness; everything else assumes its
output.
"""

from __future__ import annotations

import math
import warnings
from typing import Any, Mapping

import numpy as np
import scipy.linalg

from .errors import DimensionError, ResolventAtSpectrumError, ValidationError

__all__ = [
    "as_matrix",
    "as_square",
    "matrix_to_json",
    "matrix_from_json",
    "expm",
    "resolvent",
    "resolvent_batch",
    "spectral_radius",
    "max_real_eig",
]

# (order, 1-norm threshold) pairs for the diagonal Pade approximants,
# Higham (2005) Table 2.3 values for double precision.
_PADE_THETA = (
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068e0),
    (13, 5.371920351148152e0),
)


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a finite 2-D array; scalars become 1x1."""
    arr = np.asarray(x)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column")
    if not np.issubdtype(arr.dtype, np.number):
        raise ValidationError(f"{name} must be numeric")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    if np.iscomplexobj(arr):
        return arr.astype(np.complex128)
    return arr.astype(np.float64)


def as_square(x, name: str = "matrix") -> np.ndarray:
    arr = as_matrix(x, name)
    if arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    return arr


def matrix_to_json(m) -> dict:
    m = as_matrix(m)
    flat = np.asarray(m, dtype=np.complex128).ravel()
    return {
        "rows": int(m.shape[0]),
        "cols": int(m.shape[1]),
        "re": [float(v) for v in flat.real],
        "im": [float(v) for v in flat.imag],
    }


def matrix_from_json(obj: Mapping[str, Any]) -> np.ndarray:
    """Inverse of :func:`matrix_to_json`; real storage when ``im`` is all zero."""
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", [0.0] * (rows * cols)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix record: {exc}") from None
    if rows < 1 or cols < 1 or re.size != rows * cols or im.size != rows * cols:
        raise ValidationError(
            f"matrix record declares {rows}x{cols} but carries {re.size} re / {im.size} im entries"
        )
    data = re if not np.any(im) else re + 1j * im
    return as_matrix(data.reshape(rows, cols))


def _pade_terms(X: np.ndarray, m: int):
    b = [
        math.factorial(2 * m - k) * math.factorial(m)
        / (math.factorial(2 * m) * math.factorial(k) * math.factorial(m - k))
        for k in range(m + 1)
    ]
    n = X.shape[0]
    ident = np.eye(n, dtype=X.dtype)
    X2 = X @ X
    powers = [ident, X2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ X2)
    U_inner = sum(b[2 * i + 1] * powers[i] for i in range((m - 1) // 2 + 1))
    V = sum(b[2 * i] * powers[i] for i in range(m // 2 + 1))
    U = X @ U_inner
    return U, V


def expm(A, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(A t)`` by scaling and squaring.

    Uses the diagonal Pade approximant of the lowest order whose
    backward-error threshold covers ``||A t||_1``; beyond order 13 the
    argument is halved ``s`` times and the result squared back.
    """
    A = as_square(A, "A")
    t = float(t)
    if not math.isfinite(t):
        raise ValidationError("t must be finite")
    n = A.shape[0]
    if t == 0.0:
        return np.eye(n, dtype=A.dtype)
    X = A * t
    norm1 = np.linalg.norm(X, 1)
    if norm1 == 0.0:
        return np.eye(n, dtype=A.dtype)

    squarings = 0
    for m, theta in _PADE_THETA:
        if norm1 <= theta:
            break
    else:
        m, theta = _PADE_THETA[-1]
        squarings = max(0, int(math.ceil(math.log2(norm1 / theta))))
        X = X / (2.0 ** squarings)

    U, V = _pade_terms(X, m)
    R = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        R = R @ R
    return R


def _check_pivots(lu: np.ndarray, scale: float) -> bool:
    diag = np.abs(np.diag(lu))
    return bool(np.all(diag > 8 * np.finfo(float).eps * max(scale, np.finfo(float).tiny) * lu.shape[0]))


def resolvent(A, s: complex) -> np.ndarray:
    """``(sI - A)^{-1}`` via an LU solve against the identity."""
    A = as_square(A, "A")
    s = complex(s)
    n = A.shape[0]
    M = s * np.eye(n) - A
    scale = np.linalg.norm(M, 1)
    try:
        with warnings.catch_warnings():
            # singularity is judged by the pivot check below
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(M, check_finite=False)
    except (ValueError, np.linalg.LinAlgError):
        raise ResolventAtSpectrumError(s) from None
    if not _check_pivots(lu, scale):
        raise ResolventAtSpectrumError(s)
    X = scipy.linalg.lu_solve((lu, piv), np.eye(n, dtype=M.dtype), check_finite=False)
    if not np.all(np.isfinite(X)):
        raise ResolventAtSpectrumError(s)
    return X


def resolvent_batch(A, points, chunk: int = 32768) -> np.ndarray:
    """Stack of resolvents ``(p_k I - A)^{-1}``, shape ``(len(points), n, n)``."""
    A = as_square(A, "A")
    pts = np.asarray(points, dtype=np.complex128).ravel()
    n = A.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    out = np.empty((pts.size, n, n), dtype=np.complex128)
    for lo in range(0, pts.size, chunk):
        p = pts[lo:lo + chunk]
        M = p[:, None, None] * ident - A
        try:
            out[lo:lo + chunk] = np.linalg.solve(M, np.broadcast_to(ident, M.shape))
        except np.linalg.LinAlgError:
            # locate the offending node for the error message
            for pk in p:
                resolvent(A, pk)
            raise
    if not np.all(np.isfinite(out)):
        bad = pts[np.argmax(~np.isfinite(out).reshape(pts.size, -1).all(axis=1))]
        raise ResolventAtSpectrumError(bad)
    return out


def max_real_eig(A) -> float:
    A = as_square(A, "A")
    return float(np.max(np.linalg.eigvals(A).real))


def spectral_radius(M, max_iter: int = 500, rtol: float = 1e-13) -> float:
    """Largest eigenvalue modulus.

    Power iteration with a Rayleigh-quotient estimate; when the iteration
    does not settle (e.g. a dominant complex-conjugate pair) the full
    eigenvalue solve decides.
    """
    M = as_square(M, "M")
    n = M.shape[0]
    normM = np.linalg.norm(M, 2)
    if normM == 0.0:
        return 0.0
    if n <= 2:
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    v = np.ones(n, dtype=np.complex128) + 0.1j * np.arange(n) / n
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = M @ v
        mu = np.vdot(v, w)
        if np.linalg.norm(w - mu * v) <= rtol * normM:
            return float(abs(mu))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    return float(np.max(np.abs(np.linalg.eigvals(M))))
