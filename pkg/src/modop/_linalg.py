"""Dense complex linear-algebra kernels shared by the modules.

All row-space computations use the row-vector convention: a vector is a
row ``v`` and a matrix ``M`` acts by ``v -> v @ M``.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalFailure

#: Singular values at or below ``RANK_RTOL * sigma_max`` count as zero.
RANK_RTOL = 1e-10


def as_matrix(data, shape=None) -> np.ndarray:
    """Copy ``data`` into a read-only complex128 2-D array."""
    arr = np.array(data, dtype=np.complex128, copy=True)
    if arr.ndim != 2:
        if arr.size == 0 and shape is not None:
            arr = arr.reshape(shape)
        else:
            raise ValueError(f"expected a 2-D matrix, got ndim={arr.ndim}")
    arr.flags.writeable = False
    return arr


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def spectral_norm(M: np.ndarray) -> float:
    if M.size == 0:
        return 0.0
    return float(_svdvals(M)[0])


def _svdvals(M: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericalFailure(str(exc)) from exc


def svdvals(M: np.ndarray) -> np.ndarray:
    """Singular values in descending order (empty for empty matrices)."""
    if M.size == 0:
        return np.zeros(0)
    return _svdvals(M)


def numerical_rank(s: np.ndarray, rtol: float = RANK_RTOL) -> int:
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def _svd(M: np.ndarray):
    try:
        return np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(str(exc)) from exc


def orthonormal_rows(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of ``M``.

    Rank-revealing: singular values ``<= rtol * sigma_max`` are dropped.
    """
    k, m = M.shape
    if k == 0 or m == 0:
        return np.zeros((0, m), dtype=np.complex128)
    _, s, vh = _svd(M)
    return vh[: numerical_rank(s, rtol)].copy()


def left_null_rows(M: np.ndarray, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal rows ``v`` with ``v @ M = 0``."""
    k, p = M.shape
    if k == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    if p == 0:
        return np.eye(k, dtype=np.complex128)
    u, s, _ = _svd(M)
    return u[:, numerical_rank(s, rtol):].conj().T.copy()


def complement_rows(B: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the Hermitian orthogonal complement of ``rowspace(B)``.

    ``B`` must have orthonormal rows.
    """
    m = B.shape[1]
    if B.shape[0] == 0:
        return np.eye(m, dtype=np.complex128)
    return left_null_rows(dagger(B))


def row_projector(B: np.ndarray) -> np.ndarray:
    """Right-multiplication projector ``B^H B`` onto the row space of orthonormal ``B``."""
    return dagger(B) @ B


def hermitian_part(M: np.ndarray) -> np.ndarray:
    return (M + dagger(M)) / 2


def hermitian_function(M: np.ndarray, f) -> np.ndarray:
    """Apply ``f`` to the spectrum of the Hermitian matrix ``(M + M^H)/2``."""
    if M.size == 0:
        return np.zeros_like(M, dtype=np.complex128)
    try:
        w, U = np.linalg.eigh(hermitian_part(M))
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericalFailure(str(exc)) from exc
    return (U * f(w)) @ dagger(U)


def psd_sqrt(M: np.ndarray) -> np.ndarray:
    """Positive square root of a positive semidefinite matrix.

    Eigenvalues below ``n * eps * lambda_max`` are treated as exact zeros so
    that the square root does not turn rounding noise into spurious rank.
    """
    def root(w):
        floor = w.size * np.finfo(float).eps * max(float(w.max(initial=0.0)), 0.0)
        return np.sqrt(np.where(w > floor, w, 0.0))

    return hermitian_function(M, root)


def min_eigenvalue(M: np.ndarray) -> float:
    if M.size == 0:
        return np.inf
    return float(np.linalg.eigvalsh(hermitian_part(M))[0])


def backward_error(M: np.ndarray, u: np.ndarray, w: np.ndarray) -> float:
    """Normwise backward error of ``u`` as a solution of ``u @ M = w``."""
    if w.size == 0:
        return 0.0
    r = np.linalg.norm(u @ M - w)
    denom = spectral_norm(M) * np.linalg.norm(u) + np.linalg.norm(w)
    return float(r / denom) if denom > 0 else float(r)


def random_matrix(rng: np.random.Generator, shape) -> np.ndarray:
    """Complex entries with real and imaginary parts uniform in ``[-1, 1]``."""
    return rng.uniform(-1.0, 1.0, shape) + 1j * rng.uniform(-1.0, 1.0, shape)


def encode_matrix(M: np.ndarray) -> list:
    """JSON-friendly nested lists of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def decode_matrix(data, shape=None) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.size == 0:
        if shape is None:
            raise ValueError("cannot infer the shape of an empty matrix")
        return as_matrix(np.zeros(shape, dtype=np.complex128))
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise ValueError("matrix must be encoded as rows of [re, im] pairs")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])
