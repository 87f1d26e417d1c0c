"""Dense complex linear algebra used throughout the package.

Vectors and matrices are plain ``numpy`` arrays of dtype ``complex128``.
Bases are returned column-wise, as ``scipy.linalg.null_space`` does.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .errors import DimensionMismatch, NonHermitian, NonSquare

#: Default relative threshold on singular values for rank and kernel decisions.
TOL_REL = 1e-10
#: Default relative Hermiticity tolerance for generators.
TOL_HERM = 1e-12


def as_vector(v, dim: int | None = None) -> np.ndarray:
    arr = np.asarray(v, dtype=complex).reshape(-1)
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected vector of length {dim}, got {arr.shape[0]}")
    return arr


def as_matrix(m, shape: tuple[int, int] | None = None) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected a 2-d matrix, got {arr.ndim} dimensions")
    if shape is not None and arr.shape != tuple(shape):
        raise DimensionMismatch(f"expected matrix of shape {shape}, got {arr.shape}")
    return arr


def max_abs(m) -> float:
    """Max-norm (largest absolute entry); 0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def check_hermitian(h: np.ndarray, tol: float = TOL_HERM, name: str = "matrix") -> None:
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {h.shape}")
    scale = max(1.0, max_abs(h))
    dev = max_abs(h - h.conj().T)
    if dev > tol * scale:
        raise NonHermitian(f"{name} is not Hermitian: max |H - H^+| = {dev:.3e}")


def expm_hermitian_propagator(h, t: float, sign: int = 1, herm_tol: float = TOL_HERM) -> np.ndarray:
    """Return ``exp(-i * sign * H * t)`` for Hermitian ``H``.

    ``sign=+1`` is forward propagation, ``sign=-1`` its inverse. Computed from
    the eigendecomposition of the Hermitian part, so the result is unitary to
    roundoff.

    Parameters
    ----------
    h : array_like
        Square Hermitian generator (angular frequencies, hbar = 1).
    t : float
        Evolution time.
    sign : {+1, -1}
        Direction of propagation.
    herm_tol : float
        Relative tolerance on ``max|H - H^+|``.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    h = np.asarray(h, dtype=complex)
    check_hermitian(h, herm_tol, "generator")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    phases = np.exp(-1j * sign * w * t)
    return (v * phases) @ v.conj().T


def _svd_cut(m: np.ndarray, tol_rel: float, scale: float | None = None) -> tuple[np.ndarray, np.ndarray, int]:
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    ref = s[0] if scale is None or s.size == 0 else max(s[0], scale)
    if s.size == 0 or ref == 0.0:
        return s, vh, 0
    return s, vh, int(np.count_nonzero(s > tol_rel * ref))


def rank(m, tol_rel: float = TOL_REL, scale: float | None = None) -> int:
    """Number of singular values above ``tol_rel * max(sigma_max, scale)``.

    ``scale`` lets a caller compare against a known problem scale, so that a
    matrix that is zero up to rounding is not promoted to full rank.
    """
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return 0
    return _svd_cut(m, tol_rel, scale)[2]


def null_space(m, tol_rel: float = TOL_REL, scale: float | None = None) -> np.ndarray:
    """Orthonormal kernel basis of ``m`` as the columns of a ``(cols, k)`` array.

    A matrix with no rows (or the zero matrix) has the whole column space as
    its kernel.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionMismatch("null_space expects a 2-d matrix")
    cols = m.shape[1]
    if m.shape[0] == 0 or cols == 0:
        return np.eye(cols, dtype=complex)
    _, vh, r = _svd_cut(m, tol_rel, scale)
    return vh[r:].conj().T.copy()


def orthogonal_complement(basis: np.ndarray, dim: int, tol_rel: float = TOL_REL) -> np.ndarray:
    """Orthonormal basis of the complement of ``span(basis columns)`` in C^dim."""
    basis = np.asarray(basis, dtype=complex).reshape(dim, -1)
    if basis.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    return null_space(basis.conj().T, tol_rel)


def gram_schmidt_extend(
    fixed: Sequence[np.ndarray] | np.ndarray,
    candidates: Sequence[np.ndarray],
    tol: float = 1e-10,
) -> tuple[list[np.ndarray], list[int]]:
    """Extend an orthonormal set by orthogonalizing ``candidates`` in order.

    Modified Gram-Schmidt with one full re-orthogonalization pass. A
    candidate whose residual norm falls to ``tol`` or below is linearly
    dependent on what came before and is skipped.

    Parameters
    ----------
    fixed : sequence of arrays or 2-d array (columns)
        Orthonormal vectors that are kept as they are.
    candidates : sequence of arrays
        Vectors to orthonormalize, in processing order.
    tol : float
        Absolute residual-norm threshold for dependence.

    Returns
    -------
    new : list of ndarray
        The orthonormal vectors added; ``fixed + new`` spans
        ``span(fixed + candidates)``.
    skipped : list of int
        Indices into ``candidates`` that were dependent.
    """
    if isinstance(fixed, np.ndarray) and fixed.ndim == 2:
        basis = [fixed[:, j] for j in range(fixed.shape[1])]
    else:
        basis = [np.asarray(f, dtype=complex) for f in fixed]
    new: list[np.ndarray] = []
    skipped: list[int] = []
    for idx, cand in enumerate(candidates):
        w = np.array(cand, dtype=complex).reshape(-1)
        for _ in range(2):
            for q in basis:
                w -= np.vdot(q, w) * q
        nrm = np.linalg.norm(w)
        if nrm <= tol:
            skipped.append(idx)
            continue
        w /= nrm
        basis.append(w)
        new.append(w)
    return new, skipped


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``A (x) B`` with the first factor as the major index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def _check_bipartite(m: np.ndarray, dims: tuple[int, int]) -> tuple[int, int]:
    d1, d2 = (int(d) for d in dims)
    if m.shape != (d1 * d2, d1 * d2):
        raise DimensionMismatch(f"matrix of shape {m.shape} does not match dims {dims}")
    return d1, d2


def partial_trace_S(m, dims: tuple[int, int]) -> np.ndarray:
    """Trace out the second (object) factor of an operator on ``C^d1 (x) C^d2``."""
    m = np.asarray(m, dtype=complex)
    d1, d2 = _check_bipartite(m, dims)
    return np.einsum("ikjk->ij", m.reshape(d1, d2, d1, d2))


def partial_trace_first(m, dims: tuple[int, int]) -> np.ndarray:
    """Trace out the first (probe) factor."""
    m = np.asarray(m, dtype=complex)
    d1, d2 = _check_bipartite(m, dims)
    return np.einsum("kikj->ij", m.reshape(d1, d2, d1, d2))


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return max_abs(u.conj().T @ u - np.eye(u.shape[1])) <= tol


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * 0.5 * (x + x.conj().T)


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR with phase fix."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
