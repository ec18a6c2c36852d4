"""Dense complex linear-algebra kernels used by the transmit/receive schemes.

Every function accepts a single matrix or a stack of matrices with shape
``(..., rows, cols)``; leading axes are treated as a batch. Vector results
carry a deterministic phase: the first component whose magnitude exceeds
``PHASE_TOL`` is rotated onto the positive real axis. Exactly degenerate
extremal subspaces are resolved by projecting the canonical basis vectors
``e_1, e_2, ...`` onto the subspace and keeping the first non-vanishing
projection, so results never depend on the LAPACK basis choice.
"""

import numpy as np

from .errors import (
    DimensionMismatch,
    IllConditioned,
    NoNullSpace,
    NotHermitian,
    NotPositiveDefinite,
    ZeroMatrix,
)

__all__ = [
    "max_left_singular_vector",
    "max_eigenvector_hermitian",
    "right_pseudo_inverse",
    "left_null_unit_vector",
    "hermitian_solve",
    "normalize",
    "canonical_phase",
    "hermitian",
]

PHASE_TOL = 1e-10
ZERO_TOL = 1e-14
HERMITIAN_TOL = 1e-10
DEGENERACY_TOL = 1e-10
NULL_TOL = 1e-10
COND_LIMIT = 1e12
PD_TOL = 1e-12


def hermitian(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def normalize(x, axis=-1):
    """Scale vectors along ``axis`` to unit Euclidean norm."""
    x = np.asarray(x)
    return x / np.linalg.norm(x, axis=axis, keepdims=True)


def canonical_phase(x):
    """Rotate each vector so its first significant entry is real-positive.

    ``x`` has shape ``(..., n)``. Entries are "significant" when their
    magnitude exceeds ``PHASE_TOL`` times the vector's largest magnitude.
    """
    x = np.asarray(x, dtype=complex)
    mag = np.abs(x)
    significant = mag > PHASE_TOL * mag.max(axis=-1, keepdims=True)
    first = np.argmax(significant, axis=-1)
    pivot = np.take_along_axis(x, first[..., None], axis=-1)
    pivot_mag = np.abs(pivot)
    rot = np.where(pivot_mag > 0, np.conj(pivot) / np.where(pivot_mag > 0, pivot_mag, 1.0), 1.0)
    out = x * rot
    # pin the pivot to an exact real value
    np.put_along_axis(out, first[..., None], np.abs(np.take_along_axis(out, first[..., None], axis=-1)) + 0j, axis=-1)
    return out


def _pick_in_subspace(basis):
    """Deterministic unit vector in the span of orthonormal ``basis`` (n, d)."""
    if basis.shape[1] == 1:
        return basis[:, 0]
    # row j of basis holds the coordinates of the projection of e_j
    row_norms = np.linalg.norm(basis, axis=1)
    j = int(np.argmax(row_norms > 1e-8))
    v = basis @ np.conj(basis[j])
    return v / np.linalg.norm(v)


def _check_finite(a, name="a"):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains NaN or Inf entries")


def _as_matrix_stack(a, name="a"):
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2:
        raise DimensionMismatch(f"{name} must be at least 2-D, got shape {a.shape}")
    _check_finite(a, name)
    return a


def _extremal_vectors(vectors, values, top_first):
    """Select the extremal column per batch element with degeneracy handling.

    ``vectors`` (B, n, r) and ``values`` (B, r) are flattened batches where
    the extremal eigen/singular value is at index 0 if ``top_first`` else -1.
    """
    batch = vectors.shape[0]
    idx = 0 if top_first else -1
    out = np.array(vectors[:, :, idx])
    scale = np.max(np.abs(values), axis=-1)
    for b in range(batch):
        if values.shape[-1] < 2:
            continue
        ref = values[b, idx]
        group = np.abs(values[b] - ref) <= DEGENERACY_TOL * max(scale[b], ZERO_TOL)
        if np.count_nonzero(group) > 1:
            out[b] = _pick_in_subspace(vectors[b][:, group])
    return canonical_phase(out)


def max_left_singular_vector(a):
    """Unit left singular vector of the largest singular value.

    Parameters
    ----------
    a : array_like, shape (..., n, m)

    Returns
    -------
    u : ndarray, shape (..., n)
        Maximizes ``||u^H a||`` over unit vectors.
    """
    a = _as_matrix_stack(a)
    fro = np.linalg.norm(a, axis=(-2, -1))
    if np.any(fro < ZERO_TOL):
        raise ZeroMatrix("matrix has Frobenius norm below 1e-14")
    lead = a.shape[:-2]
    n, m = a.shape[-2:]
    flat = a.reshape((-1, n, m))
    u, s, _ = np.linalg.svd(flat, full_matrices=False)
    return _extremal_vectors(u, s, top_first=True).reshape(lead + (n,))


def _check_hermitian(a):
    fro = np.linalg.norm(a, axis=(-2, -1))
    if np.any(fro < ZERO_TOL):
        raise ZeroMatrix("matrix has Frobenius norm below 1e-14")
    skew = np.linalg.norm(a - hermitian(a), axis=(-2, -1))
    if np.any(skew > HERMITIAN_TOL * fro):
        raise NotHermitian("relative anti-Hermitian part exceeds 1e-10")


def max_eigenvector_hermitian(a):
    """Unit eigenvector of the largest eigenvalue of a Hermitian matrix."""
    a = _as_matrix_stack(a)
    if a.shape[-1] != a.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got {a.shape}")
    _check_hermitian(a)
    lead = a.shape[:-2]
    n = a.shape[-1]
    w, v = np.linalg.eigh(a.reshape((-1, n, n)))
    return _extremal_vectors(v, w, top_first=False).reshape(lead + (n,))


def pseudo_inverse_columns(h):
    """Unit-normalized columns of ``h^H (h h^H)^{-1}`` without raising.

    Returns ``(v, cond)`` where ``cond`` is the condition number of the Gram
    matrix ``h h^H`` per batch element (``inf`` if singular). Columns of
    ill-conditioned elements are meaningless and must be masked by the caller.
    """
    h = np.asarray(h, dtype=complex)
    s_rows, m = h.shape[-2:]
    if s_rows > m:
        raise DimensionMismatch(f"need rows <= cols for a right inverse, got {h.shape}")
    gram = h @ hermitian(h)
    w = np.linalg.eigvalsh(gram)
    wmin = w[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(wmin > 0, w[..., -1] / np.where(wmin > 0, wmin, 1.0), np.inf)
    safe = cond <= COND_LIMIT
    eye = np.broadcast_to(np.eye(s_rows, dtype=complex), gram.shape)
    gram_safe = np.where(safe[..., None, None], gram, eye)
    v = hermitian(h) @ np.linalg.inv(gram_safe)
    norms = np.linalg.norm(v, axis=-2, keepdims=True)
    v = v / np.where(norms > 0, norms, 1.0)
    return v, cond


def right_pseudo_inverse(h):
    """Zero-forcing transmit matrix for stacked row channels.

    Parameters
    ----------
    h : array_like, shape (..., S, M), S <= M, full row rank

    Returns
    -------
    v : ndarray, shape (..., M, S)
        Column ``k`` is the unit-normalized ``k``-th column of
        ``h^H (h h^H)^{-1}``, so ``h @ v`` is diagonal with positive entries.

    Raises
    ------
    IllConditioned
        If the condition number of ``h h^H`` exceeds 1e12.
    """
    h = _as_matrix_stack(h, "h")
    v, cond = pseudo_inverse_columns(h)
    if np.any(cond > COND_LIMIT):
        raise IllConditioned(f"Gram matrix condition number {np.max(cond):.3g} exceeds {COND_LIMIT:g}")
    return v


def left_null_unit_vector(a):
    """Unit vector ``u`` with ``u^H a = 0`` for a tall matrix ``a`` (M, S).

    When the left null space has dimension greater than one the choice is
    made by the degenerate-subspace rule of this module.
    """
    a = _as_matrix_stack(a)
    lead = a.shape[:-2]
    m, s = a.shape[-2:]
    flat = a.reshape((-1, m, s))
    u, sv, _ = np.linalg.svd(flat, full_matrices=True)
    out = np.empty((flat.shape[0], m), dtype=complex)
    for b in range(flat.shape[0]):
        smax = sv[b, 0] if sv.shape[-1] else 0.0
        rank = int(np.count_nonzero(sv[b] > NULL_TOL * smax)) if smax > 0 else 0
        if rank >= m:
            raise NoNullSpace(f"{m}x{s} matrix of rank {rank} has no left null space")
        out[b] = _pick_in_subspace(u[b][:, rank:])
    return canonical_phase(out).reshape(lead + (m,))


def hermitian_solve(phi, b):
    """Solve ``phi x = b`` for Hermitian positive-definite ``phi``.

    Parameters
    ----------
    phi : array_like, shape (..., n, n)
    b : array_like, shape (..., n)

    Raises
    ------
    NotPositiveDefinite
        If the smallest eigenvalue is not above ``1e-12 * ||phi||_2``.
    """
    phi = _as_matrix_stack(phi, "phi")
    b = np.asarray(b, dtype=complex)
    if phi.shape[-1] != phi.shape[-2] or b.shape[-1] != phi.shape[-1]:
        raise DimensionMismatch(f"incompatible shapes {phi.shape} and {b.shape}")
    w = np.linalg.eigvalsh(phi)
    if np.any(w[..., 0] <= PD_TOL * np.abs(w).max(axis=-1)):
        raise NotPositiveDefinite("matrix is not positive definite")
    return np.linalg.solve(phi, b[..., None])[..., 0]
