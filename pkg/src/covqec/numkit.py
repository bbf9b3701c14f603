"""Dense complex linear algebra and the distance/fidelity calculus.

Everything here works on plain ``numpy`` arrays.  Subsystem shapes are tuples
of positive integers and subsystem indices are zero-based.

Notes
-----
Matrix square roots are taken through a Hermitian eigendecomposition only.
Eigenvalues in ``[-PSD_TOL, 0)`` are clamped to zero; anything more negative is
rejected as a non-PSD input.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

PSD_TOL = 1e-10
TRACE_TOL = 1e-9
HERMITIAN_RTOL = 1e-12
MAX_ENTRIES = 2**24

__all__ = [
    "MAX_ENTRIES",
    "PSD_TOL",
    "as_matrix",
    "check_hermitian",
    "kron",
    "partial_trace",
    "trace_norm",
    "operator_norm",
    "trace_distance",
    "psd_sqrt",
    "psd_eigh",
    "fidelity",
    "root_fidelity",
    "purified_distance",
    "infidelity_from_f",
    "random_density_matrix",
    "random_unitary",
]


def as_matrix(m, hermitian: bool = False) -> np.ndarray:
    """Validate and return ``m`` as a finite complex 2-d array.

    Parameters
    ----------
    m : array_like
        Input matrix.
    hermitian : bool, optional
        If set, additionally require ``max|M - M^dagger| <= 1e-12 max|M|``.
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if hermitian:
        check_hermitian(a)
    return a


def check_hermitian(a: np.ndarray, rtol: float = HERMITIAN_RTOL) -> None:
    if a.shape[0] != a.shape[1]:
        raise ValueError("Hermitian matrix must be square")
    scale = np.abs(a).max() if a.size else 0.0
    if np.abs(a - a.conj().T).max(initial=0.0) > rtol * max(scale, 1e-300):
        raise ValueError("matrix is not Hermitian within tolerance")


def kron(a, b, max_entries: int = MAX_ENTRIES) -> np.ndarray:
    """Tensor product ``a (x) b``.

    Raises
    ------
    OverflowError
        If the result would hold more than ``max_entries`` entries.
    """
    a = as_matrix(a)
    b = as_matrix(b)
    n = a.shape[0] * b.shape[0] * a.shape[1] * b.shape[1]
    if n > max_entries:
        raise OverflowError(f"kron result with {n} entries exceeds limit {max_entries}")
    return np.kron(a, b)


def partial_trace(m, shape: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Square operator on ``prod(shape)`` dimensions.
    shape : sequence of int
        Subsystem dimensions ``d_0, ..., d_{n-1}``.
    keep : iterable of int
        Zero-based indices of the subsystems to keep.  The output orders them
        increasingly.

    Returns
    -------
    numpy.ndarray
        Operator on the tensor product of the kept subsystems.
    """
    m = as_matrix(m)
    dims = tuple(int(d) for d in shape)
    if any(d <= 0 for d in dims):
        raise ValueError("subsystem dimensions must be positive")
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match subsystem shape {dims}")
    keep = sorted(set(int(k) for k in keep))
    n = len(dims)
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"subsystem index {k} out of range for {n} subsystems")
    drop = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    # contract each dropped pair of axes; einsum keeps this a single pass
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    if 2 * n > len(letters):
        raise ValueError("too many subsystems for partial_trace")
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for i in drop:
        col[i] = row[i]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    res = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    kd = int(np.prod([dims[i] for i in keep])) if keep else 1
    return res.reshape(kd, kd)


def trace_norm(m) -> float:
    """Sum of singular values."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False).sum())


def operator_norm(m) -> float:
    """Largest singular value."""
    m = as_matrix(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.svd(m, compute_uv=False)[0])


def trace_distance(rho, sigma) -> float:
    """``||rho - sigma||_1 / 2``."""
    return 0.5 * trace_norm(np.asarray(rho) - np.asarray(sigma))


def psd_eigh(m, tol: float = PSD_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a PSD matrix with clamping of tiny negative values."""
    m = as_matrix(m)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.size and w.min() < -tol * scale:
        raise ValueError(f"matrix is not PSD: smallest eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None), v


def psd_sqrt(m, tol: float = PSD_TOL) -> np.ndarray:
    w, v = psd_eigh(m, tol)
    return (v * np.sqrt(w)) @ v.conj().T


def root_fidelity(p, s, tol: float = PSD_TOL) -> float:
    """``tr sqrt(sqrt(p) s sqrt(p))`` for PSD ``p, s`` of any trace."""
    w, v = psd_eigh(p, tol)
    keep = w > 0
    if not np.any(keep):
        return 0.0
    half = v[:, keep] * np.sqrt(w[keep])
    inner = half.conj().T @ as_matrix(s) @ half
    lam, _ = psd_eigh(inner, tol)
    return float(np.sqrt(lam).sum())


def _check_state(m, name):
    tr = np.trace(m).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"{name} has trace {tr}, expected 1")


def fidelity(rho, sigma) -> float:
    """Root fidelity ``F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1``.

    Both inputs must be density matrices: PSD within ``1e-10`` and of unit
    trace within ``1e-9``.  The result is clipped to ``[0, 1]``.

    Examples
    --------
    >>> fidelity(np.diag([0.7, 0.3]), np.diag([0.4, 0.6]))  # doctest: +ELLIPSIS
    0.9...
    """
    rho = as_matrix(rho)
    sigma = as_matrix(sigma)
    _check_state(rho, "rho")
    _check_state(sigma, "sigma")
    return float(min(1.0, max(0.0, root_fidelity(rho, sigma))))


def infidelity_from_f(f: float) -> float:
    """``sqrt(1 - f^2)`` evaluated as ``sqrt((1-f)(1+f))``, clamped at 0."""
    f = min(1.0, max(0.0, float(f)))
    return float(np.sqrt(max(0.0, (1.0 - f) * (1.0 + f))))


def purified_distance(rho, sigma) -> float:
    """``sqrt(1 - F(rho, sigma)^2)``."""
    return infidelity_from_f(fidelity(rho, sigma))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density_matrix(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    k = d if rank is None else rank
    g = rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real
