"""Hot inner loops, with a numba path and a pure-numpy path.

The backend is chosen once at import time from ``WIGNERFIO_BACKEND``
(``numba`` or ``numpy``); numba is used when available and not disabled.
Both paths produce the same values up to floating-point reassociation;
per-row sums are serial in both, so results do not depend on scheduling.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_requested = os.environ.get("WIGNERFIO_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    raise ValueError(f"WIGNERFIO_BACKEND must be 'numba' or 'numpy', got {_requested!r}")
BACKEND = "numba" if (_requested == "numba" and numba is not None) else "numpy"

if numba is not None:
    # skip the TBB probe (and its version warning) unless nothing else exists
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------


def _lag_products_np(f, g):
    M = f.shape[0]
    j = np.arange(M)[:, None]
    s = np.arange(-(M // 2), M // 2)[None, :]
    a, b = j + s, j - s
    ok = (a >= 0) & (a < M) & (b >= 0) & (b < M)
    out = np.where(ok, f[np.clip(a, 0, M - 1)] * np.conj(g[np.clip(b, 0, M - 1)]), 0)
    # column c holds lag s = c - M/2; reorder so column index == s mod M
    return np.roll(out, -(M // 2), axis=1).astype(complex)


def _lag_products_2d_np(K, ia, ib, S, U):
    Ma, Mb = K.shape
    s = np.arange(-S, S)[None, :, None]
    u = np.arange(-U, U)[None, None, :]
    ia = np.asarray(ia)[:, None, None]
    ib = np.asarray(ib)[:, None, None]
    ap, bp, am, bm = ia + s, ib + u, ia - s, ib - u
    ok = (ap >= 0) & (ap < Ma) & (bp >= 0) & (bp < Mb) & (am >= 0) & (am < Ma) & (bm >= 0) & (bm < Mb)
    plus = K[np.clip(ap, 0, Ma - 1), np.clip(bp, 0, Mb - 1)]
    minus = K[np.clip(am, 0, Ma - 1), np.clip(bm, 0, Mb - 1)]
    return np.where(ok, plus * np.conj(minus), 0).astype(complex)


def _oscillatory_rowsum_np(P, S, v):
    return np.sum(np.exp(2j * np.pi * P) * S * v[None, :], axis=1)


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _lag_products_nb(f, g):
        M = f.shape[0]
        out = np.zeros((M, M), dtype=np.complex128)
        for j in range(M):
            smax = min(j, M - 1 - j)
            for s in range(-smax, smax + 1):
                out[j, s % M] = f[j + s] * np.conj(g[j - s])
        return out

    @numba.njit(cache=True, nogil=True, parallel=True)
    def _lag_products_2d_nb(K, ia, ib, S, U):
        Ma, Mb = K.shape
        n = ia.shape[0]
        out = np.zeros((n, 2 * S, 2 * U), dtype=np.complex128)
        # slices are independent; each writes only its own block
        for p in numba.prange(n):
            a0 = ia[p]
            b0 = ib[p]
            for si in range(2 * S):
                s = si - S
                ap = a0 + s
                am = a0 - s
                if ap < 0 or ap >= Ma or am < 0 or am >= Ma:
                    continue
                for ui in range(2 * U):
                    u = ui - U
                    bp = b0 + u
                    bm = b0 - u
                    if bp < 0 or bp >= Mb or bm < 0 or bm >= Mb:
                        continue
                    out[p, si, ui] = K[ap, bp] * np.conj(K[am, bm])
        return out

    @numba.njit(cache=True, nogil=True)
    def _oscillatory_rowsum_nb(P, S, v):
        n, m = P.shape
        out = np.zeros(n, dtype=np.complex128)
        tau = 2.0 * np.pi
        for j in range(n):
            acc = 0.0 + 0.0j
            for k in range(m):
                ph = tau * P[j, k]
                acc += complex(np.cos(ph), np.sin(ph)) * S[j, k] * v[k]
            out[j] = acc
        return out


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------


def set_threads(n: int | None) -> int:
    """Cap the numba worker count; returns the count in effect."""
    if numba is None:
        return 1
    if n:
        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
    return int(numba.get_num_threads())


def _use_numba(backend: str | None) -> bool:
    b = backend or BACKEND
    if b not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {b!r}")
    # an explicit numba request falls back to numpy when numba is missing
    return b == "numba" and numba is not None


def lag_products(f: np.ndarray, g: np.ndarray, backend: str | None = None) -> np.ndarray:
    """``A[j, s mod M] = f[j+s] conj(g[j-s])``; lags leaving the window are 0."""
    f = np.ascontiguousarray(f, dtype=np.complex128)
    g = np.ascontiguousarray(g, dtype=np.complex128)
    if _use_numba(backend):
        return _lag_products_nb(f, g)
    return _lag_products_np(f, g)


def lag_products_2d(K: np.ndarray, ia, ib, S: int, U: int, backend: str | None = None) -> np.ndarray:
    """``A[p, s+S, u+U] = K[ia_p+s, ib_p+u] conj(K[ia_p-s, ib_p-u])``.

    ``s`` runs over ``[-S, S)`` and ``u`` over ``[-U, U)``; any index leaving
    the table gives 0.  This is the lag product of the two-variable Wigner
    transform evaluated at the table points ``(ia_p, ib_p)``.
    """
    K = np.ascontiguousarray(K, dtype=np.complex128)
    ia = np.ascontiguousarray(ia, dtype=np.int64)
    ib = np.ascontiguousarray(ib, dtype=np.int64)
    if _use_numba(backend):
        return _lag_products_2d_nb(K, ia, ib, int(S), int(U))
    return _lag_products_2d_np(K, ia, ib, int(S), int(U))


def oscillatory_rowsum(P: np.ndarray, S: np.ndarray, v: np.ndarray, backend: str | None = None) -> np.ndarray:
    """``out[j] = Σ_k exp(2πi P[j,k]) S[j,k] v[k]``, one serial sum per row."""
    P = np.ascontiguousarray(P, dtype=np.float64)
    S = np.ascontiguousarray(np.broadcast_to(S, P.shape), dtype=np.complex128)
    v = np.ascontiguousarray(v, dtype=np.complex128)
    if _use_numba(backend):
        return _oscillatory_rowsum_nb(P, S, v)
    return _oscillatory_rowsum_np(P, S, v)
