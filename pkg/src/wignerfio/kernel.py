"""Wigner kernels of type I / type II operators and the checks built on them.

A kernel ``k(x, xi, y, eta)`` is stored with axes ``(x, xi, y, eta)`` on a
:class:`PhaseSpaceGrid` (the same grid for ``z = (x, xi)`` and
``w = (y, eta)``), so that

    W(Tf, Tg)(z) ≈ Σ_w k(z, w) W(f, g)(w) · cell.

Two independent routes are provided.

``direct``
    The oscillatory integral over ``(t, r)`` with integrand
    ``G(x + t/2, eta + r/2) conj G(x - t/2, eta - r/2)``, where
    ``G = e^{2πi Phi} sigma`` is tabulated on a half-step lattice.  Each
    ``(x, eta)`` slice is a lag product followed by two explicit DFTs.
``schwartz``
    The discrete Schwartz kernel on a fine grid, its two-variable Wigner
    transform and the permutation ``T_p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .fio import OperatorSpec, SchwartzKernelMatrix, schwartz_kernel
from .grid import Grid1D, GridMismatchError, PhaseSpaceGrid
from .symbols import CertificationError
from .tensorio import write_tensor
from .wigner import KERNEL_AXES, WIGNER2_AXES, WignerField, permute_Tp

#: largest kernel grid accepted per axis
MAX_KERNEL_M = 48
#: default budget for one kernel tensor, bytes
MEMORY_BUDGET = 256 * 2**20
#: working-set budget for a chunk of lag products, bytes
CHUNK_BYTES = 64 * 2**20
#: relative level below which |sigma_I| is treated as zero
TRUNCATION_TOL = 1e-14


class KernelMemoryError(MemoryError):
    pass


def kernel_grid(extent: float = 4.0, points: int = 32) -> PhaseSpaceGrid:
    """Default kernel grid: ``x`` and ``xi`` both step 1/8 on ``[-2, 2)``."""
    return PhaseSpaceGrid(Grid1D(extent, points))


def _guard(grid: PhaseSpaceGrid, budget: int | None = None):
    M = grid.grid.points
    if M > MAX_KERNEL_M:
        raise KernelMemoryError(f"kernel grid M={M} exceeds the supported maximum {MAX_KERNEL_M}")
    need = 16 * M**4
    if need > (budget or MEMORY_BUDGET):
        raise KernelMemoryError(f"kernel tensor needs {need / 2**20:.0f} MiB, budget is "
                                f"{(budget or MEMORY_BUDGET) / 2**20:.0f} MiB")


@dataclass(frozen=True)
class WignerKernel4D:
    """Complex tensor ``k(x, xi, y, eta)`` with grid and provenance."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    provenance: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        M = self.grid.grid.points
        if v.shape != (M, M, M, M):
            raise GridMismatchError(f"kernel of shape {v.shape} on {M}-point grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape

    def matrix(self) -> np.ndarray:
        """``(M², M²)`` view with rows ``z = (x, xi)`` and columns ``w = (y, eta)``."""
        M = self.grid.grid.points
        return self.values.reshape(M * M, M * M)

    def with_values(self, values, **prov) -> "WignerKernel4D":
        return WignerKernel4D(self.grid, values, {**self.provenance, **prov})

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def export(self, path) -> dict:
        g = self.grid
        return write_tensor(path, self.values, KERNEL_AXES, (g.x, g.xi, g.x, g.xi), self.provenance)


def rel_sup_diff(a, b) -> float:
    """``sup |a - b| / sup |b|`` for kernels, fields or arrays."""
    va = getattr(a, "values", a)
    vb = getattr(b, "values", b)
    return float(np.max(np.abs(va - vb)) / np.max(np.abs(vb)))


# --------------------------------------------------------------------------
# explicit kernels
# --------------------------------------------------------------------------


def identity_kernel(grid: PhaseSpaceGrid) -> WignerKernel4D:
    """``delta_{z-w}`` on the grid: ``1/cell`` on the diagonal."""
    M = grid.grid.points
    K = (np.eye(M * M) / grid.cell).reshape(M, M, M, M)
    return WignerKernel4D(grid, K, {"route": "explicit", "kind": "identity"})


def graph_kernel(grid: PhaseSpaceGrid, chi, tol: float = 1e-9) -> WignerKernel4D:
    """``delta_{z-chi(w)}`` for a map sending grid points to grid points.

    Columns ``w`` whose image is off-grid or outside the window are zero.
    """
    M = grid.grid.points
    Y, E = grid.mesh()
    w = np.stack([Y.ravel(), E.ravel()], axis=-1)
    z = chi(w)
    ix = (z[:, 0] - grid.x[0]) / grid.dx
    ik = (z[:, 1] - grid.xi[0]) / grid.dxi
    jx, jk = np.rint(ix).astype(int), np.rint(ik).astype(int)
    ok = (np.abs(ix - jx) < tol) & (np.abs(ik - jk) < tol) & (jx >= 0) & (jx < M) & (jk >= 0) & (jk < M)
    K = np.zeros((M * M, M * M), dtype=complex)
    cols = np.nonzero(ok)[0]
    K[jx[ok] * M + jk[ok], cols] = 1.0 / grid.cell
    return WignerKernel4D(grid, K.reshape(M, M, M, M), {"route": "explicit", "kind": "graph",
                                                         "map": getattr(chi, "label", "")})


# --------------------------------------------------------------------------
# lag-product transform shared by both routes
# --------------------------------------------------------------------------


def _lag_transform(G, ia, ib, S, U, Ea, Eb, scale, backend=None):
    """``out[p, i, j] = scale Σ_{s,u} G[ia+s, ib+u] conj G[ia-s, ib-u] Ea[i, s] Eb[j, u]``."""
    n = len(ia)
    per = 16 * (2 * S) * (2 * U) * 2
    chunk = max(1, CHUNK_BYTES // per)
    out = np.empty((n, Ea.shape[0], Eb.shape[0]), dtype=complex)
    EbT = np.ascontiguousarray(Eb.T)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        A = _accel.lag_products_2d(G, ia[lo:hi], ib[lo:hi], S, U, backend)
        out[lo:hi] = np.matmul(np.matmul(Ea, A), EbT)
    return out * scale


def _dft(freqs, lags, step, sign=-1.0):
    return np.exp(sign * 2j * np.pi * np.outer(freqs, np.arange(-lags, lags) * step))


def _round_up(n: int, q: int) -> int:
    return int(q * math.ceil(n / q))


def _symbol_box(symbol, x, eta, ht, hr, tol, max_lag, quantum_t, quantum_r):
    """Smallest lag box outside of which ``|sigma_I| < tol · peak`` on all slices.

    The box is grown in quanta (so pure-phase integrands see whole periods)
    up to ``max_lag``.  If the symbol has not decayed by then, a single
    quantum is returned and ``truncated`` is set.  Returns
    ``(S, U, radius_t, radius_r, truncated)``.
    """
    X, E = np.meshgrid(x, eta, indexing="ij")
    peak = float(np.max(np.abs(symbol(np.stack([X, E], -1))) ** 2))
    S, U = quantum_t, quantum_r
    xs = x[:, None, None]
    es = eta[None, :, None]

    def edge_max(S, U):
        # |sigma_I| on the boundary of the lag box, over all slices
        t = np.arange(-S, S + 1) * ht
        r = np.arange(-U, U + 1) * hr
        vals = []
        for tt, rr in ((t, np.full_like(t, -U * hr)), (t, np.full_like(t, U * hr)),
                       (np.full_like(r, -S * ht), r), (np.full_like(r, S * ht), r)):
            zp = np.stack(np.broadcast_arrays(xs + tt / 2, es + rr / 2), -1)
            zm = np.stack(np.broadcast_arrays(xs - tt / 2, es - rr / 2), -1)
            vals.append(np.max(np.abs(symbol(zp) * np.conj(symbol(zm)))))
        return max(vals)

    while True:
        m = edge_max(S, U)
        if m < tol * peak:
            return S, U, S * ht, U * hr, False
        if S >= max_lag and U >= max_lag:
            if m < 1e-3 * peak:
                # decaying but cut at the radius cap
                return S, U, S * ht, U * hr, True
            # no decay: a non-decaying symbol gives a distributional kernel;
            # one output period per axis turns pure phases into grid deltas
            return quantum_t, quantum_r, quantum_t * ht, quantum_r * hr, True
        S = min(max_lag, S + quantum_t)
        U = min(max_lag, U + quantum_r)


def _resolve_grid(grid):
    if grid is None:
        return kernel_grid()
    if isinstance(grid, Grid1D):
        return PhaseSpaceGrid(grid)
    return grid


def _check_order(spec: OperatorSpec, strict: bool):
    spec.certify()
    if strict and not spec.symbol.order < 0:
        raise CertificationError(f"direct kernel route needs a symbol of negative order, "
                                 f"got m={spec.symbol.order} (pass strict=False for delta-type kernels)")


def kernel_type1_direct(spec: OperatorSpec, grid: PhaseSpaceGrid | None = None, refine: int = 1,
                        tol: float = TRUNCATION_TOL, max_radius: float = 32.0, strict: bool = True,
                        backend: str | None = None) -> WignerKernel4D:
    """Kernel of a type-I operator from the ``(t, r)`` oscillatory integral.

    ``t`` runs on step ``Δx/refine`` and ``r`` on step ``Δxi/refine``; the box
    is truncated where ``|sigma_I|`` drops below ``tol`` of its peak (capped
    at ``max_radius``), in whole multiples of the output periods.
    """
    if spec.kind == "type-II":
        raise ValueError("kernel_type1_direct expects a type-I or pseudodifferential spec")
    _check_order(spec, strict)
    grid = _resolve_grid(grid)
    _guard(grid)
    x, xi = grid.x, grid.xi
    M = len(x)
    ht, hr = grid.dx / refine, grid.dxi / refine
    # one period of e^{-2πi xi t} on the xi grid is 1/dxi in t
    qt = max(1, int(round(1 / (grid.dxi * ht))) // 2)
    qr = max(1, int(round(1 / (grid.dx * hr))) // 2)
    max_lag = int(max_radius / min(ht, hr))
    S, U, Rt, Rr, trunc = _symbol_box(spec.symbol, x, xi, ht, hr, tol, max_lag, qt, qr)
    # table of G = e^{2πi Phi} sigma on the half-step lattice
    a = np.arange(x[0] - S * ht / 2, x[-1] + S * ht / 2 + ht / 4, ht / 2)
    b = np.arange(xi[0] - U * hr / 2, xi[-1] + U * hr / 2 + hr / 4, hr / 2)
    A, B = np.meshgrid(a, b, indexing="ij")
    Z = np.stack([A, B], -1)
    G = np.exp(2j * np.pi * spec.phase(Z)) * spec.symbol(Z)
    ia0 = S  # x[0] sits at index S on the a-lattice
    ib0 = U
    jx = ia0 + 2 * refine * np.arange(M)
    jk = ib0 + 2 * refine * np.arange(M)
    IA, IB = np.meshgrid(jx, jk, indexing="ij")
    Ea = _dft(xi, S, ht)
    Eb = _dft(x, U, hr)
    out = _lag_transform(G, IA.ravel(), IB.ravel(), S, U, Ea, Eb, ht * hr, backend)
    K = out.reshape(M, M, M, M).transpose(0, 2, 3, 1)  # (x, eta, xi, y) -> (x, xi, y, eta)
    prov = {"route": "direct-I", "spec": _spec_record(spec), "refine": refine,
            "box_radius": [Rt, Rr], "box_lags": [S, U], "truncated": trunc, "tol": tol}
    return WignerKernel4D(grid, np.ascontiguousarray(K), prov)


def kernel_type2_direct(spec: OperatorSpec, grid: PhaseSpaceGrid | None = None, refine: int = 1,
                        tol: float = TRUNCATION_TOL, max_radius: float = 32.0, strict: bool = True,
                        backend: str | None = None) -> WignerKernel4D:
    """Kernel of a type-II operator, one ``(y, xi)`` slice at a time.

    The integrand is ``G(y + r/2, xi + t/2) conj G(y - r/2, xi - t/2)`` with
    ``G = e^{-2πi Phi} tau``, transformed against ``e^{2πi (t x + r eta)}``.
    """
    if spec.kind != "type-II":
        raise ValueError("kernel_type2_direct expects a type-II spec")
    _check_order(spec, strict)
    grid = _resolve_grid(grid)
    _guard(grid)
    x, xi = grid.x, grid.xi
    M = len(x)
    hr, ht = grid.dx / refine, grid.dxi / refine  # r pairs with y, t with xi
    qr = max(1, int(round(1 / (grid.dxi * hr))) // 2)
    qt = max(1, int(round(1 / (grid.dx * ht))) // 2)
    max_lag = int(max_radius / min(ht, hr))
    U, S, Rr, Rt, trunc = _symbol_box(spec.symbol, x, xi, hr, ht, tol, max_lag, qr, qt)
    a = np.arange(x[0] - U * hr / 2, x[-1] + U * hr / 2 + hr / 4, hr / 2)
    b = np.arange(xi[0] - S * ht / 2, xi[-1] + S * ht / 2 + ht / 4, ht / 2)
    A, B = np.meshgrid(a, b, indexing="ij")
    Z = np.stack([A, B], -1)
    G = np.exp(-2j * np.pi * spec.phase(Z)) * spec.symbol(Z)
    jy = U + 2 * refine * np.arange(M)
    jk = S + 2 * refine * np.arange(M)
    IA, IB = np.meshgrid(jy, jk, indexing="ij")
    Ea = _dft(xi, U, hr, sign=+1.0)  # e^{2πi eta r}
    Eb = _dft(x, S, ht, sign=+1.0)  # e^{2πi x t}
    out = _lag_transform(G, IA.ravel(), IB.ravel(), U, S, Ea, Eb, ht * hr, backend)
    K = out.reshape(M, M, M, M).transpose(3, 1, 0, 2)  # (y, xi, eta, x) -> (x, xi, y, eta)
    prov = {"route": "direct-II", "spec": _spec_record(spec), "refine": refine,
            "box_radius": [Rt, Rr], "box_lags": [S, U], "truncated": trunc, "tol": tol}
    return WignerKernel4D(grid, np.ascontiguousarray(K), prov)


def _spec_record(spec) -> dict:
    try:
        return spec.to_dict()
    except ValueError:
        return {"label": spec.label}


# --------------------------------------------------------------------------
# Schwartz-kernel route
# --------------------------------------------------------------------------


def fine_grid_for(grid: PhaseSpaceGrid, refine: int = 1, extent: float = 16.0) -> Grid1D:
    """Internal grid for the Schwartz route: spacing ``Δx/(2 refine)``."""
    step = grid.dx / (2 * refine)
    M = int(round(extent / step))
    M += M % 2
    return Grid1D(M * step, M)


def kernel_via_schwartz(spec, grid: PhaseSpaceGrid | None = None, refine: int = 1,
                        fine: Grid1D | None = None, tol: float = TRUNCATION_TOL,
                        backend: str | None = None) -> WignerKernel4D:
    """``k = T_p W k_T``: the two-variable Wigner transform of the Schwartz kernel.

    ``spec`` is an :class:`OperatorSpec` or a ready :class:`SchwartzKernelMatrix`
    (for example the product of two kernels).  The lag steps are
    ``2 δ = Δx/refine`` on the fine grid of spacing ``δ``.
    """
    grid = _resolve_grid(grid)
    _guard(grid)
    if isinstance(spec, SchwartzKernelMatrix):
        kt = spec
        fine = kt.grid
        rec = {"label": kt.label}
    else:
        spec.certify()
        fine = fine or fine_grid_for(grid, refine)
        kt = schwartz_kernel(spec, fine)
        rec = _spec_record(spec)
    delta = fine.spacing
    h = 2 * delta
    x, xi = grid.x, grid.xi
    M = len(x)
    ix = (x - fine.x[0]) / delta
    if np.max(np.abs(ix - np.rint(ix))) > 1e-9:
        raise GridMismatchError("kernel grid points must lie on the fine grid")
    ix = np.rint(ix).astype(int)
    Mf = fine.points
    room = int(min(ix.min(), Mf - 1 - ix.max()))
    # lags needed: where |k_T| is above tol of its max, quantised to whole periods
    Kv = kt.values
    mag = np.abs(Kv)
    rows, cols = np.nonzero(mag >= tol * mag.max())
    need1 = int(np.max(np.abs(rows[:, None] - ix[None, :]))) + 1
    need2 = int(np.max(np.abs(cols[:, None] - ix[None, :]))) + 1
    q = max(1, int(round(1 / (grid.dxi * h))) // 2)
    S1 = min(_round_up(need1, q), (room // q) * q)
    S2 = min(_round_up(need2, q), (room // q) * q)
    eta_rev = -xi[::-1]
    IA, IB = np.meshgrid(ix, ix, indexing="ij")
    Ea = _dft(xi, S1, h)
    Eb = _dft(eta_rev, S2, h)
    out = _lag_transform(Kv, IA.ravel(), IB.ravel(), S1, S2, Ea, Eb, h * h, backend)
    W2 = out.reshape(M, M, M, M)  # (x, y, xi, eta') with eta' ascending over -eta
    K, axes, coords = permute_Tp(W2, WIGNER2_AXES, (x, x, xi, eta_rev))
    assert axes == KERNEL_AXES and np.allclose(coords[3], xi)
    prov = {"route": "schwartz", "spec": rec, "refine": refine, "fine_grid": fine.to_dict(),
            "box_lags": [S1, S2], "box_radius": [S1 * h, S2 * h], "tol": tol}
    return WignerKernel4D(grid, K, prov)


# --------------------------------------------------------------------------
# kernel algebra
# --------------------------------------------------------------------------


def _same(a, b):
    if a.grid != b.grid:
        raise GridMismatchError("kernel grids differ")


def evolve_wigner(k: WignerKernel4D, W: WignerField) -> WignerField:
    """``(kW)(z) = Σ_w k(z, w) W(w) · cell``."""
    if W.grid != k.grid:
        raise GridMismatchError("field and kernel grids differ")
    M = k.grid.grid.points
    out = (k.matrix() @ W.values.ravel()) * k.grid.cell
    return WignerField(k.grid, out.reshape(M, M), W.sources, W.tau, {"evolved": True})


def compose_kernels(k1: WignerKernel4D, k2: WignerKernel4D) -> WignerKernel4D:
    """``k12(z, u) = Σ_w k1(z, w) k2(w, u) · cell``."""
    _same(k1, k2)
    M = k1.grid.grid.points
    K = (k1.matrix() @ k2.matrix()) * k1.grid.cell
    prov = {"route": "composed", "left": k1.provenance, "right": k2.provenance}
    return WignerKernel4D(k1.grid, K.reshape(M, M, M, M), prov)


def adjoint_kernel(k: WignerKernel4D) -> WignerKernel4D:
    """``k~(z, w) = k(w, z)``: an exact axis swap."""
    K = np.ascontiguousarray(k.values.transpose(2, 3, 0, 1))
    return WignerKernel4D(k.grid, K, {**k.provenance, "adjoint": not k.provenance.get("adjoint", False)})
