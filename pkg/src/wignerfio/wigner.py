"""Cross-Wigner and tau-Wigner transforms, time-frequency shifts, the
half-Wigner metaplectic operator and its inverse, and the kernel permutation.

Discretisation
--------------
The lag integral ``∫ f(x + t/2) conj(g(x - t/2)) e^{-2πi t xi} dt`` is
sampled at ``t = 2sΔ`` so that only on-grid samples of ``f`` and ``g`` enter:

    W(f, g)(x_j, xi_k) = 2Δ Σ_s f(x_{j+s}) conj(g(x_{j-s})) e^{-2πi s k / M}

with ``xi_k = k/(2L)``.  Samples with ``j ± s`` outside the window are zero.
The result is ``M``-periodic in ``k``; inputs are expected to be band limited
to ``|xi| < M/(4L)`` for the rule to be alias free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .grid import (
    Grid1D,
    GridMismatchError,
    PhaseSpaceGrid,
    SampledFunction,
    bandlimited_shift,
    check_same_grid,
)
from .tensorio import write_tensor


class OffGridShiftWarning(UserWarning):
    """A translation that is not a multiple of the grid spacing was interpolated."""


@dataclass(frozen=True)
class WignerField:
    """Values ``W(x_j, xi_k)`` on a :class:`PhaseSpaceGrid` (``M × M``)."""

    grid: PhaseSpaceGrid
    values: np.ndarray
    sources: tuple[str, str] = ("", "")
    tau: float = 0.5
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            raise GridMismatchError(f"field of shape {v.shape} on grid of shape {self.grid.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def integral(self) -> complex:
        return complex(self.values.sum() * self.grid.cell)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.grid.cell))

    def with_values(self, values) -> "WignerField":
        return WignerField(self.grid, values, self.sources, self.tau)

    def export(self, path, provenance: dict | None = None) -> dict:
        prov = {"sources": list(self.sources), "tau": self.tau, **(provenance or {})}
        return write_tensor(path, self.values, ("x", "xi"), (self.grid.x, self.grid.xi), prov)


def _field_from_lags(A: np.ndarray, grid: Grid1D, sources, tau=0.5) -> WignerField:
    # A[j, s mod M]; Σ_s A e^{-2πi s k/M} is an FFT over the lag axis
    M = grid.points
    W = 2 * grid.spacing * np.fft.fftshift(np.fft.fft(A, axis=1), axes=1)
    return WignerField(PhaseSpaceGrid(grid), W, sources, tau)


# --------------------------------------------------------------------------
# time-frequency shifts
# --------------------------------------------------------------------------


def tf_shift(f: SampledFunction, z) -> SampledFunction:
    """``π(z) f(t) = e^{2πi xi0 t} f(t - x0)`` with ``z = (x0, xi0)``.

    On-grid ``x0`` is an exact circular shift; other values are interpolated
    by a band-limited shift and flagged with :class:`OffGridShiftWarning`
    (``meta["interpolated"]`` is set on the result).
    """
    x0, xi0 = (float(c) for c in z)
    g = f.grid
    n = x0 / g.spacing
    interpolated = abs(n - round(n)) > 1e-9
    if interpolated:
        warnings.warn(f"translation {x0} is off-grid; using band-limited interpolation",
                      OffGridShiftWarning, stacklevel=2)
        v = bandlimited_shift(f.values, x0, g.spacing)
    else:
        v = np.roll(f.values, int(round(n)))
    v = np.exp(2j * np.pi * xi0 * g.x) * v
    out = SampledFunction(g, v, f"pi({x0},{xi0}){f.label}")
    out.meta["interpolated"] = interpolated
    return out


# --------------------------------------------------------------------------
# Wigner transforms
# --------------------------------------------------------------------------


def cross_wigner(f: SampledFunction, g: SampledFunction | None = None) -> WignerField:
    """Cross-Wigner distribution ``W(f, g)``; ``g`` defaults to ``f``."""
    g = f if g is None else g
    check_same_grid(f, g)
    if f.ndim != 1:
        raise GridMismatchError("cross_wigner expects 1-D sampled functions")
    A = _accel.lag_products(f.values, g.values)
    return _field_from_lags(A, f.grid, (f.label, g.label))


def tau_wigner(f: SampledFunction, g: SampledFunction, tau: float) -> WignerField:
    """``W_tau(f, g)(x, xi) = ∫ f(x + tau t) conj(g(x - (1-tau) t)) e^{-2πi xi t} dt``.

    Uses the same lag lattice ``t = 2sΔ`` and frequency axis as
    :func:`cross_wigner`; the off-lattice arguments ``x + tau t`` are
    resolved by band-limited interpolation and arguments outside the window
    count as zero.
    """
    check_same_grid(f, g)
    grid = f.grid
    M, dx = grid.points, grid.spacing
    lags = np.arange(-(M // 2), M // 2)
    t = 2 * dx * lags
    fs = bandlimited_shift(np.broadcast_to(f.values, (M, M)), -tau * t, dx)
    gs = bandlimited_shift(np.broadcast_to(g.values, (M, M)), (1 - tau) * t, dx)
    x = grid.x
    lo, hi = x[0] - 1e-9 * dx, x[-1] + 1e-9 * dx
    pf = x[None, :] + tau * t[:, None]
    pg = x[None, :] - (1 - tau) * t[:, None]
    ok = (pf >= lo) & (pf <= hi) & (pg >= lo) & (pg <= hi)
    A = np.where(ok, fs * np.conj(gs), 0).T  # (j, lag)
    A = np.roll(A, -(M // 2), axis=1)
    return _field_from_lags(A, grid, (f.label, g.label), tau)


# --------------------------------------------------------------------------
# the metaplectic operator Â_{1/2} and its inverse
# --------------------------------------------------------------------------


def apply_A_half(F: SampledFunction) -> WignerField:
    """``Â_{1/2}F(x, xi) = ∫ F(x + t/2, x - t/2) e^{-2πi xi t} dt`` (same rule as cross_wigner)."""
    if F.ndim != 2:
        raise GridMismatchError("apply_A_half expects a function on the square product grid")
    M = F.grid.points
    j = np.arange(M)[:, None]
    s = np.arange(-(M // 2), M // 2)[None, :]
    a, b = j + s, j - s
    ok = (a >= 0) & (a < M) & (b >= 0) & (b < M)
    A = np.where(ok, F.values[np.clip(a, 0, M - 1), np.clip(b, 0, M - 1)], 0)
    A = np.roll(A, -(M // 2), axis=1)
    return _field_from_lags(A, F.grid, (F.label, ""))


def apply_A_half_inverse(G: WignerField) -> SampledFunction:
    """``Â_{1/2}^{-1}G(a, b) = ∫ G((a+b)/2, y) e^{2πi(a-b) y} dy`` on the product grid.

    Pairs with ``a + b`` even have their midpoint on the grid and are exact
    inverses of :func:`apply_A_half`.  For odd ``a + b`` the midpoint is a
    half-cell point and ``G`` is interpolated there along ``x``.
    """
    grid = G.grid.grid
    M, L, dx = grid.points, grid.extent, grid.spacing
    half = bandlimited_shift(G.values, -dx / 2, dx, axis=0)  # rows at x_j + Δ/2
    rows = np.empty((2 * M - 1, M), dtype=complex)
    rows[0::2] = G.values
    rows[1::2] = half[:-1]
    # Σ_k G_h[k] e^{2πi n k/(2M)} for all n via a zero-padded length-2M inverse FFT
    k = np.arange(-(M // 2), M // 2)
    padded = np.zeros((2 * M - 1, 2 * M), dtype=complex)
    padded[:, k % (2 * M)] = rows
    S = np.fft.ifft(padded, axis=1) * (2 * M)
    a = np.arange(M)[:, None]
    b = np.arange(M)[None, :]
    F = S[a + b, (a - b) % (2 * M)] / (2 * L)
    return SampledFunction(grid, F, f"A^-1[{G.sources[0]}]")


# --------------------------------------------------------------------------
# the kernel permutation  T_p F(x, xi, y, eta) = F(x, y, xi, -eta)
# --------------------------------------------------------------------------

WIGNER2_AXES = ("x", "y", "xi", "eta")
KERNEL_AXES = ("x", "xi", "y", "eta")


def permute_Tp(values: np.ndarray, axes, coords=None, periodic_eta: bool = False):
    """Apply ``T_p F(x, xi, y, eta) = F(x, y, xi, -eta)``.

    ``values`` is tagged with ``axes``: either the two-variable Wigner layout
    ``("x", "y", "xi", "eta")`` (mapped to kernel layout) or the kernel layout
    (mapped back).  The reflected axis is reversed, so its coordinates become
    ``-coords[::-1]``; with ``periodic_eta`` the axis is instead treated as
    ``M``-periodic and reflected in place (``k -> -k mod M``).

    Returns ``(values, axes, coords)``.
    """
    axes = tuple(axes)
    if axes == WIGNER2_AXES:
        new_axes = KERNEL_AXES
    elif axes == KERNEL_AXES:
        new_axes = WIGNER2_AXES
    else:
        raise ValueError(f"permute_Tp needs tagged axes {WIGNER2_AXES} or {KERNEL_AXES}, got {axes}")
    out = np.swapaxes(np.asarray(values), 1, 2)
    new_coords = None
    if coords is not None:
        c = list(coords)
        new_coords = [c[0], c[2], c[1], c[3]]
    if periodic_eta:
        M = out.shape[3]
        out = out[..., (M - np.arange(M)) % M]
    else:
        out = out[..., ::-1]
        if new_coords is not None:
            new_coords[3] = -np.asarray(new_coords[3])[::-1]
    return np.ascontiguousarray(out), new_axes, new_coords
