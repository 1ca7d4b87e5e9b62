"""Uniform grids, sampled functions, the unitary Fourier convention and weights.

All grids are centred windows ``[-L/2, L/2)`` sampled at ``M`` points.  The
frequency grid of a window of length ``L`` has spacing ``1/L``; the Wigner
frequency axis (used by :mod:`wignerfio.wigner`) has spacing ``1/(2L)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidGridError(ValueError):
    """Raised for grids with an odd, too small or otherwise unusable size."""


class GridMismatchError(ValueError):
    """Raised when two sampled objects do not live on the same grid."""


@dataclass(frozen=True)
class Grid1D:
    """Centred uniform grid ``x_j = -L/2 + j*L/M``, ``j = 0..M-1``."""

    extent: float
    points: int

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 4 or self.points % 2:
            raise InvalidGridError(f"grid needs an even point count >= 4, got {self.points}")
        if not self.extent > 0:
            raise InvalidGridError(f"grid extent must be positive, got {self.extent}")
        object.__setattr__(self, "points", int(self.points))
        object.__setattr__(self, "extent", float(self.extent))

    @property
    def spacing(self) -> float:
        return self.extent / self.points

    @property
    def x(self) -> np.ndarray:
        return -self.extent / 2 + self.spacing * np.arange(self.points)

    @property
    def xi(self) -> np.ndarray:
        """Fourier samples ``k/L`` for ``k = -M/2 .. M/2-1``."""
        return np.arange(-self.points // 2, self.points // 2) / self.extent

    @property
    def wigner_xi(self) -> np.ndarray:
        """Wigner-axis samples ``k/(2L)`` for ``k = -M/2 .. M/2-1``."""
        return np.arange(-self.points // 2, self.points // 2) / (2 * self.extent)

    def frequency_grid(self) -> "Grid1D":
        """The grid on which :func:`fourier` returns its samples."""
        return Grid1D(self.points / self.extent, self.points)

    def index_of(self, x: float, tol: float = 1e-9) -> int:
        """Index of an on-grid coordinate; raises if ``x`` is off-lattice."""
        j = (x + self.extent / 2) / self.spacing
        jr = int(round(j))
        if abs(j - jr) > tol or not 0 <= jr < self.points:
            raise InvalidGridError(f"{x} is not a sample of {self}")
        return jr

    def to_dict(self) -> dict:
        return {"extent": self.extent, "points": self.points}


def make_grid(extent: float, points: int) -> Grid1D:
    return Grid1D(extent, points)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Lattice of phase-space points ``z = (x, xi)`` built from a spatial grid.

    The position axis is ``grid.x``.  The frequency axis is the Wigner axis
    ``k/(2L)`` (``wigner=True``, the default) or the Fourier axis ``k/L``.
    """

    grid: Grid1D
    wigner: bool = True

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def xi(self) -> np.ndarray:
        return self.grid.wigner_xi if self.wigner else self.grid.xi

    @property
    def dx(self) -> float:
        return self.grid.spacing

    @property
    def dxi(self) -> float:
        return 1 / (2 * self.grid.extent) if self.wigner else 1 / self.grid.extent

    @property
    def cell(self) -> float:
        return self.dx * self.dxi

    @property
    def shape(self) -> tuple[int, int]:
        return (self.grid.points, self.grid.points)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.xi, indexing="ij")

    def to_dict(self) -> dict:
        return {"grid": self.grid.to_dict(), "wigner": self.wigner}


@dataclass(frozen=True)
class SampledFunction:
    """Complex samples on a :class:`Grid1D` (1-D) or on the product grid (2-D)."""

    grid: Grid1D
    values: np.ndarray
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        M = self.grid.points
        if v.shape not in ((M,), (M, M)):
            raise GridMismatchError(f"values of shape {v.shape} do not match {M}-point grid")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def ndim(self) -> int:
        return self.values.ndim

    def norm(self) -> float:
        """Discrete L2 norm with cell measure ``spacing`` per axis."""
        dx = self.grid.spacing**self.ndim
        return float(np.sqrt(dx * np.sum(np.abs(self.values) ** 2)))

    def inner(self, other: "SampledFunction") -> complex:
        """``<self, other>``, conjugate-linear in ``other``."""
        check_same_grid(self, other)
        dx = self.grid.spacing**self.ndim
        return complex(dx * np.vdot(other.values, self.values))

    def boundary_max(self) -> float:
        v = np.abs(self.values)
        if v.ndim == 1:
            return float(max(v[0], v[-1]))
        return float(max(v[0].max(), v[-1].max(), v[:, 0].max(), v[:, -1].max()))

    def with_values(self, values, label: str | None = None) -> "SampledFunction":
        return SampledFunction(self.grid, values, self.label if label is None else label)

    def __add__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        check_same_grid(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__


def check_same_grid(a, b) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def sample(fn, grid: Grid1D, label: str = "") -> SampledFunction:
    """Sample a vectorised callable on ``grid``."""
    return SampledFunction(grid, fn(grid.x), label)


def tensor(f: SampledFunction, g: SampledFunction, conj_second: bool = True) -> SampledFunction:
    """``(f ⊗ conj(g))(a, b) = f(a) conj(g(b))`` on the product grid."""
    check_same_grid(f, g)
    gv = np.conj(g.values) if conj_second else g.values
    return SampledFunction(f.grid, np.outer(f.values, gv), f"{f.label}⊗{g.label}")


# --------------------------------------------------------------------------
# Fourier transform  f^(xi) = ∫ f(t) e^{-2πi t xi} dt
# --------------------------------------------------------------------------


def _alternating(M: int) -> np.ndarray:
    return np.where(np.arange(-M // 2, M // 2) % 2 == 0, 1.0, -1.0)


def fourier(f: SampledFunction) -> SampledFunction:
    """Discrete unitary Fourier transform onto ``grid.frequency_grid()``.

    ``f^(xi_k) = Δ Σ_j f(x_j) exp(-2πi x_j xi_k)`` with ``xi_k = k/L``.  Since
    ``x_j xi_k = -k/2 + jk/M`` the sum is one FFT followed by a sign flip.
    """
    if f.ndim != 1:
        raise GridMismatchError("fourier expects a 1-D sampled function")
    M = f.grid.points
    spec = np.fft.fftshift(np.fft.fft(f.values))
    return SampledFunction(f.grid.frequency_grid(), f.grid.spacing * _alternating(M) * spec,
                           f"F[{f.label}]")


def inverse_fourier(fh: SampledFunction, grid: Grid1D | None = None) -> SampledFunction:
    """Inverse of :func:`fourier`; ``grid`` is the spatial grid (inferred if omitted)."""
    M = fh.grid.points
    if grid is None:
        grid = Grid1D(M / fh.grid.extent, M)
    vals = np.fft.ifft(np.fft.ifftshift(_alternating(M) * fh.values)) * M / grid.extent
    return SampledFunction(grid, vals, f"F^-1[{fh.label}]")


def fourier_values(values: np.ndarray, spacing: float, axis: int = -1) -> np.ndarray:
    """Array form of :func:`fourier` along ``axis`` (any leading shape)."""
    M = values.shape[axis]
    shape = [1] * values.ndim
    shape[axis] = M
    spec = np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis)
    return spacing * _alternating(M).reshape(shape) * spec


def bandlimited_shift(values: np.ndarray, shift, spacing: float, axis: int = -1) -> np.ndarray:
    """Samples of ``u(x - shift)`` from samples of ``u`` by trigonometric interpolation.

    The interpolant is periodic over the window, so inputs are expected to
    decay at the window boundary.  ``shift`` is a scalar or an array that
    broadcasts against ``values`` with ``axis`` removed.
    """
    values = np.moveaxis(np.asarray(values), axis, -1)
    M = values.shape[-1]
    freqs = np.fft.fftfreq(M, d=spacing)
    sh = np.asarray(shift, dtype=float)[..., None]
    phase = np.exp(-2j * np.pi * freqs * sh)
    # Nyquist bin is split symmetrically so real data stays real
    phase[..., M // 2] = np.cos(np.pi * sh[..., 0] / spacing)
    out = np.fft.ifft(np.fft.fft(values, axis=-1) * phase, axis=-1)
    return np.moveaxis(out, -1, axis)


# --------------------------------------------------------------------------
# Polynomial weights
# --------------------------------------------------------------------------


def weight_eval(z, s: float) -> np.ndarray | float:
    """``v_s(z) = (1 + |z|^2)^{s/2}``; the last axis of ``z`` holds coordinates."""
    z = np.asarray(z, dtype=float)
    r2 = np.sum(z * z, axis=-1) if z.ndim else z * z
    out = (1.0 + r2) ** (s / 2)
    return float(out) if np.ndim(out) == 0 else out


def weight_convolution_ratio(s: float, extent: float, points: int, d: int = 1) -> float:
    """``sup_z (v_s * v_s)(z) / v_s(z)`` over a ``2d``-dimensional lattice.

    ``points`` samples of spacing ``extent/points`` per axis; the convolution
    is the plain discrete one with cell measure, both factors truncated to
    the window.  For ``s < -2d`` the ratio settles as the extent grows, for
    larger ``s`` it keeps growing (reported, not raised).
    """
    from scipy.signal import fftconvolve

    n = 2 * d
    g = Grid1D(extent, points)
    z = np.stack(np.meshgrid(*([g.x] * n), indexing="ij"), axis=-1)
    v = weight_eval(z, s)
    full = fftconvolve(v, v, mode="full")
    # full index a+b sits at coordinate -L + (a+b)Δ; x_i needs a+b = i + M/2
    sl = tuple(slice(points // 2, points // 2 + points) for _ in range(n))
    conv = full[sl] * g.spacing**n
    return float(np.max(conv / v))
