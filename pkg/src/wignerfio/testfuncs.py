"""Catalog test functions and seeded random band-limited inputs."""

from __future__ import annotations

import numpy as np

from .grid import Grid1D, SampledFunction


def gaussian(grid: Grid1D, width: float = 1.0, x0: float = 0.0, xi0: float = 0.0) -> SampledFunction:
    """``exp(-pi (t - x0)^2 / width^2) exp(2πi xi0 t)``."""
    t = grid.x
    v = np.exp(-np.pi * (t - x0) ** 2 / width**2) * np.exp(2j * np.pi * xi0 * t)
    return SampledFunction(grid, v, f"gauss(w={width:g},x0={x0:g},xi0={xi0:g})")


def hermite1(grid: Grid1D) -> SampledFunction:
    t = grid.x
    return SampledFunction(grid, t * np.exp(-np.pi * t**2), "hermite1")


def chirp(grid: Grid1D, rate: float = 0.5, width: float = 1.0) -> SampledFunction:
    t = grid.x
    v = np.exp(-np.pi * t**2 / width**2) * np.exp(1j * np.pi * rate * t**2)
    return SampledFunction(grid, v, f"chirp(rate={rate:g})")


def catalog_functions(grid: Grid1D, scale: float = 1.0) -> list[SampledFunction]:
    """Five reference inputs; ``scale`` shrinks positions and widths for small windows."""
    s = float(scale)
    return [
        gaussian(grid, s),
        gaussian(grid, s, x0=0.75 * s),
        gaussian(grid, s, xi0=0.5 / s),
        SampledFunction(grid, (grid.x / s) * np.exp(-np.pi * (grid.x / s) ** 2), "hermite1"),
        chirp(grid, 0.5 / s**2, s),
    ]


def random_bandlimited(grid: Grid1D, rng: np.random.Generator, terms: int = 6,
                       bandwidth: float = 2.0, envelope: float = 1.5) -> SampledFunction:
    """Random trigonometric polynomial under a Gaussian envelope.

    Frequencies are uniform in ``[-bandwidth, bandwidth]`` and the envelope is
    ``exp(-pi t^2 / envelope^2)``; coefficients are complex normal.
    """
    t = grid.x
    freqs = rng.uniform(-bandwidth, bandwidth, terms)
    coef = rng.normal(size=terms) + 1j * rng.normal(size=terms)
    v = np.exp(-np.pi * t**2 / envelope**2) * (coef[None, :] * np.exp(2j * np.pi * np.outer(t, freqs))).sum(1)
    return SampledFunction(grid, v, "random")
