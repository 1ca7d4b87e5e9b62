"""Free-particle transport of Wigner distributions.

The propagator with phase ``x eta - tau eta^2`` moves a Wigner distribution
along a shear, ``W(T f)(x, xi) = W f(x - c tau xi, xi)``.  The constant ``c``
is measured here by locating the ridge of a propagated wave packet and then
checked on the full field.
"""

from __future__ import annotations

import csv

import numpy as np

from .catalog import DEFAULT_REGISTRY
from .fio import OperatorSpec, apply
from .grid import Grid1D, SampledFunction, bandlimited_shift
from .testfuncs import gaussian
from .wigner import WignerField, cross_wigner


def free_particle_spec(tau: float) -> OperatorSpec:
    return OperatorSpec.from_catalog("type-I", "free_particle", "one", {"tau": float(tau)})


def _ridge_peak(row: np.ndarray, x: np.ndarray) -> float:
    # parabolic refinement of the maximum of a smooth positive row
    i = int(np.argmax(row))
    y0, y1, y2 = np.log(row[i - 1]), np.log(row[i]), np.log(row[i + 1])
    off = 0.5 * (y0 - y2) / (y0 - 2 * y1 + y2)
    return float(x[i] + off * (x[1] - x[0]))


def ridge_oracle(taus=(0.25, 0.5), momenta=(0.5, 1.0), grid: Grid1D | None = None) -> dict:
    """Locate the ridge of ``W(T_tau f)`` for wave packets ``f`` of momentum ``xi0``.

    The packet starts at ``x = 0``, so the ridge in the row ``xi = xi0`` sits
    at ``c tau xi0``.  Returns the per-run estimates and ``c`` rounded to the
    nearest integer when all estimates agree with it to 1e-3.
    """
    grid = grid or Grid1D(16.0, 256)
    rows = []
    for tau in taus:
        spec = free_particle_spec(tau)
        for xi0 in momenta:
            f = gaussian(grid, 1.0, xi0=xi0)
            W = cross_wigner(apply(spec, f))
            k = int(np.argmin(np.abs(W.grid.xi - xi0)))
            x_peak = _ridge_peak(np.real(W.values[:, k]), W.grid.x)
            rows.append({"tau": float(tau), "xi0": float(xi0), "x_peak": x_peak,
                         "c_estimate": x_peak / (tau * W.grid.xi[k])})
    est = np.array([r["c_estimate"] for r in rows])
    c = float(np.rint(est.mean()))
    return {"rows": rows, "c": c, "max_deviation": float(np.max(np.abs(est - c))),
            "resolved": bool(np.max(np.abs(est - c)) < 1e-3), "grid": grid.to_dict()}


def write_ridge_csv(path, oracle: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "xi0", "x_peak", "c_estimate"])
        for r in oracle["rows"]:
            w.writerow([f"{r['tau']:.6g}", f"{r['xi0']:.6g}", f"{r['x_peak']:.12e}", f"{r['c_estimate']:.12e}"])


def sheared_field(W: WignerField, shift_per_xi: float) -> WignerField:
    """``W(x - s xi, xi)`` by band-limited interpolation along ``x``."""
    xi = W.grid.xi
    vals = bandlimited_shift(W.values, shift_per_xi * xi, W.grid.dx, axis=0)
    return W.with_values(vals)


def transport_error(f: SampledFunction, tau: float, c: float) -> float:
    """``sup |W(T_tau f) - W f(x - c tau xi, xi)| / sup |W(T_tau f)|``."""
    W_out = cross_wigner(apply(free_particle_spec(tau), f))
    W_ref = sheared_field(cross_wigner(f), c * tau)
    return float(np.max(np.abs(W_out.values - W_ref.values)) / np.max(np.abs(W_out.values)))
