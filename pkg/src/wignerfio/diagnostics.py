"""Decay, localization, boundedness and off-graph mass statistics of kernels.

Distances between ``z`` and the graph point are Euclidean in phase-space
units; "cells" measure offsets in units of the grid spacings per axis.
Cells closer than two spacings to the graph are never read by the decay
statistics.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .canonical import CanonicalMap
from .fio import OperatorSpec, apply
from .grid import Grid1D, GridMismatchError, PhaseSpaceGrid, SampledFunction
from .kernel import WignerKernel4D, evolve_wigner, kernel_grid, kernel_type1_direct
from .symbols import TamePhase
from .testfuncs import random_bandlimited
from .wigner import WignerField, cross_wigner

#: cells within this many spacings of the graph are excluded
EXCLUSION_CELLS = 2.0
#: fit only cells above this fraction of the kernel peak
FIT_FLOOR = 1e-12
#: slices or rows below this fraction of the peak are ignored by localization
SIGNIFICANT = 1e-3


# --------------------------------------------------------------------------
# Taylor split of the kernel phase
# --------------------------------------------------------------------------


def phase_difference(phase: TamePhase, x, eta, t, r) -> np.ndarray:
    """``Phi(x + t/2, eta + r/2) - Phi(x - t/2, eta - r/2)``."""
    x, eta, t, r = np.broadcast_arrays(*map(np.asarray, (x, eta, t, r)))
    zp = np.stack([x + t / 2, eta + r / 2], -1)
    zm = np.stack([x - t / 2, eta - r / 2], -1)
    return phase(zp) - phase(zm)


def symbol_product(symbol, x, eta, t, r) -> np.ndarray:
    """``sigma(x + t/2, eta + r/2) conj sigma(x - t/2, eta - r/2)``."""
    x, eta, t, r = np.broadcast_arrays(*map(np.asarray, (x, eta, t, r)))
    zp = np.stack([x + t / 2, eta + r / 2], -1)
    zm = np.stack([x - t / 2, eta - r / 2], -1)
    return symbol(zp) * np.conj(symbol(zm))


def taylor_split(phase: TamePhase, base, lag, nodes: int = 24):
    """Linear part and the two second-order integral remainders.

    With ``h = (t/2, r/2)`` the remainders are

        R_±(h) = ∫_0^1 (1 - s) h^T Hess Phi((x, eta) ± s h) h ds

    evaluated by Gauss-Legendre quadrature, and

        Phi_I = t Phi_x + r Phi_eta + R_+ - R_-.

    Returns
    -------
    linear, R_plus, R_minus : ndarray
    """
    z0 = np.asarray(base, dtype=float)
    lag = np.asarray(lag, dtype=float)
    h = lag / 2
    linear = np.sum(phase.gradient(z0) * lag, axis=-1)
    s, wts = np.polynomial.legendre.leggauss(nodes)
    s = (s + 1) / 2
    wts = wts / 2

    def remainder(sign):
        acc = 0.0
        for sk, wk in zip(s, wts):
            Hm = phase.hessian(z0 + sign * sk * h)
            acc = acc + wk * (1 - sk) * np.einsum("...i,...ij,...j->...", h, Hm, h)
        return acc

    return linear, remainder(+1.0), remainder(-1.0)


# --------------------------------------------------------------------------
# decay report
# --------------------------------------------------------------------------


@dataclass
class DecayReport:
    """Envelope constant, fitted exponent and graph localization of a kernel."""

    N: int
    m: float
    d: int
    orientation: str
    weight_vars: str
    admissible: bool
    envelope: float
    p_hat: float
    p_hat_envelope: float
    fit_samples: int
    localization_error: float
    localization_error_rows: float
    localization_median: float
    localized_slices: int
    exclusion_radius: float
    map_label: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {k: _plain(v) for k, v in asdict(self).items()}

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)


def _plain(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if np.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _bracket(u):
    return np.sqrt(1 + u)


def graph_distance(k: WignerKernel4D, chi: CanonicalMap, orientation: str = "I") -> np.ndarray:
    """``|z - chi(w)|`` (orientation ``I``) or ``|w - chi(z)|`` (``II``) as an ``(M², M²)`` array."""
    g = k.grid
    X, XI = g.mesh()
    pts = np.stack([X.ravel(), XI.ravel()], -1)
    img = chi(pts)
    if orientation == "I":
        # rows z, columns w
        dz = pts[:, None, :] - img[None, :, :]
    elif orientation == "II":
        dz = img[:, None, :] - pts[None, :, :]
    else:
        raise ValueError("orientation must be 'I' or 'II'")
    return np.sqrt(np.sum(dz**2, axis=-1))


def _weights(g, weight_vars: str):
    # <(x, eta)> or <(y, xi)> on the (M², M²) layout
    M = g.grid.points
    x, xi = g.x, g.xi
    if weight_vars == "x_eta":
        a = x[:, None, None, None]
        b = xi[None, None, None, :]
    elif weight_vars == "y_xi":
        a = x[None, None, :, None]
        b = xi[None, :, None, None]
    else:
        raise ValueError("weight_vars must be 'x_eta' or 'y_xi'")
    W = _bracket(a**2 + b**2) * np.ones((M, M, M, M))
    return W.reshape(M * M, M * M)


def _slice_localization(k: WignerKernel4D, chi: CanonicalMap, orientation: str):
    # per mixed slice: argmax over the two transformed variables vs the graph
    g = k.grid
    M = g.grid.points
    K = np.abs(k.values)
    peak = K.max()
    x, xi = g.x, g.xi
    errs = []
    A, B = np.meshgrid(x, xi, indexing="ij")
    pred = chi.mixed(np.stack([A, B], -1))
    for i in range(M):
        for j in range(M):
            if orientation == "I":
                S = K[i, :, :, j]  # fixed (x, eta); free (xi, y)
                p_first, p_second = pred[i, j, 1], pred[i, j, 0]  # (xi*, y*)
            else:
                S = K[:, j, i, :]  # fixed (y, xi); free (x, eta)
                p_first, p_second = pred[i, j, 0], pred[i, j, 1]  # (x*, eta*)
            if S.max() < SIGNIFICANT * peak:
                continue
            if orientation == "I":
                ga, gb, da, db = xi, x, g.dxi, g.dx
            else:
                ga, gb, da, db = x, xi, g.dx, g.dxi
            if not (ga[0] + da <= p_first <= ga[-1] - da and gb[0] + db <= p_second <= gb[-1] - db):
                continue
            a, b = np.unravel_index(np.argmax(S), S.shape)
            errs.append(np.hypot((ga[a] - p_first) / da, (gb[b] - p_second) / db))
    return np.asarray(errs)


def _row_localization(k: WignerKernel4D, chi: CanonicalMap, orientation: str):
    # argmax_w |k(z, .)| against chi^{-1}(z) (or chi(z) for orientation II)
    g = k.grid
    Km = np.abs(k.matrix())
    peak = Km.max()
    X, XI = g.mesh()
    pts = np.stack([X.ravel(), XI.ravel()], -1)
    target = chi.inverse(pts) if orientation == "I" else chi(pts)
    lo = np.array([g.x[0] + g.dx, g.xi[0] + g.dxi])
    hi = np.array([g.x[-1] - g.dx, g.xi[-1] - g.dxi])
    rows = np.nonzero((Km.max(1) >= SIGNIFICANT * peak) & np.all((target >= lo) & (target <= hi), -1))[0]
    best = pts[np.argmax(Km[rows], axis=1)]
    off = (best - target[rows]) / np.array([g.dx, g.dxi])
    return np.hypot(off[:, 0], off[:, 1])


def default_N(m: float, d: int = 1) -> tuple[int, bool]:
    """Largest integer ``N < -m/2 - d``, clipped below at ``d + 1``; also whether it is admissible."""
    bound = -m / 2 - d
    N = int(np.ceil(bound)) - 1
    ok = d < N < bound
    return max(N, d + 1), bool(ok)


def decay_report(k: WignerKernel4D, chi: CanonicalMap, N: int | None = None, m: float = -8.0,
                 orientation: str = "I", weight_vars: str | None = None, d: int = 1) -> DecayReport:
    """Decay statistics of ``k`` relative to the graph of ``chi``.

    Parameters
    ----------
    k : WignerKernel4D
    chi : CanonicalMap
        ``orientation="I"`` measures ``|z - chi(w)|``; ``"II"`` measures
        ``|w - chi(z)|``.
    N : int, optional
        Decay order; defaults to the largest admissible value for ``m``.
    m : float
        Symbol order.
    weight_vars : {"x_eta", "y_xi"}, optional
        Envelope variables; defaults to ``x_eta`` for orientation ``I``
        and ``y_xi`` for ``II``.

    Notes
    -----
    ``envelope`` is ``sup |k| <dist>^{2N} / <weight>^{2N+m}`` over off-graph
    cells.  ``p_hat`` is the least-squares slope of ``-log|k|`` against
    ``log<dist>`` over off-graph cells above ``FIT_FLOOR`` of the off-graph
    peak;
    ``p_hat_envelope`` fits the per-bin maxima instead.
    ``localization_error`` (in cells) compares, for each mixed-coordinate
    slice, the argmax over the two transformed variables with the graph
    point; ``localization_error_rows`` compares ``argmax_w |k(z, .)|`` with
    the graph directly and is biased by the symbol envelope for smooth
    kernels.
    """
    if N is None:
        N, admissible = default_N(m, d)
    else:
        admissible = bool(d < N < -m / 2 - d)
    if N <= d:
        raise ValueError(f"N must exceed d={d}")
    weight_vars = weight_vars or ("x_eta" if orientation == "I" else "y_xi")
    g = k.grid
    dist = graph_distance(k, chi, orientation)
    Km = np.abs(k.matrix())
    rad = EXCLUSION_CELLS * max(g.dx, g.dxi)
    off = dist >= rad
    # the fit floor is relative to the off-graph peak so no excluded cell is read
    peak = float(np.max(np.where(off, Km, 0.0)))
    br = _bracket(dist**2)
    Wt = _weights(g, weight_vars)
    env = float(np.max(np.where(off, Km * br ** (2 * N) / Wt ** (2 * N + m), 0.0)))
    sel = off & (Km >= FIT_FLOOR * peak) & (Km > 0)
    lx = np.log(br[sel])
    ly = np.log(Km[sel])
    if lx.size >= 3 and np.ptp(lx) > 0:
        p_hat = -float(np.polyfit(lx, ly, 1)[0])
        p_env = _envelope_fit(lx, ly)
    else:
        p_hat = p_env = float("nan")
    sl = _slice_localization(k, chi, orientation)
    rw = _row_localization(k, chi, orientation)
    return DecayReport(
        N=int(N), m=float(m), d=d, orientation=orientation, weight_vars=weight_vars,
        admissible=admissible, envelope=env, p_hat=p_hat, p_hat_envelope=p_env,
        fit_samples=int(sel.sum()),
        localization_error=float(sl.max()) if sl.size else float("nan"),
        localization_error_rows=float(rw.max()) if rw.size else float("nan"),
        localization_median=float(np.median(sl)) if sl.size else float("nan"),
        localized_slices=int(sl.size), exclusion_radius=rad, map_label=chi.label,
    )


def _envelope_fit(lx, ly, bins: int = 24) -> float:
    edges = np.linspace(lx.min(), lx.max(), bins + 1)
    idx = np.clip(np.digitize(lx, edges) - 1, 0, bins - 1)
    bx, by = [], []
    for b in range(bins):
        sel = idx == b
        if sel.any():
            j = np.argmax(ly[sel])
            bx.append(lx[sel][j])
            by.append(ly[sel][j])
    if len(bx) < 3:
        return float("nan")
    return -float(np.polyfit(bx, by, 1)[0])


def decay_scatter(k: WignerKernel4D, chi: CanonicalMap, orientation: str = "I"):
    """Off-graph ``(distance, |k|)`` pairs, sorted by distance."""
    g = k.grid
    dist = graph_distance(k, chi, orientation).ravel()
    mag = np.abs(k.matrix()).ravel()
    sel = dist >= EXCLUSION_CELLS * max(g.dx, g.dxi)
    order = np.argsort(dist[sel], kind="stable")
    return dist[sel][order], mag[sel][order]


def write_scatter_csv(path, dist, mag, max_rows: int = 20000):
    """Write a deterministic stride-thinned scatter file."""
    stride = max(1, int(np.ceil(len(dist) / max_rows)))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["distance", "abs_k"])
        for a, b in zip(dist[::stride], mag[::stride]):
            w.writerow([f"{a:.10e}", f"{b:.10e}"])
    return len(dist[::stride])


# --------------------------------------------------------------------------
# ghost mass
# --------------------------------------------------------------------------


def off_graph_fraction(k: WignerKernel4D, chi: CanonicalMap, tube_cells: float = 4.0) -> float:
    """Share of ``Σ |k|²`` lying more than ``tube_cells`` spacings from ``z = chi(w)``."""
    g = k.grid
    dist = graph_distance(k, chi, "I")
    P = np.abs(k.matrix()) ** 2
    return float(P[dist > tube_cells * max(g.dx, g.dxi)].sum() / P.sum())


def ghost_mass_scenario(phase: TamePhase, symbol_a, symbol_b, chi: CanonicalMap | None = None,
                        grid=None, tube_cells: float = 4.0, backend: str | None = None) -> dict:
    """Off-graph mass fractions of the kernels with a decaying and a bounded symbol."""
    grid = grid or kernel_grid()
    if chi is None:
        chi = CanonicalMap.from_phase(phase)
    out = {"phase": phase.label, "map": chi.label, "tube_cells": tube_cells,
           "grid": grid.to_dict(), "nonquadratic": not phase.quadratic}
    for key, sym in (("symbol_a", symbol_a), ("symbol_b", symbol_b)):
        spec = OperatorSpec("type-I", phase, sym)
        k = kernel_type1_direct(spec, grid, strict=False, backend=backend)
        out[key] = {"label": sym.label, "order": sym.order,
                    "off_graph_fraction": off_graph_fraction(k, chi, tube_cells),
                    "box_radius": k.provenance["box_radius"]}
    out["a_below_b"] = out["symbol_a"]["off_graph_fraction"] < out["symbol_b"]["off_graph_fraction"]
    return out


# --------------------------------------------------------------------------
# L2 boundedness
# --------------------------------------------------------------------------


def l2_bound_check(spec: OperatorSpec, trials: int = 8, Ms=(64, 128, 256), L: float = 8.0,
                   seed: int = 0, bandwidth: float = 1.0, envelope: float = 1.0) -> dict:
    """Largest ``‖Tf‖/‖f‖`` over seeded random inputs, per grid size.

    The same continuous random functions are sampled on every grid, so the
    ratios converge as ``M`` grows; ``drift`` is the relative spread of the
    per-grid maxima.
    """
    ratios = {}
    for M in Ms:
        grid = Grid1D(L, int(M))
        rng = np.random.default_rng(seed)
        vals = []
        for _ in range(trials):
            f = random_bandlimited(grid, rng, bandwidth=bandwidth, envelope=envelope)
            vals.append(apply(spec, f).norm() / f.norm())
        ratios[int(M)] = vals
    maxima = np.array([max(v) for v in ratios.values()])
    return {"spec": spec.label, "L": L, "trials": trials, "seed": seed,
            "ratios": {str(M): [float(x) for x in v] for M, v in ratios.items()},
            "norm_proxy": {str(M): float(x) for M, x in zip(ratios, maxima)},
            "drift": float(np.ptp(maxima) / maxima.max())}


def restrict_field(W: WignerField, target: PhaseSpaceGrid) -> WignerField:
    """Samples of a fine field at the points of a coarser grid contained in it."""

    def pick(src, dst):
        idx = np.searchsorted(src, dst - 1e-9)
        idx = np.clip(idx, 0, len(src) - 1)
        if np.max(np.abs(src[idx] - dst)) > 1e-9:
            raise GridMismatchError("target grid points are not on the source grid")
        return idx

    ix = pick(W.grid.x, target.x)
    ik = pick(W.grid.xi, target.xi)
    return WignerField(target, W.values[np.ix_(ix, ik)], W.sources, W.tau)


def action_error(k: WignerKernel4D, spec: OperatorSpec, f: SampledFunction) -> float:
    """``sup |kW f - W(T f)| / sup |W(T f)|`` with both fields taken on the kernel grid.

    ``f`` lives on a fine grid containing the kernel grid; ``W f`` and
    ``W(T f)`` are computed there and restricted.
    """
    Wf = restrict_field(cross_wigner(f), k.grid)
    WTf = restrict_field(cross_wigner(apply(spec, f)), k.grid)
    out = evolve_wigner(k, Wf)
    return float(np.max(np.abs(out.values - WTf.values)) / np.max(np.abs(WTf.values)))
