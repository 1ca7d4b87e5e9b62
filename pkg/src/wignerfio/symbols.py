"""Symbols and tame phases on R^n with numerical seminorm certification.

Evaluators take points as arrays whose last axis holds the ``n``
coordinates.  For phases ``n = 2d`` and the coordinates are ``(x, eta)``.
Derivatives come from a closed form when one is supplied, otherwise from
central finite differences with a Richardson cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import PhaseSpaceGrid, weight_eval

EPS = np.finfo(float).eps
DEFAULT_FD_STEP = 1e-4


class CertificationError(ValueError):
    """Evaluator overflow or a missing/failed certificate."""


def multi_indices(n: int, order: int):
    """All ``alpha`` in ``Z_+^n`` with ``|alpha| == order``."""
    for cut in itertools.combinations(range(order + n - 1), n - 1):
        prev, alpha = -1, []
        for c in cut + (order + n - 1,):
            alpha.append(c - prev - 1)
            prev = c
        yield tuple(alpha)


def fd_step(order: int, h: float = DEFAULT_FD_STEP) -> float:
    """Step for an order-``order`` difference: ``h``, raised where round-off would dominate.

    After Richardson extrapolation the truncation error is ``O(h^4)`` and the
    round-off ``O(eps / h^order)``; they balance near ``eps^{1/(order+4)}``.
    """
    return max(h, EPS ** (1.0 / (order + 4)))


def _central(func, alpha, z, h):
    # tensor product of order-k central stencils Σ_j (-1)^j C(k,j) f(z + (k/2 - j) h e_i)
    z = np.asarray(z, dtype=float)
    h = np.asarray(h, dtype=float)
    axes = [(i, k) for i, k in enumerate(alpha) if k]
    total = 0.0
    for js in itertools.product(*[range(k + 1) for _, k in axes]):
        w = 1.0
        zz = z.copy()
        for (i, k), j in zip(axes, js):
            w *= (-1) ** j * math.comb(k, j)
            zz[..., i] += (k / 2 - j) * h
        total = total + w * func(zz)
    return total / h ** sum(alpha)


def finite_difference(func, alpha, z, h: float | None = None, richardson: bool = True,
                      scale=None):
    """``∂^alpha func(z)`` by central differences (Richardson-extrapolated at ``h/2``).

    ``scale`` optionally multiplies the step per point (shape ``z.shape[:-1]``);
    for symbols whose derivatives decay like ``<z>^{-|alpha|}`` a step
    proportional to ``<z>`` keeps the relative error uniform.
    """
    order = sum(alpha)
    if order == 0:
        return func(np.asarray(z, dtype=float))
    h = fd_step(order) if h is None else h
    if scale is not None:
        h = h * np.asarray(scale, dtype=float)
    d1 = _central(func, alpha, z, h)
    if not richardson:
        return d1
    d2 = _central(func, alpha, z, h / 2)
    return (4 * d2 - d1) / 3


@dataclass(frozen=True)
class Box:
    """Lattice ``[-radius, radius]^n`` with ``points`` samples per axis."""

    radius: float
    n: int = 2
    points: int = 21

    def lattice(self) -> np.ndarray:
        ax = np.linspace(-self.radius, self.radius, self.points)
        return np.stack(np.meshgrid(*([ax] * self.n), indexing="ij"), axis=-1).reshape(-1, self.n)

    def enlarged(self, factor: float = 2.0) -> "Box":
        """Box scaled by ``factor`` with the same lattice spacing (a superset lattice for integer factors)."""
        pts = int(round((self.points - 1) * factor)) + 1
        return Box(self.radius * factor, self.n, pts)

    def to_dict(self) -> dict:
        return {"radius": self.radius, "n": self.n, "points": self.points}

    @classmethod
    def from_grid(cls, grid: PhaseSpaceGrid, points: int = 21) -> "Box":
        r = float(max(np.abs(grid.x).max(), np.abs(grid.xi).max()))
        return cls(r, 2, points)


def _as_box(box, n) -> Box:
    if isinstance(box, PhaseSpaceGrid):
        box = Box.from_grid(box)
    if box.n != n:
        box = Box(box.radius, n, box.points)
    return box


class Symbol:
    """Smooth function ``a(z)`` on R^n with a declared order ``m``.

    Parameters
    ----------
    func : callable
        Vectorised evaluator, ``func(z)`` with ``z.shape == (..., n)``.
    order : float
        Declared Shubin order ``m``.
    derivative : callable, optional
        Closed form ``derivative(alpha, z)``; finite differences otherwise.
    """

    def __init__(self, func: Callable, order: float, label: str = "", n: int = 2,
                 derivative: Callable | None = None, params: dict | None = None):
        self.func = func
        self.order = float(order)
        self.label = label
        self.n = n
        self._derivative = derivative
        self.params = dict(params or {})
        self.certificates: dict[str, dict] = {}

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.func(np.asarray(z, dtype=float)), dtype=complex)

    def at(self, x, xi):
        """Convenience evaluator for ``n == 2``: broadcasts ``x`` and ``xi``."""
        x, xi = np.broadcast_arrays(np.asarray(x, float), np.asarray(xi, float))
        return self(np.stack([x, xi], axis=-1))

    @property
    def has_closed_form(self) -> bool:
        return self._derivative is not None

    def derivative(self, alpha, z, h: float | None = None, scale=None):
        if self._derivative is not None and h is None:
            return np.asarray(self._derivative(tuple(alpha), np.asarray(z, float)), dtype=complex)
        return finite_difference(self, alpha, z, h, scale=scale)

    def conj(self) -> "Symbol":
        d = None
        if self._derivative is not None:
            d = lambda alpha, z: np.conj(self._derivative(alpha, z))
        return Symbol(lambda z: np.conj(self.func(z)), self.order, f"conj({self.label})", self.n, d,
                      self.params)

    def __repr__(self):
        return f"Symbol({self.label!r}, m={self.order})"


class TamePhase:
    """Real phase ``Phi(x, eta)`` on R^{2d} with gradient/Hessian access.

    ``func`` takes ``z = (x, eta)`` with ``z.shape == (..., 2d)``.  Optional
    closed forms: ``derivative(alpha, z)`` for any multi-index.
    """

    def __init__(self, func: Callable, d: int = 1, label: str = "",
                 derivative: Callable | None = None, params: dict | None = None,
                 quadratic: bool = False):
        self.func = func
        self.d = d
        self.label = label
        self._derivative = derivative
        self.params = dict(params or {})
        self.quadratic = quadratic
        self.report: dict | None = None

    @property
    def n(self) -> int:
        return 2 * self.d

    def __call__(self, z) -> np.ndarray:
        return np.asarray(self.func(np.asarray(z, dtype=float)), dtype=float)

    def at(self, x, eta):
        x, eta = np.broadcast_arrays(np.asarray(x, float), np.asarray(eta, float))
        return self(np.stack([x, eta], axis=-1))

    def derivative(self, alpha, z, h: float | None = None) -> np.ndarray:
        if self._derivative is not None and h is None:
            return np.asarray(self._derivative(tuple(alpha), np.asarray(z, float)), dtype=float)
        return np.real(finite_difference(self, alpha, z, h))

    def gradient(self, z) -> np.ndarray:
        z = np.asarray(z, float)
        cols = [self.derivative(tuple(int(i == k) for i in range(self.n)), z) for k in range(self.n)]
        return np.stack(cols, axis=-1)

    def phi_x(self, z):
        return self.gradient(z)[..., : self.d]

    def phi_eta(self, z):
        return self.gradient(z)[..., self.d:]

    def hessian(self, z) -> np.ndarray:
        z = np.asarray(z, float)
        n = self.n
        H = np.empty(z.shape[:-1] + (n, n))
        for i in range(n):
            for j in range(i, n):
                alpha = [0] * n
                alpha[i] += 1
                alpha[j] += 1
                H[..., i, j] = H[..., j, i] = self.derivative(tuple(alpha), z)
        return H

    def mixed_hessian(self, z) -> np.ndarray:
        """``∂²Phi/∂x_i∂eta_j`` as a ``d × d`` block."""
        return self.hessian(z)[..., : self.d, self.d:]

    @property
    def is_certified(self) -> bool:
        return bool(self.report and self.report.get("tame"))

    def __repr__(self):
        return f"TamePhase({self.label!r}, d={self.d})"


# --------------------------------------------------------------------------
# certification
# --------------------------------------------------------------------------


def _alpha_key(alpha) -> str:
    return ",".join(str(a) for a in alpha)


def _seminorms(obj, weight_order, k_max, pts, kmin=0):
    out = {}
    n = pts.shape[-1]
    for k in range(kmin, k_max + 1):
        for alpha in multi_indices(n, k):
            with np.errstate(over="raise", invalid="raise"):
                try:
                    if weight_order is None:
                        vals = np.abs(obj.derivative(alpha, pts))
                    else:
                        vals = np.abs(obj.derivative(alpha, pts, scale=weight_eval(pts, 1)))
                except FloatingPointError as exc:
                    raise CertificationError(f"{obj.label}: overflow evaluating ∂^{alpha}") from exc
            if not np.all(np.isfinite(vals)):
                raise CertificationError(f"{obj.label}: non-finite ∂^{alpha} on box")
            w = 1.0 if weight_order is None else weight_eval(pts, weight_order - k)
            out[_alpha_key(alpha)] = float(np.max(vals / w))
    return out


def _stable(c1: dict, c2: dict, rel: float, floor: float = 1e-9) -> dict:
    flags = {}
    for key in c1:
        a, b = c1[key], c2[key]
        flags[key] = bool(abs(b - a) <= rel * max(a, b) or max(a, b) <= floor)
    return flags


def shubin_certify(a: Symbol, m: float | None = None, k_max: int = 4, box=None,
                   rel_tol: float = 0.10) -> dict:
    """Estimate ``C_alpha = sup |∂^alpha a| / v_{m-|alpha|}`` for ``|alpha| <= k_max``.

    Membership in ``Γ^m`` is flagged when every estimate is finite and moves
    by at most ``rel_tol`` when the box is doubled.
    """
    if k_max > 4:
        raise CertificationError("k_max above 4 is beyond finite-difference reliability")
    m = a.order if m is None else float(m)
    box = _as_box(box if box is not None else Box(8.0, a.n, 33), a.n)
    c1 = _seminorms(a, m, k_max, box.lattice())
    c2 = _seminorms(a, m, k_max, box.enlarged().lattice())
    stable = _stable(c1, c2, rel_tol)
    report = {
        "class": "shubin", "label": a.label, "m": m, "k_max": k_max, "box": box.to_dict(),
        "constants": c1, "constants_enlarged": c2, "stable": stable,
        "member": all(stable.values()),
        "derivatives": "closed-form" if a.has_closed_form else "finite-difference",
    }
    a.certificates[f"shubin:{m}"] = report
    return report


def hormander_certify(a: Symbol, k_max: int = 4, box=None, rel_tol: float = 0.10) -> dict:
    """Estimate ``sup |∂^alpha a|``; membership in ``S^0_{0,0}`` when all are stable."""
    if k_max > 4:
        raise CertificationError("k_max above 4 is beyond finite-difference reliability")
    box = _as_box(box if box is not None else Box(8.0, a.n, 33), a.n)
    c1 = _seminorms(a, None, k_max, box.lattice())
    c2 = _seminorms(a, None, k_max, box.enlarged().lattice())
    stable = _stable(c1, c2, rel_tol)
    report = {
        "class": "hormander00", "label": a.label, "k_max": k_max, "box": box.to_dict(),
        "constants": c1, "constants_enlarged": c2, "stable": stable,
        "member": all(stable.values()),
    }
    a.certificates["hormander"] = report
    return report


def tame_certify(phase: TamePhase, k_max: int = 4, box=None) -> dict:
    """Bounds ``sup |∂^alpha Phi|`` for ``2 <= |alpha| <= k_max`` and ``inf |det ∂²_{x,eta} Phi|``."""
    box = _as_box(box if box is not None else Box(4.0, phase.n), phase.n)
    pts = box.lattice()
    table = _seminorms(phase, None, k_max, pts, kmin=2)
    det = np.abs(np.linalg.det(np.atleast_3d(phase.mixed_hessian(pts)).reshape(-1, phase.d, phase.d)))
    delta = float(det.min())
    tame = bool(all(np.isfinite(v) for v in table.values()) and delta > 0)
    report = {"label": phase.label, "k_max": k_max, "box": box.to_dict(), "bounds": table,
              "delta": delta, "tame": tame}
    phase.report = report
    return report
