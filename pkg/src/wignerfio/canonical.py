"""Canonical transformations generated by tame phases.

For a phase ``Phi(x, eta)`` the map ``chi(y, eta) = (x, xi)`` is defined by

    y  = Phi_eta(x, eta)
    xi = Phi_x(x, eta)

The first equation is solved for ``x`` by Newton's method; its Jacobian is
the transposed mixed Hessian, which the tame condition keeps invertible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .symbols import Box, CertificationError, TamePhase, _as_box
from .symplectic import standard_J

MAX_ITER = 50


class SolverError(RuntimeError):
    """Newton iteration failed; ``trace`` holds the max residual per iteration."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = list(trace or [])


def _newton(residual, jac, x0, tol, max_iter=MAX_ITER):
    # batched damped Newton; residual/jac act on (..., d) arrays
    x = np.array(x0, dtype=float)
    g = residual(x)
    trace = [float(np.max(np.abs(g))) if g.size else 0.0]
    it = 0
    while trace[-1] > tol:
        if it >= max_iter:
            raise SolverError(f"Newton did not reach {tol:g} in {max_iter} iterations", trace)
        try:
            step = np.linalg.solve(jac(x), g[..., None])[..., 0]
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"singular Jacobian after {it} iterations", trace) from exc
        lam = np.ones(x.shape[:-1] + (1,))
        gn0 = np.linalg.norm(g, axis=-1, keepdims=True)
        for _ in range(30):
            xn = x - lam * step
            gn = residual(xn)
            worse = np.linalg.norm(gn, axis=-1, keepdims=True) > gn0
            if not worse.any():
                break
            lam = np.where(worse, lam / 2, lam)
        x, g = xn, gn
        it += 1
        trace.append(float(np.max(np.abs(g))))
        if not np.isfinite(trace[-1]):
            raise SolverError(f"Newton diverged after {it} iterations", trace)
    return x, it, trace


def _require_tame(phase: TamePhase):
    if not phase.is_certified:
        raise CertificationError(f"phase {phase.label!r} is not tame-certified; run tame_certify first")


def solve_canonical_map(phase: TamePhase, w, x_init=None, tol: float = 1e-12,
                        return_info: bool = False):
    """Solve the generating system for ``z = chi(w)``.

    Parameters
    ----------
    phase : TamePhase
        Must carry a passing tame certificate.
    w : array_like, shape (..., 2d)
        Points ``(y, eta)``.
    x_init : array_like, optional
        Starting guess for ``x``; defaults to ``y``.
    tol : float
        Residual tolerance on ``|Phi_eta(x, eta) - y|``; at least 1e-12.

    Returns
    -------
    ndarray, shape (..., 2d)
        ``(x, xi)``.  With ``return_info`` also a dict with the iteration
        count and the residual trace.
    """
    _require_tame(phase)
    if tol < 1e-12:
        raise ValueError("tol below 1e-12 is not supported")
    w = np.asarray(w, dtype=float)
    d = phase.d
    y, eta = w[..., :d], w[..., d:]
    x0 = y if x_init is None else np.broadcast_to(np.asarray(x_init, float), y.shape)

    def res(x):
        return phase.phi_eta(np.concatenate([x, eta], axis=-1)) - y

    def jac(x):
        # ∂/∂x_i of Phi_eta_j is the mixed block transposed
        return np.swapaxes(phase.mixed_hessian(np.concatenate([x, eta], axis=-1)), -1, -2)

    x, it, trace = _newton(res, jac, x0, tol)
    z = np.concatenate([x, phase.phi_x(np.concatenate([x, eta], axis=-1))], axis=-1)
    if return_info:
        return z, {"iterations": it, "trace": trace}
    return z


def solve_inverse_map(phase: TamePhase, z, tol: float = 1e-12):
    """``chi^{-1}(x, xi) = (y, eta)``: solve ``xi = Phi_x(x, eta)`` for ``eta``."""
    _require_tame(phase)
    z = np.asarray(z, dtype=float)
    d = phase.d
    x, xi = z[..., :d], z[..., d:]

    def res(eta):
        return phase.phi_x(np.concatenate([x, eta], axis=-1)) - xi

    def jac(eta):
        return phase.mixed_hessian(np.concatenate([x, eta], axis=-1))

    eta, _, _ = _newton(res, jac, xi, tol)
    y = phase.phi_eta(np.concatenate([x, eta], axis=-1))
    return np.concatenate([y, eta], axis=-1)


class CanonicalMap:
    """Evaluable ``chi : (y, eta) -> (x, xi)`` with Jacobians by central differences."""

    def __init__(self, forward: Callable, d: int = 1, label: str = "",
                 inverse: Callable | None = None, closed_form: bool = False,
                 phase: TamePhase | None = None, mixed: Callable | None = None):
        self.forward = forward
        self.d = d
        self.label = label
        self._inverse = inverse
        self.closed_form = closed_form
        self.phase = phase
        self._mixed = mixed
        self.report: dict | None = None

    @classmethod
    def from_phase(cls, phase: TamePhase, tol: float = 1e-12) -> "CanonicalMap":
        def mixed(p):
            g = phase.gradient(p)
            return np.concatenate([g[..., phase.d:], g[..., : phase.d]], axis=-1)

        return cls(lambda w: solve_canonical_map(phase, w, tol=tol), phase.d,
                   f"chi[{phase.label}]", lambda z: solve_inverse_map(phase, z, tol=tol),
                   closed_form=False, phase=phase, mixed=mixed)

    def mixed(self, p) -> np.ndarray:
        """Graph in mixed coordinates: ``(x, eta) -> (y, xi)`` with ``chi(y, eta) = (x, xi)``."""
        if self._mixed is None:
            raise NotImplementedError(f"{self.label}: no mixed-coordinate form available")
        return np.asarray(self._mixed(np.asarray(p, dtype=float)), dtype=float)

    def __call__(self, w) -> np.ndarray:
        return np.asarray(self.forward(np.asarray(w, dtype=float)), dtype=float)

    def inverse(self, z) -> np.ndarray:
        if self._inverse is None:
            raise NotImplementedError(f"{self.label}: no inverse available")
        return np.asarray(self._inverse(np.asarray(z, dtype=float)), dtype=float)

    def jacobian(self, w, h: float = 1e-4) -> np.ndarray:
        """``dchi[..., i, j] = ∂chi_i/∂w_j`` by central differences."""
        w = np.asarray(w, dtype=float)
        n = 2 * self.d
        cols = []
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            cols.append((self(w + e) - self(w - e)) / (2 * h))
        return np.stack(cols, axis=-1)


def map_certify(chi: CanonicalMap, box=None, fd_step: float = 1e-4) -> dict:
    """Symplecticity residual, first-derivative bound and ``inf |det ∂x/∂y|`` on a box."""
    n = 2 * chi.d
    box = _as_box(box if box is not None else Box(4.0, n), n)
    pts = box.lattice()
    Jm = chi.jacobian(pts, fd_step)
    J = standard_J(chi.d)
    resid = np.einsum("pki,kl,plj->pij", Jm, J, Jm) - J
    report = {
        "label": chi.label,
        "box": box.to_dict(),
        "fd_step": fd_step,
        "symplectic_residual": float(np.max(np.abs(resid))),
        "derivative_bound": float(np.max(np.abs(Jm))),
        "det_dx_dy_min": float(np.min(np.abs(np.linalg.det(Jm[:, : chi.d, : chi.d])))),
        "closed_form": chi.closed_form,
    }
    chi.report = report
    return report
