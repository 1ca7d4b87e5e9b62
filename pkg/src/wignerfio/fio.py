"""Fourier integral operators of type I and II, Kohn-Nirenberg operators,
Schwartz kernel matrices and the tensorized type-II constructions.

Type I::

    T_I f(x_j) = (1/L) Σ_k e^{2πi Phi(x_j, xi_k)} sigma(x_j, xi_k) f^(xi_k)

Type II (y-sum first, then the x-transform)::

    g(xi_k)     = Δ Σ_l e^{-2πi Phi(y_l, xi_k)} tau(y_l, xi_k) f(y_l)
    T_II f(x_j) = (1/L) Σ_k e^{2πi x_j xi_k} g(xi_k)

with ``xi_k = k/L``.  With ``tau = conj(sigma)`` the two discrete operators
are exact conjugate transposes of each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _accel
from .catalog import DEFAULT_REGISTRY, Registry
from .grid import Grid1D, GridMismatchError, SampledFunction, fourier
from .symbols import (
    Box,
    CertificationError,
    Symbol,
    TamePhase,
    hormander_certify,
    shubin_certify,
    tame_certify,
)

KINDS = ("type-I", "type-II", "pseudodifferential")


# --------------------------------------------------------------------------
# operator specification
# --------------------------------------------------------------------------


@dataclass
class OperatorSpec:
    """A phase/symbol pair with an operator kind.

    ``phase_ref`` and ``symbol_ref`` record the catalog names and parameters
    (``{"name": ..., "params": {...}, "conj": bool}``) so a spec can be
    written to and read back from a config file.
    """

    kind: str
    phase: TamePhase
    symbol: Symbol
    d: int = 1
    phase_ref: dict = field(default_factory=dict)
    symbol_ref: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown operator kind {self.kind!r}; expected one of {KINDS}")
        if self.d != 1:
            raise NotImplementedError("operator application is implemented for d = 1")

    @classmethod
    def from_catalog(cls, kind: str, phase: str, symbol: str, phase_params: dict | None = None,
                     symbol_params: dict | None = None, conj: bool = False,
                     registry: Registry | None = None) -> "OperatorSpec":
        reg = registry or DEFAULT_REGISTRY
        ph = reg.phase(phase, **(phase_params or {}))
        sy = reg.symbol(symbol, **(symbol_params or {}))
        if conj:
            sy = sy.conj()
        return cls(kind, ph, sy, 1,
                   {"name": phase, "params": dict(phase_params or {})},
                   {"name": symbol, "params": dict(symbol_params or {}), "conj": bool(conj)})

    def to_dict(self) -> dict:
        if not self.phase_ref or not self.symbol_ref:
            raise ValueError("only catalog-built specs are serialisable")
        return {"kind": self.kind, "d": self.d, "phase": self.phase_ref, "symbol": self.symbol_ref}

    @classmethod
    def from_dict(cls, data: dict, registry: Registry | None = None) -> "OperatorSpec":
        try:
            kind = data["kind"]
            ph, sy = data["phase"], data["symbol"]
            if isinstance(ph, str):
                ph = {"name": ph}
            if isinstance(sy, str):
                sy = {"name": sy}
            return cls.from_catalog(kind, ph["name"], sy["name"], ph.get("params"), sy.get("params"),
                                    bool(sy.get("conj", False)), registry)
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed operator spec {data!r}: {exc}") from exc

    def adjoint(self) -> "OperatorSpec":
        """The type-II spec with the conjugated symbol (the L2 adjoint of a type-I spec)."""
        if self.kind == "type-II":
            raise ValueError("adjoint of a type-II spec is not a catalog kind here")
        ref = dict(self.symbol_ref)
        ref["conj"] = not ref.get("conj", False)
        return OperatorSpec("type-II", self.phase, self.symbol.conj(), self.d, dict(self.phase_ref), ref)

    @property
    def label(self) -> str:
        return f"{self.kind}[{self.phase.label};{self.symbol.label}]"

    def certify(self, k_max: int = 4) -> dict:
        """Check the phase is tame and the symbol lies in its declared class.

        Negative orders are certified in the Shubin class, others in
        ``S^0_{0,0}``.  Reports are cached on the symbol.
        """
        if not self.phase.is_certified:
            tame_certify(self.phase)
        if not self.phase.is_certified:
            raise CertificationError(f"phase {self.phase.label!r} is not tame")
        s = self.symbol
        if s.order < 0:
            key = f"shubin:{s.order}"
            rep = s.certificates.get(key) or shubin_certify(s, k_max=k_max)
        else:
            rep = s.certificates.get("hormander") or hormander_certify(s, k_max=k_max)
        if not rep["member"]:
            raise CertificationError(f"symbol {s.label!r} failed certification in its declared class")
        return {"phase": self.phase.report, "symbol": rep}


def _check_grid(f: SampledFunction):
    if f.ndim != 1:
        raise GridMismatchError("operators act on 1-D sampled functions")


def _tables(phase, symbol, a, b):
    # Phi(a_j, b_k) and sym(a_j, b_k) on the product of two coordinate arrays
    A, B = np.meshgrid(a, b, indexing="ij")
    z = np.stack([A, B], axis=-1)
    return phase(z), symbol(z)


# --------------------------------------------------------------------------
# application
# --------------------------------------------------------------------------


def apply_fio1(spec: OperatorSpec, f: SampledFunction, backend: str | None = None) -> SampledFunction:
    """Type-I operator applied to samples of ``f`` (see module docstring)."""
    _check_grid(f)
    spec.certify()
    fh = fourier(f)
    grid = f.grid
    P, S = _tables(spec.phase, spec.symbol, grid.x, fh.grid.x)
    out = _accel.oscillatory_rowsum(P, S, fh.values / grid.extent, backend)
    return SampledFunction(grid, out, f"T[{f.label}]")


def apply_fio2(spec: OperatorSpec, f: SampledFunction, backend: str | None = None) -> SampledFunction:
    """Type-II operator, organised as the y-sum followed by the x-transform."""
    _check_grid(f)
    spec.certify()
    grid = f.grid
    xi = grid.frequency_grid().x
    P, S = _tables(spec.phase, spec.symbol, grid.x, xi)
    # rows indexed by xi_k: transpose the (y_l, xi_k) tables
    g = _accel.oscillatory_rowsum(-P.T, S.T, f.values * grid.spacing, backend)
    E = np.outer(grid.x, xi)
    out = _accel.oscillatory_rowsum(E, np.ones_like(E), g / grid.extent, backend)
    return SampledFunction(grid, out, f"T2[{f.label}]")


def kohn_nirenberg(symbol: Symbol, f: SampledFunction, backend: str | None = None) -> SampledFunction:
    """``sigma(x, D) f``: the type-I operator with phase ``x xi``."""
    ph = DEFAULT_REGISTRY.phase("identity")
    spec = OperatorSpec("pseudodifferential", ph, symbol, 1, {"name": "identity", "params": {}}, {})
    return apply_fio1(spec, f, backend)


def apply(spec: OperatorSpec, f: SampledFunction) -> SampledFunction:
    if spec.kind == "type-II":
        return apply_fio2(spec, f)
    return apply_fio1(spec, f)


# --------------------------------------------------------------------------
# Schwartz kernels
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SchwartzKernelMatrix:
    """``k_T(x_j, y_l)`` on a square grid; ``T f ≈ Σ_l k_T[j, l] f(y_l) Δ``."""

    grid: Grid1D
    values: np.ndarray
    label: str = ""

    def apply(self, f: SampledFunction) -> SampledFunction:
        if f.grid != self.grid:
            raise GridMismatchError("kernel and function grids differ")
        return SampledFunction(self.grid, self.values @ f.values * self.grid.spacing, f"K[{f.label}]")

    def compose(self, other: "SchwartzKernelMatrix") -> "SchwartzKernelMatrix":
        """Kernel of the product ``self ∘ other``."""
        if other.grid != self.grid:
            raise GridMismatchError("kernel grids differ")
        return SchwartzKernelMatrix(self.grid, self.values @ other.values * self.grid.spacing,
                                    f"{self.label}∘{other.label}")

    def adjoint(self) -> "SchwartzKernelMatrix":
        return SchwartzKernelMatrix(self.grid, self.values.conj().T, f"{self.label}*")


def schwartz_kernel(spec: OperatorSpec, grid: Grid1D) -> SchwartzKernelMatrix:
    """Discrete Schwartz kernel of ``spec`` on ``grid``."""
    spec.certify()
    x = grid.x
    xi = grid.frequency_grid().x
    P, S = _tables(spec.phase, spec.symbol, x, xi)
    F = np.exp(-2j * np.pi * np.outer(xi, x))  # e^{-2πi y_l xi_k}, rows k
    if spec.kind == "type-II":
        # k(x_j, y_l) = Σ_k e^{2πi x_j xi_k} e^{-2πi Phi(y_l, xi_k)} tau(y_l, xi_k) / L
        K = (F.conj().T @ (np.exp(-2j * np.pi * P) * S).T) / grid.extent
    else:
        K = ((np.exp(2j * np.pi * P) * S) @ F) / grid.extent
    return SchwartzKernelMatrix(grid, K, spec.label)


# --------------------------------------------------------------------------
# tensorized phases and symbols on R^{4d}
# --------------------------------------------------------------------------


@dataclass
class TensorizedPhasePair:
    """``Phi_2``, ``Phi_2'``, ``Phi_prod`` and ``tau_2``, ``tau_2'``, ``T_prod`` on R^4.

    Coordinates are ordered ``(y1, y2, xi1, xi2)``.
    """

    Phi2: TamePhase
    Phi2p: TamePhase
    Phi: TamePhase
    tau2: Symbol
    tau2p: Symbol
    T: Symbol
    reports: dict = field(default_factory=dict)


def _bilinear_deriv(a, u, v):
    # derivatives of u*v in the (u, v) multi-index a
    return {(0, 0): u * v, (1, 0): v, (0, 1): u, (1, 1): 1 + 0 * u}.get(a, 0 * u)


def tensorize_type2(phase: TamePhase, tau: Symbol, certify: bool = True,
                    box: Box | None = None) -> TensorizedPhasePair:
    """Build the tensorized phases and symbols of a type-II operator.

    ``Phi_2 = Phi(y1, xi1) + y2 xi2``, ``Phi_2' = -Phi(y2, -xi2) + y1 xi1``,
    ``Phi_prod = Phi(y1, xi1) - Phi(y2, -xi2)``; ``tau_2 = tau(y1, xi1)``,
    ``tau_2' = conj tau(y2, -xi2)`` and ``T_prod = tau_2 tau_2'``.  The
    symbols are certified in ``S^0_{0,0}`` only.
    """
    if phase.d != 1:
        raise NotImplementedError("tensorization is implemented for d = 1")
    if not phase.is_certified:
        raise CertificationError(f"phase {phase.label!r} must be tame-certified")
    if tau.order < 0:
        ok = any(k.startswith("shubin") and r["member"] for k, r in tau.certificates.items())
        if not ok:
            ok = shubin_certify(tau)["member"]
    else:
        ok = (tau.certificates.get("hormander") or hormander_certify(tau))["member"]
    if not ok:
        raise CertificationError(f"symbol {tau.label!r} is not certified")

    def split(z):
        return z[..., 0], z[..., 1], z[..., 2], z[..., 3]

    def pair(u, v):
        return np.stack([u, v], axis=-1)

    def phi2(z):
        y1, y2, x1, x2 = split(z)
        return phase(pair(y1, x1)) + y2 * x2

    def phi2_d(a, z):
        y1, y2, x1, x2 = split(z)
        a1, a2, b1, b2 = a
        out = 0 * y1
        if a2 == 0 and b2 == 0:
            out = out + phase.derivative((a1, b1), pair(y1, x1))
        if a1 == 0 and b1 == 0:
            out = out + _bilinear_deriv((a2, b2), y2, x2)
        return out

    def reflected(a2, b2, y2, x2):
        # ∂^{(a2,b2)} of -Phi(y2, -xi2)
        return -((-1) ** b2) * phase.derivative((a2, b2), pair(y2, -x2))

    def phi2p(z):
        y1, y2, x1, x2 = split(z)
        return -phase(pair(y2, -x2)) + y1 * x1

    def phi2p_d(a, z):
        y1, y2, x1, x2 = split(z)
        a1, a2, b1, b2 = a
        out = 0 * y1
        if a1 == 0 and b1 == 0:
            out = out + reflected(a2, b2, y2, x2)
        if a2 == 0 and b2 == 0:
            out = out + _bilinear_deriv((a1, b1), y1, x1)
        return out

    def phib(z):
        y1, y2, x1, x2 = split(z)
        return phase(pair(y1, x1)) - phase(pair(y2, -x2))

    def phib_d(a, z):
        y1, y2, x1, x2 = split(z)
        a1, a2, b1, b2 = a
        out = 0 * y1
        if a2 == 0 and b2 == 0:
            out = out + phase.derivative((a1, b1), pair(y1, x1))
        if a1 == 0 and b1 == 0:
            out = out + reflected(a2, b2, y2, x2)
        return out

    lab = phase.label
    Phi2 = TamePhase(phi2, 2, f"Phi2[{lab}]", phi2_d)
    Phi2p = TamePhase(phi2p, 2, f"Phi2'[{lab}]", phi2p_d)
    Phib = TamePhase(phib, 2, f"Phi_prod[{lab}]", phib_d)

    closed = tau.has_closed_form

    def t2(z):
        y1, y2, x1, x2 = split(z)
        return tau(pair(y1, x1))

    def t2_d(a, z):
        y1, y2, x1, x2 = split(z)
        a1, a2, b1, b2 = a
        if a2 or b2:
            return 0 * y1
        return tau.derivative((a1, b1), pair(y1, x1))

    def t2p(z):
        y1, y2, x1, x2 = split(z)
        return np.conj(tau(pair(y2, -x2)))

    def t2p_d(a, z):
        y1, y2, x1, x2 = split(z)
        a1, a2, b1, b2 = a
        if a1 or b1:
            return 0 * y1
        return (-1) ** b2 * np.conj(tau.derivative((a2, b2), pair(y2, -x2)))

    def tp(z):
        return t2(z) * t2p(z)

    def tp_d(a, z):
        a1, a2, b1, b2 = a
        return t2_d((a1, 0, b1, 0), z) * t2p_d((0, a2, 0, b2), z)

    tau2 = Symbol(t2, 0.0, f"tau2[{tau.label}]", 4, t2_d if closed else None)
    tau2p = Symbol(t2p, 0.0, f"tau2'[{tau.label}]", 4, t2p_d if closed else None)
    Tp = Symbol(tp, 0.0, f"T_prod[{tau.label}]", 4, tp_d if closed else None)
    out = TensorizedPhasePair(Phi2, Phi2p, Phib, tau2, tau2p, Tp)
    if certify:
        box = box or Box(3.0, 4, 7)
        for name, ph in (("Phi2", Phi2), ("Phi2p", Phi2p), ("Phi", Phib)):
            out.reports[name] = tame_certify(ph, k_max=3, box=box)
        for name, s in (("tau2", tau2), ("tau2p", tau2p), ("T", Tp)):
            out.reports[name] = hormander_certify(s, k_max=2, box=box)
        if not out.reports["Phi"]["tame"]:
            raise CertificationError("tensorized product phase failed the tame check")
    return out


def block_hessian_check(phase: TamePhase, Phi2: TamePhase, points) -> dict:
    """Compare the Hessian of ``Phi_2`` with the expected block layout.

    In the ordering ``(y1, y2, xi1, xi2)`` the Hessian is ``Phi``'s Hessian
    on the ``(y1, xi1)`` entries, an identity coupling between ``y2`` and
    ``xi2`` and zero elsewhere.
    """
    pts = np.asarray(points, dtype=float)
    Hs = Phi2.hessian(pts)
    h1 = phase.hessian(pts[..., [0, 2]])
    expect = np.zeros_like(Hs)
    idx = [0, 2]
    for i in range(2):
        for j in range(2):
            expect[..., idx[i], idx[j]] = h1[..., i, j]
    expect[..., 1, 3] = expect[..., 3, 1] = 1.0
    mixed = Phi2.mixed_hessian(pts)
    return {
        "max_deviation": float(np.max(np.abs(Hs - expect))),
        "identity_block_error": float(np.max(np.abs(Hs[..., 1, 3] - 1)) if Hs.size else 0.0),
        "zero_block_error": float(np.max(np.abs((Hs - expect)[..., [1, 1, 3, 3], [0, 2, 0, 2]]))),
        "delta": float(np.min(np.abs(np.linalg.det(mixed)))),
    }
