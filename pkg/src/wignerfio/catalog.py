"""Reference phases, symbols and canonical maps (d = 1).

Phases belong to the family

    Phi(x, eta) = x eta + (alpha/2) x^2 - (beta/2) eta^2 + eps sin(x) sin(eta)

with closed-form derivatives of every order.  ``identity``,
``free_particle(tau)`` (``beta = 2 tau``), ``quadratic(alpha, beta)`` and
``sin_perturbed(eps)`` are members.  For ``eps = 0`` the canonical map is
known exactly: ``x = y + beta eta``, ``xi = eta + alpha x``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import hermite as H

from .canonical import CanonicalMap
from .symbols import Box, Symbol, TamePhase, hormander_certify, shubin_certify, tame_certify


class CatalogError(KeyError):
    pass


# --------------------------------------------------------------------------
# phase family
# --------------------------------------------------------------------------


def _sin_deriv(u, k):
    return np.sin(u + k * np.pi / 2)


def family_phase(alpha: float = 0.0, beta: float = 0.0, eps: float = 0.0, label: str = "") -> TamePhase:
    alpha, beta, eps = float(alpha), float(beta), float(eps)

    def func(z):
        x, e = z[..., 0], z[..., 1]
        return x * e + 0.5 * alpha * x**2 - 0.5 * beta * e**2 + eps * np.sin(x) * np.sin(e)

    def deriv(a, z):
        x, e = z[..., 0], z[..., 1]
        i, j = a
        poly = {
            (0, 0): x * e + 0.5 * alpha * x**2 - 0.5 * beta * e**2,
            (1, 0): e + alpha * x,
            (0, 1): x - beta * e,
            (2, 0): alpha + 0 * x,
            (0, 2): -beta + 0 * x,
            (1, 1): 1 + 0 * x,
        }.get((i, j), 0 * x)
        if eps:
            poly = poly + eps * _sin_deriv(x, i) * _sin_deriv(e, j)
        return poly

    params = {"alpha": alpha, "beta": beta, "eps": eps}
    return TamePhase(func, 1, label or _family_label(params), deriv, params, quadratic=(eps == 0))


def _family_label(p):
    return "phase(" + ",".join(f"{k}={v:g}" for k, v in p.items() if v) + ")"


def linear_map(alpha: float, beta: float, label: str = "") -> CanonicalMap:
    def fwd(w):
        y, e = w[..., 0], w[..., 1]
        x = y + beta * e
        return np.stack([x, e + alpha * x], axis=-1)

    def inv(z):
        x, xi = z[..., 0], z[..., 1]
        e = xi - alpha * x
        return np.stack([x - beta * e, e], axis=-1)

    def mixed(p):
        x, e = p[..., 0], p[..., 1]
        return np.stack([x - beta * e, e + alpha * x], axis=-1)

    return CanonicalMap(fwd, 1, label or f"shear(alpha={alpha:g},beta={beta:g})", inv,
                        closed_form=True, mixed=mixed)


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------


def symbol_one(n: int = 2) -> Symbol:
    def deriv(a, z):
        base = np.ones(z.shape[:-1])
        return base if sum(a) == 0 else 0 * base

    return Symbol(lambda z: np.ones(z.shape[:-1]), 0.0, "one", n, deriv)


def symbol_gaussian(eps: float = 1.0, order: float = -10.0, n: int = 2) -> Symbol:
    """``exp(-pi eps |z|^2)``; derivatives are products of scaled Hermite functions."""
    c = np.pi * float(eps)
    sc = np.sqrt(c)

    def func(z):
        return np.exp(-c * np.sum(z**2, axis=-1))

    def deriv(a, z):
        out = np.ones(z.shape[:-1])
        for i, k in enumerate(a):
            u = z[..., i]
            # d^k/du^k e^{-c u^2} = (-sqrt c)^k H_k(sqrt c u) e^{-c u^2}
            coef = np.zeros(k + 1)
            coef[k] = 1.0
            out = out * (-sc) ** k * H.hermval(sc * u, coef) * np.exp(-c * u**2)
        return out

    return Symbol(func, order, f"gaussian({eps:g})", n, deriv, {"eps": float(eps)})


def symbol_bracket(m: float, n: int = 2) -> Symbol:
    """``<z>^m = (1 + |z|^2)^{m/2}``; derivatives by finite differences."""
    m = float(m)
    return Symbol(lambda z: (1 + np.sum(z**2, axis=-1)) ** (m / 2), m, f"bracket({m:g})", n,
                  None, {"m": m})


def symbol_sin_radial(n: int = 2) -> Symbol:
    """``sin(|z|^2)``: bounded but not in S^0_{0,0} (first derivatives grow)."""
    return Symbol(lambda z: np.sin(np.sum(z**2, axis=-1)), 0.0, "sin_radial", n)


_EXPR_NAMES = {k: getattr(np, k) for k in ("exp", "sin", "cos", "sqrt", "pi", "tanh", "cosh", "sinh")}


def symbol_from_expression(expr: str, order: float, label: str = "") -> Symbol:
    """Symbol from a numpy expression in ``x`` and ``xi`` (config-defined symbols)."""
    code = compile(expr, "<symbol>", "eval")
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in ("x", "xi"):
            raise CatalogError(f"symbol expression uses unknown name {name!r}")

    def func(z):
        ns = dict(_EXPR_NAMES, x=z[..., 0], xi=z[..., 1])
        return np.broadcast_to(eval(code, {"__builtins__": {}}, ns), z.shape[:-1])

    return Symbol(func, order, label or expr, 2, None, {"expr": expr})


# --------------------------------------------------------------------------
# registry
# --------------------------------------------------------------------------


@dataclass
class CatalogEntry:
    name: str
    phase: TamePhase | None
    symbols: dict
    chi: CanonicalMap | None
    params: dict = field(default_factory=dict)


_PHASES = {
    "identity": (lambda: (0.0, 0.0, 0.0), {}),
    "free_particle": (lambda tau=0.5: (0.0, 2 * float(tau), 0.0), {"tau": 0.5}),
    "quadratic": (lambda alpha=0.5, beta=0.25: (float(alpha), float(beta), 0.0), {"alpha": 0.5, "beta": 0.25}),
    "sin_perturbed": (lambda eps=0.1: (0.0, 0.0, float(eps)), {"eps": 0.1}),
}

_SYMBOLS = {
    "one": (symbol_one, {}),
    "gaussian": (symbol_gaussian, {"eps": 1.0, "order": -10.0}),
    "bracket": (symbol_bracket, {"m": -6.0}),
    "sin_radial": (symbol_sin_radial, {}),
}


#: default certification box for catalog objects
CATALOG_BOX = Box(4.0, 2, 17)


class Registry:
    """Named phases and symbols; ``Registry(empty=True)`` starts with nothing."""

    def __init__(self, empty: bool = False):
        self.phases = {} if empty else dict(_PHASES)
        self.symbols = {} if empty else dict(_SYMBOLS)

    def add_symbol(self, name: str, factory, defaults: dict | None = None):
        self.symbols[name] = (factory, dict(defaults or {}))

    def add_config_symbol(self, name: str, expr: str, order: float):
        sym = symbol_from_expression(expr, order, name)
        self.add_symbol(name, lambda: sym, {})

    def load_config(self, cfg: dict):
        """Register ``cfg["symbols"]``: a list of ``{name, expr, order}`` records."""
        for rec in cfg.get("symbols", []) or []:
            try:
                self.add_config_symbol(str(rec["name"]), str(rec["expr"]), float(rec.get("order", 0)))
            except (KeyError, TypeError, ValueError) as exc:
                raise CatalogError(f"bad symbol record {rec!r}: {exc}") from exc

    def phase(self, name: str, **params) -> TamePhase:
        if name not in self.phases:
            raise CatalogError(f"unknown phase {name!r}; known: {sorted(self.phases)}")
        make, defaults = self.phases[name]
        p = {**defaults, **params}
        alpha, beta, eps = make(**p)
        ph = family_phase(alpha, beta, eps, label=_entry_label(name, p))
        ph.params.update(p)
        tame_certify(ph, k_max=4, box=CATALOG_BOX)
        return ph

    def symbol(self, name: str, **params) -> Symbol:
        if name not in self.symbols:
            raise CatalogError(f"unknown symbol {name!r}; known: {sorted(self.symbols)}")
        make, defaults = self.symbols[name]
        return make(**{**defaults, **params})

    def chi(self, phase: TamePhase) -> CanonicalMap:
        p = phase.params
        if p.get("eps", 0.0) == 0.0:
            return linear_map(p.get("alpha", 0.0), p.get("beta", 0.0), f"chi[{phase.label}]")
        return CanonicalMap.from_phase(phase)

    def entry(self, name: str, **params) -> CatalogEntry:
        ph = self.phase(name, **params)
        syms = {"one": self.symbol("one"), "gaussian": self.symbol("gaussian")}
        return CatalogEntry(name, ph, syms, self.chi(ph), {**self.phases[name][1], **params})

    def listing(self) -> list[dict]:
        rows = []
        for name in sorted(self.phases):
            ph = self.phase(name)
            rows.append({"kind": "phase", "name": name, "params": self.phases[name][1],
                         "certified": ph.is_certified, "delta": ph.report["delta"]})
        box = Box(4.0, 2, 9)
        for name in sorted(self.symbols):
            s = self.symbol(name)
            rep = hormander_certify(s, k_max=1, box=box)
            rows.append({"kind": "symbol", "name": name, "params": self.symbols[name][1],
                         "order": s.order, "certified": rep["member"]})
        return rows


def _entry_label(name, p):
    if not p:
        return name
    return name + "(" + ",".join(f"{k}={v:g}" for k, v in sorted(p.items())) + ")"


DEFAULT_REGISTRY = Registry()


def catalog(name: str, registry: Registry | None = None, **params) -> CatalogEntry:
    """Certified phase, its basic symbols and canonical map for a catalog name."""
    return (registry or DEFAULT_REGISTRY).entry(name, **params)


def phase(name: str, **params) -> TamePhase:
    return DEFAULT_REGISTRY.phase(name, **params)


def symbol(name: str, **params) -> Symbol:
    return DEFAULT_REGISTRY.symbol(name, **params)
