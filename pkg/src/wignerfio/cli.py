"""Command-line scenario runner.

Every subcommand writes ``summary.json`` into ``--out`` together with its
tensors and CSV files.  Exit status is 0 when all assertions pass, 1 when
one fails and 2 for configuration errors.

Config files are YAML (``config_version: 1``)::

    config_version: 1
    scenario: decay            # for ``run``
    seed: 0
    grid: {L: 16.0, M: 256, kernel_M: 32, kernel_L: 4.0}
    spec: {kind: type-I, phase: sin_perturbed, phase_params: {eps: 0.1},
           symbol: bracket, symbol_params: {m: -8}}
    specs: [...]               # two specs for ``compose``
    N: 2
    m: -8
    tol: 1.0e-3
    symbols:                   # extra catalog symbols
      - {name: bump, expr: "exp(-pi*(x**2 + xi**2))", order: -10}

Command-line flags override config values.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import _accel
from .acceptance import CHECKS
from .canonical import CanonicalMap, map_certify
from .catalog import DEFAULT_REGISTRY, CatalogError, Registry, linear_map
from .diagnostics import decay_report, decay_scatter, ghost_mass_scenario, write_scatter_csv
from .fio import OperatorSpec, schwartz_kernel
from .grid import Grid1D, PhaseSpaceGrid
from .kernel import (
    MAX_KERNEL_M,
    KernelMemoryError,
    adjoint_kernel,
    compose_kernels,
    fine_grid_for,
    kernel_type1_direct,
    kernel_type2_direct,
    kernel_via_schwartz,
    rel_sup_diff,
)
from .symbols import CertificationError, hormander_certify, shubin_certify, tame_certify
from .testfuncs import catalog_functions
from .transport import ridge_oracle, transport_error, write_ridge_csv
from .wigner import cross_wigner

log = logging.getLogger("wignerfio")

CONFIG_VERSION = 1

#: default tolerance per subcommand (overridden by --tol)
DEFAULT_TOL = {
    "wigner": 1e-8,
    "kernel": 0.0,
    "decay": 2.0,
    "compose": 1e-3,
    "adjoint": 1e-6,
    "certify": 1e-6,
    "ghost": 0.0,
    "verify": 0.0,
    "moyal": 1e-8,
    "free-particle-transport": 1e-6,
}

SCENARIOS = ("moyal", "free-particle-transport", "wigner", "kernel", "decay", "compose", "adjoint", "ghost")


class ConfigError(ValueError):
    """Malformed or inconsistent scenario configuration (exit status 2)."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            cfg = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if cfg is None:
        cfg = {}
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a mapping at top level")
    ver = cfg.get("config_version", CONFIG_VERSION)
    if ver != CONFIG_VERSION:
        raise ConfigError(f"unsupported config_version {ver!r}; expected {CONFIG_VERSION}")
    return cfg


def _parse_params(items) -> dict:
    out = {}
    for it in items or []:
        key, sep, val = it.partition("=")
        if not sep:
            raise ConfigError(f"parameter {it!r} is not of the form key=value")
        try:
            out[key] = float(val)
        except ValueError as exc:
            raise ConfigError(f"parameter {it!r} needs a numeric value") from exc
    return out


class Context:
    """Resolved settings for one invocation."""

    def __init__(self, args, cfg: dict, registry: Registry):
        self.args = args
        self.cfg = cfg
        self.registry = registry
        grid = cfg.get("grid", {}) or {}
        if not isinstance(grid, dict):
            raise ConfigError("grid must be a mapping")
        self.seed = int(_pick(args.seed, cfg.get("seed"), 0))
        self.L = float(_pick(args.L, grid.get("L"), 16.0))
        self.M = int(_pick(args.grid_M, grid.get("M"), 256))
        self.kernel_M = int(_pick(args.kernel_M, grid.get("kernel_M"), 32))
        kl = grid.get("kernel_L")
        # default keeps the kernel x spacing at 1/8
        self.kernel_L = float(kl) if kl is not None else self.kernel_M / 8
        self.N = _pick(args.N, cfg.get("N"), None)
        self.m = _pick(args.m, cfg.get("m"), None)
        self.out = Path(_pick(args.out, cfg.get("out"), "wignerfio-out"))
        if self.M < 2 or self.M % 2 or self.L <= 0:
            raise ConfigError(f"grid needs an even M >= 2 and L > 0, got M={self.M}, L={self.L}")
        if self.kernel_M < 2 or self.kernel_M % 2:
            raise ConfigError(f"kernel_M must be even, got {self.kernel_M}")
        if self.kernel_M > MAX_KERNEL_M:
            raise ConfigError(f"kernel_M={self.kernel_M} exceeds the limit {MAX_KERNEL_M}")

    def tol(self, key: str) -> float:
        return float(_pick(self.args.tol, self.cfg.get("tol"), DEFAULT_TOL[key]))

    @property
    def grid(self) -> Grid1D:
        return Grid1D(self.L, self.M)

    @property
    def kgrid(self) -> PhaseSpaceGrid:
        return PhaseSpaceGrid(Grid1D(self.kernel_L, self.kernel_M))

    def spec(self, index: int | None = None) -> OperatorSpec:
        a = self.args
        if index is None:
            raw = self.cfg.get("spec")
            if getattr(a, "phase", None) or raw is None:
                raw = {"kind": getattr(a, "kind", None) or "type-I",
                       "phase": getattr(a, "phase", None) or "sin_perturbed",
                       "phase_params": _parse_params(getattr(a, "phase_param", None)),
                       "symbol": getattr(a, "symbol", None) or "gaussian",
                       "symbol_params": _parse_params(getattr(a, "symbol_param", None))}
        else:
            specs = self.cfg.get("specs")
            if not isinstance(specs, list) or len(specs) <= index:
                raise ConfigError("config needs a 'specs' list with two entries")
            raw = specs[index]
        return spec_from_record(raw, self.registry)


def _pick(*vals):
    for v in vals:
        if v is not None:
            return v
    return None


def spec_from_record(raw, registry: Registry) -> OperatorSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"spec must be a mapping, got {raw!r}")
    try:
        return OperatorSpec.from_catalog(str(raw.get("kind", "type-I")), str(raw["phase"]), str(raw["symbol"]),
                                         dict(raw.get("phase_params") or {}), dict(raw.get("symbol_params") or {}),
                                         bool(raw.get("conj", False)), registry)
    except KeyError as exc:
        raise ConfigError(f"spec record {raw!r} is missing or names an unknown entry: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad spec record {raw!r}: {exc}") from exc


# --------------------------------------------------------------------------
# summary
# --------------------------------------------------------------------------


def _plain(v):
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def write_summary(out: Path, command: str, ctx: Context | None, assertions: list[dict], extra: dict) -> bool:
    out.mkdir(parents=True, exist_ok=True)
    passed = all(a["passed"] for a in assertions)
    doc = {"command": command, "passed": passed, "assertions": assertions, "results": extra}
    if ctx is not None:
        doc["settings"] = {"seed": ctx.seed, "L": ctx.L, "M": ctx.M, "kernel_M": ctx.kernel_M,
                           "kernel_L": ctx.kernel_L, "backend": _accel.BACKEND}
    with open(out / "summary.json", "w") as fh:
        json.dump(_plain(doc), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return passed


def _assert(name: str, value, tol, passed: bool) -> dict:
    return {"name": name, "value": value, "tolerance": tol, "passed": bool(passed)}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_wigner(ctx: Context):
    tol = ctx.tol("wigner")
    res, asserts = {}, []
    for i, f in enumerate(catalog_functions(ctx.grid)):
        W = cross_wigner(f)
        W.export(ctx.out / f"wigner_{i}.tensor", {"function": f.label})
        err = abs(W.norm() - f.norm() ** 2) / f.norm() ** 2
        res[f.label] = {"moyal_relative_error": err}
        asserts.append(_assert(f"moyal[{f.label}]", err, tol, err <= tol))
    return asserts, res


def cmd_moyal(ctx: Context):
    tol = ctx.tol("moyal")
    res, asserts = {}, []
    for f in catalog_functions(ctx.grid):
        err = abs(cross_wigner(f).norm() - f.norm() ** 2) / f.norm() ** 2
        res[f.label] = err
        asserts.append(_assert(f"moyal[{f.label}]", err, tol, err <= tol))
    return asserts, {"relative_error": res}


def cmd_transport(ctx: Context):
    tol = ctx.tol("free-particle-transport")
    oracle = ridge_oracle(grid=ctx.grid)
    write_ridge_csv(ctx.out / "ridge.csv", oracle)
    c = oracle["c"]
    errs = {str(t): max(transport_error(f, t, c) for f in catalog_functions(ctx.grid)) for t in (0.25, 0.5)}
    asserts = [_assert("ridge_oracle_resolved", oracle["max_deviation"], 1e-3, oracle["resolved"])]
    asserts += [_assert(f"transport[tau={t}]", e, tol, e <= tol) for t, e in errs.items()]
    note = (f"resolved c = {c:g}: the phase x eta - tau eta^2 transports along (y + {c:g} tau eta, eta); "
            "the shear (y + tau eta, eta) does not match the propagated field")
    return asserts, {"transport_constant": c, "sup_error": errs, "ridge": oracle["rows"], "note": note}


def _kernel_for(ctx: Context, spec: OperatorSpec, route: str):
    if route == "schwartz":
        return kernel_via_schwartz(spec, ctx.kgrid)
    strict = spec.symbol.order < 0
    if spec.kind == "type-II":
        return kernel_type2_direct(spec, ctx.kgrid, strict=strict)
    return kernel_type1_direct(spec, ctx.kgrid, strict=strict)


def cmd_kernel(ctx: Context):
    spec = ctx.spec()
    k = _kernel_for(ctx, spec, ctx.args.route)
    k.export(ctx.out / "kernel.tensor")
    finite = bool(np.all(np.isfinite(k.values)))
    res = {"spec": spec.to_dict(), "provenance": k.provenance, "sup": k.sup()}
    return [_assert("finite_entries", finite, True, finite)], res


def cmd_decay(ctx: Context):
    spec = ctx.spec()
    m = float(ctx.m if ctx.m is not None else spec.symbol.order)
    k = _kernel_for(ctx, spec, "direct")
    chi = ctx.registry.chi(spec.phase)
    orient = "II" if spec.kind == "type-II" else "I"
    rep = decay_report(k, chi, N=None if ctx.N is None else int(ctx.N), m=m, orientation=orient)
    rep.to_json(ctx.out / "decay_report.json")
    dist, mag = decay_scatter(k, chi, orient)
    write_scatter_csv(ctx.out / "decay_scatter.csv", dist, mag)
    slack = ctx.tol("decay")
    floor = (-m - 2 * rep.d) - slack
    asserts = [_assert("envelope_finite", rep.envelope, "finite", math.isfinite(rep.envelope)),
               _assert("p_hat_floor", rep.p_hat, floor, rep.p_hat >= floor),
               _assert("localization_cells", rep.localization_error, 2.0, rep.localization_error <= 2.0)]
    return asserts, {"decay_report": rep.to_dict(), "slack": slack}


def cmd_compose(ctx: Context):
    tol = ctx.tol("compose")
    if ctx.cfg.get("specs"):
        s1, s2 = ctx.spec(0), ctx.spec(1)
    else:
        s1 = OperatorSpec.from_catalog("type-I", "free_particle", "gaussian", {"tau": ctx.args.tau1}, {},
                                       registry=ctx.registry)
        s2 = OperatorSpec.from_catalog("type-I", "free_particle", "gaussian", {"tau": ctx.args.tau2}, {},
                                       registry=ctx.registry)
    kc = compose_kernels(_kernel_for(ctx, s1, "direct"), _kernel_for(ctx, s2, "direct"))
    kc.export(ctx.out / "composed.tensor")
    fine = fine_grid_for(ctx.kgrid)
    K12 = schwartz_kernel(s1, fine).compose(schwartz_kernel(s2, fine))
    d = rel_sup_diff(kc, kernel_via_schwartz(K12, ctx.kgrid))
    return [_assert("composed_vs_schwartz_product", d, tol, d <= tol)], {"specs": [s1.to_dict(), s2.to_dict()]}


def cmd_adjoint(ctx: Context):
    tol = ctx.tol("adjoint")
    spec = ctx.spec()
    if spec.kind == "type-II":
        raise ConfigError("adjoint expects a type-I spec")
    ka = adjoint_kernel(_kernel_for(ctx, spec, "direct"))
    ka.export(ctx.out / "adjoint.tensor")
    k2 = _kernel_for(ctx, spec.adjoint(), "direct")
    d = rel_sup_diff(ka, k2)
    return [_assert("adjoint_swap_vs_type2", d, tol, d <= tol)], {"spec": spec.to_dict()}


def cmd_certify(ctx: Context):
    a = ctx.args
    tol = ctx.tol("certify")
    reg = ctx.registry
    if a.phase_name:
        ph = reg.phase(a.phase_name, **_parse_params(a.phase_param))
        rep = tame_certify(ph)
        return [_assert("tame", rep["tame"], True, rep["tame"])], {"phase": rep}
    if a.symbol_name:
        s = reg.symbol(a.symbol_name, **_parse_params(a.symbol_param))
        rep = shubin_certify(s) if s.order < 0 else hormander_certify(s)
        return [_assert("member", rep["member"], True, rep["member"])], {"symbol": rep}
    if a.map_name:
        ph = reg.phase(a.map_name, **_parse_params(a.phase_param))
        rep = map_certify(CanonicalMap.from_phase(ph))
        ok = rep["symplectic_residual"] <= tol
        return [_assert("symplectic_residual", rep["symplectic_residual"], tol, ok)], {"map": rep}
    raise ConfigError("certify needs one of --phase, --symbol or --map")


def cmd_ghost(ctx: Context):
    reg = ctx.registry
    ph = reg.phase(ctx.args.phase or "sin_perturbed", **_parse_params(ctx.args.phase_param))
    rep = ghost_mass_scenario(ph, reg.symbol("gaussian", eps=ctx.args.gaussian_eps), reg.symbol("one"),
                              chi=reg.chi(ph), grid=ctx.kgrid)
    asserts = []
    if not ph.quadratic:
        asserts.append(_assert("gaussian_fraction_below_one", rep["symbol_a"]["off_graph_fraction"],
                               rep["symbol_b"]["off_graph_fraction"], rep["a_below_b"]))
    return asserts, rep


def cmd_verify(ctx: Context):
    select = set(ctx.args.only) if ctx.args.only else None
    asserts, res = [], {}
    for i, fn in enumerate(CHECKS, start=1):
        if select is not None and i not in select:
            continue
        r = fn()
        print(r.line())
        asserts.append(_assert(f"criterion_{i}:{r.name}", r.passed, True, r.passed))
        res[str(i)] = r.to_dict()
    return asserts, res


def list_catalog(registry: Registry, stream=None) -> list[dict]:
    stream = stream or sys.stdout
    rows = registry.listing()
    for r in rows:
        params = ",".join(f"{k}={v:g}" for k, v in sorted(r["params"].items()))
        status = "certified" if r["certified"] else "not-certified"
        extra = f" order={r['order']:g}" if r["kind"] == "symbol" else f" delta={r['delta']:.3g}"
        print(f"{r['kind']:6s} {r['name']:16s} [{params}] {status}{extra}", file=stream)
    return rows


COMMANDS = {
    "wigner": cmd_wigner,
    "kernel": cmd_kernel,
    "decay": cmd_decay,
    "compose": cmd_compose,
    "adjoint": cmd_adjoint,
    "certify": cmd_certify,
    "ghost": cmd_ghost,
    "verify": cmd_verify,
    "moyal": cmd_moyal,
    "free-particle-transport": cmd_transport,
}


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="YAML scenario config")
    p.add_argument("--out", help="output directory (default wignerfio-out)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--threads", type=int, help="cap on kernel worker threads")
    p.add_argument("--grid-M", dest="grid_M", type=int, help="signal grid points (default 256)")
    p.add_argument("--kernel-M", dest="kernel_M", type=int, help="kernel grid points per axis (default 32, max 48)")
    p.add_argument("--L", type=float, help="signal window length (default 16)")
    p.add_argument("--N", type=int, help="decay order N for decay reports")
    p.add_argument("--m", type=float, help="symbol order m for decay reports")
    p.add_argument("--tol", type=float, help="override the subcommand's default tolerance")
    p.add_argument("-v", "--verbose", action="store_true")


def _spec_args(p: argparse.ArgumentParser, phase_default: str | None = None):
    p.add_argument("--kind", choices=("type-I", "type-II", "pseudodifferential"))
    p.add_argument("--phase", default=phase_default, help="catalog phase name")
    p.add_argument("--phase-param", action="append", metavar="KEY=VALUE")
    p.add_argument("--symbol", help="catalog symbol name")
    p.add_argument("--symbol-param", action="append", metavar="KEY=VALUE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wignerfio", description="Wigner kernels of Fourier integral operators")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wigner", help=f"Wigner fields of the catalog functions; Moyal tol {DEFAULT_TOL['wigner']:g}")
    _common(p)
    p = sub.add_parser("kernel", help="Wigner kernel of a spec; asserts finite entries")
    _common(p)
    _spec_args(p)
    p.add_argument("--route", choices=("direct", "schwartz"), default="direct")
    p = sub.add_parser("decay", help=f"decay report; exponent floor slack {DEFAULT_TOL['decay']:g}")
    _common(p)
    _spec_args(p)
    p = sub.add_parser("compose", help=f"composition vs Schwartz product; tol {DEFAULT_TOL['compose']:g}")
    _common(p)
    p.add_argument("--tau1", type=float, default=0.25)
    p.add_argument("--tau2", type=float, default=0.5)
    p = sub.add_parser("adjoint", help=f"adjoint swap vs type-II kernel; tol {DEFAULT_TOL['adjoint']:g}")
    _common(p)
    _spec_args(p)
    p = sub.add_parser("certify", help=f"certify a phase, symbol or map; map tol {DEFAULT_TOL['certify']:g}")
    _common(p)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--phase", dest="phase_name")
    g.add_argument("--symbol", dest="symbol_name")
    g.add_argument("--map", dest="map_name", help="phase whose canonical map is certified")
    p.add_argument("--phase-param", action="append", metavar="KEY=VALUE")
    p.add_argument("--symbol-param", action="append", metavar="KEY=VALUE")
    p = sub.add_parser("ghost", help="off-graph mass of Gaussian vs constant symbol")
    _common(p)
    p.add_argument("--phase", default="sin_perturbed")
    p.add_argument("--phase-param", action="append", metavar="KEY=VALUE")
    p.add_argument("--gaussian-eps", type=float, default=0.5)
    p = sub.add_parser("verify", help="run the twelve end-to-end checks")
    _common(p)
    p.add_argument("--only", type=int, action="append", metavar="N", help="run only criterion N")
    p = sub.add_parser("list-catalog", help="list catalog phases and symbols")
    _common(p)
    p = sub.add_parser("run", help=f"run the scenario named in --config or --scenario ({', '.join(SCENARIOS)})")
    _common(p)
    _spec_args(p)
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument("--route", choices=("direct", "schwartz"), default="direct")
    p.add_argument("--tau1", type=float, default=0.25)
    p.add_argument("--tau2", type=float, default=0.5)
    p.add_argument("--gaussian-eps", type=float, default=0.5)
    return parser


def main(argv=None, registry: Registry | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config) if args.config else {}
        reg = registry if registry is not None else Registry()
        if registry is None:
            reg.load_config(cfg)
        if args.command == "list-catalog":
            rows = list_catalog(reg)
            if args.out:
                write_summary(Path(args.out), "list-catalog", None, [], {"entries": rows})
            return 0
        ctx = Context(args, cfg, reg)
        if args.threads:
            _accel.set_threads(args.threads)
        command = args.command
        if command == "run":
            command = args.scenario or cfg.get("scenario")
            if command not in SCENARIOS:
                raise ConfigError(f"unknown or missing scenario {command!r}; expected one of {SCENARIOS}")
        ctx.out.mkdir(parents=True, exist_ok=True)
        asserts, res = COMMANDS[command](ctx)
    except (ConfigError, CatalogError) as exc:
        print(f"wignerfio: config error: {exc}", file=sys.stderr)
        return 2
    except (CertificationError, KernelMemoryError) as exc:
        print(f"wignerfio: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    passed = write_summary(ctx.out, command, ctx, asserts, res)
    for a in asserts:
        log.info("%s %s value=%s tol=%s", "PASS" if a["passed"] else "FAIL", a["name"], a["value"], a["tolerance"])
    print(f"{command}: {'PASS' if passed else 'FAIL'} ({sum(a['passed'] for a in asserts)}/{len(asserts)}) "
          f"-> {ctx.out / 'summary.json'}")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
