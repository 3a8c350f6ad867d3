"""Command-line interface.

Every command prints one JSON document on stdout. Exit codes: 0 for a
positive verdict, 1 for a negative one, 2 for input or class errors and 64
for usage errors. Each flag can also be set through ``RHOHARNACK_<FLAG>``
(upper case, dashes as underscores); flags win over the environment.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from . import __version__
from .errors import RhoHarnackError, UsageError
from .harnack import C_CAP, DOM_TOL, domination_constant, equivalence, equivalence_c1
from .kernel import RANK_TOL, circle_profile, eval_kernel_resolvent, write_margins_csv
from .matrix_io import read_matrix
from .radii import RADIUS_TOL, is_rho_contraction, rho_radius
from .reproductions import REPRODUCTIONS, run as run_reproduction
from .sampling import DEFAULT_GRID, MAX_GRID, TorusGrid, set_threads
from .selftest import run_selftest
from .spectral import UNIMODULAR_TOL, gamma_set, numerical_range_torus

THEOREMS = {
    "radius": "w_rho(T) = inf{gamma > 0 : T/gamma in C_rho}",
    "member": "T in C_rho iff spectrum in the closed disk and K_z(T) >= 0 on the disk",
    "kernel": "rho-kernel (I - conj(z)T)^-1 + (I - zT*)^-1 + (rho-2)I",
    "gamma": "unimodular spectrum of T (point spectrum on the circle)",
    "nrange": "closure of the numerical range intersected with the circle",
    "dominate": "Harnack domination: K(T1) <= c^2 K(T0) on the disk",
    "equiv": "Harnack equivalence via equal boundary kernels after unitary splitting",
    "equiv-c1": "Harnack equivalence of contractions via defect kernels",
    "reproduce": "named reproductions of the worked examples",
    "selftest": "seeded invariant suites",
}


@dataclass(frozen=True)
class GlobalConfig:
    grid_points: int = DEFAULT_GRID
    radius_tol: float = RADIUS_TOL
    dom_tol: float = DOM_TOL
    rank_tol: float = RANK_TOL
    unimodular_tol: float = UNIMODULAR_TOL
    certify: bool = False
    seed: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        g = self.grid_points
        if g < 64 or g > MAX_GRID or g & (g - 1):
            raise UsageError("grid must be a power of two between 2^6 and 2^17", grid=g)
        for name in ("radius_tol", "dom_tol", "rank_tol", "unimodular_tol"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise UsageError(f"{name} must be positive", **{name: v})
        if self.threads < 1:
            raise UsageError("threads must be positive", threads=self.threads)

    @property
    def grid(self) -> TorusGrid:
        return TorusGrid(self.grid_points)


_GLOBAL_FLAGS: dict[str, tuple[type, str]] = {
    "grid": (int, "grid_points"),
    "radius-tol": (float, "radius_tol"),
    "dom-tol": (float, "dom_tol"),
    "rank-tol": (float, "rank_tol"),
    "unimodular-tol": (float, "unimodular_tol"),
    "seed": (int, "seed"),
    "threads": (int, "threads"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _env_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


def resolve_config(ns: argparse.Namespace, environ: dict[str, str] | None = None) -> GlobalConfig:
    """Flags beat ``RHOHARNACK_*`` environment variables, which beat defaults."""
    env = os.environ if environ is None else environ
    values: dict[str, Any] = {}
    for flag, (typ, field) in _GLOBAL_FLAGS.items():
        attr = flag.replace("-", "_")
        val = getattr(ns, attr, None)
        if val is None:
            raw = env.get("RHOHARNACK_" + attr.upper())
            if raw not in (None, ""):
                try:
                    val = typ(raw)
                except ValueError:
                    raise UsageError(f"bad value for RHOHARNACK_{attr.upper()}: {raw!r}") from None
        if val is not None:
            values[field] = val
    cert = getattr(ns, "certify", None)
    if cert is None and env.get("RHOHARNACK_CERTIFY"):
        cert = _env_bool(env["RHOHARNACK_CERTIFY"])
    if cert is not None:
        values["certify"] = bool(cert)
    return GlobalConfig(**values)


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--grid", type=int, default=None, help="torus grid points (power of two, default 2048)")
    g.add_argument("--radius-tol", type=float, default=None)
    g.add_argument("--dom-tol", type=float, default=None)
    g.add_argument("--rank-tol", type=float, default=None)
    g.add_argument("--unimodular-tol", type=float, default=None)
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--threads", type=int, default=None)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="rhoharnack", description="Harnack order toolkit for rho-contractions.")
    parser.add_argument("--version", action="version", version=f"rhoharnack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add("radius", "operator radius w_rho")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--tol", type=float, default=None, help="bisection tolerance (alias of --radius-tol)")

    p = add("member", "class membership")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--input", required=True)

    p = add("kernel", "evaluate the rho-kernel")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--z", default="0", help="point of the disk: 're,im' or Python complex syntax")
    p.add_argument("--csv", default=None, help="write per-angle margins on the unit circle")

    p = add("gamma", "unimodular spectrum")
    p.add_argument("--input", required=True)

    p = add("nrange", "numerical range on the circle")
    p.add_argument("--input", required=True)
    p.add_argument("--angles", type=int, default=4096)
    p.add_argument("--csv", default=None)

    p = add("dominate", "Harnack domination constant")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--t1", required=True)
    p.add_argument("--t0", required=True)
    p.add_argument("--certify", action="store_const", const=True, default=None)
    p.add_argument("--samples", action="store_true", help="include per-sample ratios")

    p = add("equiv", "Harnack equivalence")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--t", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--c1", action="store_true", help="contraction criterion (no torus sampling)")
    p.add_argument("--samples", action="store_true", help="include per-sample kernel comparison")

    p = add("reproduce", "run named reproductions")
    p.add_argument("--name", required=True, choices=sorted(REPRODUCTIONS) + ["all"])

    add("selftest", "run invariant suites")
    return parser


def _finite(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isfinite(f):
            return f
        return "nan" if math.isnan(f) else ("inf" if f > 0 else "-inf")
    if isinstance(obj, (complex, np.complexfloating)):
        return [_finite(obj.real), _finite(obj.imag)]
    return obj


def _emit(payload: dict, stream=None) -> None:
    stream = stream or sys.stdout
    stream.write(json.dumps(_finite(payload), sort_keys=False) + "\n")


def _read(path: str) -> np.ndarray:
    try:
        return read_matrix(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}", path=path) from None


def _parse_z(text: str) -> complex:
    text = text.strip()
    try:
        if "," in text:
            re_, im = text.split(",", 1)
            return complex(float(re_), float(im))
        return complex(text.replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse z: {text!r}") from None


def _cmd_radius(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    T = _read(ns.input)
    tol = ns.tol if ns.tol is not None else cfg.radius_tol
    if not tol > 0:
        raise UsageError("tol must be positive")
    rep = rho_radius(T, ns.rho, tol, cfg.grid)
    return 0, rep.to_dict()


def _cmd_member(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    T = _read(ns.input)
    m = is_rho_contraction(T, ns.rho, cfg.grid, radius_tol=cfg.radius_tol, unimodular_tol=cfg.unimodular_tol)
    return (0 if m.verdict == "yes" else 1), m.to_dict()


def _cmd_kernel(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    T = _read(ns.input)
    z = _parse_z(ns.z)
    out = eval_kernel_resolvent(T, ns.rho, z, rank_tol=cfg.rank_tol).to_dict()
    if ns.csv:
        th, mins, dims = circle_profile(T, ns.rho, cfg.grid, rank_tol=cfg.rank_tol)
        write_margins_csv(ns.csv, th, mins, dims)
        out["csv"] = ns.csv
        out["circle_margin"] = float(np.min(mins))
    return 0, out


def _cmd_gamma(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    return 0, gamma_set(_read(ns.input), cfg.unimodular_tol).to_dict()


def _cmd_nrange(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    if ns.angles < 256:
        raise UsageError("--angles must be at least 256")
    res = numerical_range_torus(_read(ns.input), ns.angles)
    if ns.csv:
        res.write_csv(ns.csv)
    out = res.to_dict()
    out["angles_sampled"] = ns.angles
    return 0, out


def _cmd_dominate(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    T1, T0 = _read(ns.t1), _read(ns.t0)
    rep = domination_constant(T1, T0, ns.rho, cfg.grid, certify=cfg.certify, rank_tol=cfg.rank_tol,
                              dom_tol=cfg.dom_tol, c_cap=C_CAP)
    return (0 if rep.dominated else 1), rep.to_dict(samples=ns.samples)


def _cmd_equiv(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    T, S = _read(ns.t), _read(ns.s)
    if ns.c1:
        if ns.rho != 1.0:
            raise UsageError("--c1 applies to rho = 1 only")
        rep = equivalence_c1(T, S, rank_tol=cfg.rank_tol)
    else:
        rep = equivalence(T, S, ns.rho, cfg.grid, rank_tol=cfg.rank_tol, dom_tol=cfg.dom_tol)
    code = 0 if rep.equivalent else (2 if rep.failure_reason == "ClassViolation" else 1)
    return code, rep.to_dict(samples=ns.samples)


def _cmd_reproduce(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    outs = run_reproduction(ns.name)
    ok = all(o.passed for o in outs)
    return (0 if ok else 1), {"passed": ok, "outcomes": [o.to_dict() for o in outs]}


def _cmd_selftest(ns, cfg: GlobalConfig) -> tuple[int, dict]:
    res = run_selftest(cfg.seed, cfg.grid)
    return (0 if res["passed"] else 1), res


COMMANDS = {
    "radius": _cmd_radius, "member": _cmd_member, "kernel": _cmd_kernel, "gamma": _cmd_gamma,
    "nrange": _cmd_nrange, "dominate": _cmd_dominate, "equiv": _cmd_equiv,
    "reproduce": _cmd_reproduce, "selftest": _cmd_selftest,
}


def dispatch(argv: Sequence[str] | None = None, environ: dict[str, str] | None = None) -> int:
    """Run one command; returns the process exit code."""
    command = None
    try:
        ns = build_parser().parse_args(argv)
        command = ns.command
        cfg = resolve_config(ns, environ)
        set_threads(cfg.threads)
        code, result = COMMANDS[command](ns, cfg)
        key = "equiv-c1" if command == "equiv" and getattr(ns, "c1", False) else command
        payload = {"command": command, "theorem": THEOREMS[key], "config": asdict(cfg), "result": result}
        if command == "selftest":
            # thread count must not leak into the byte-compared output
            payload["config"].pop("threads")
        _emit(payload)
        return code
    except RhoHarnackError as exc:
        err = {"command": command, "error": exc.to_dict()}
        _emit(err)
        _emit(err, sys.stderr)
        return exc.exit_code


def main() -> None:
    sys.exit(dispatch())
