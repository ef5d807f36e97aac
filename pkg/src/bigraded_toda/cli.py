"""Command-line front end: build objects and run identity batteries.

Exit codes: 0 all checks pass, 1 some check fails, 2 bad configuration,
3 an algebraic step failed (inexact integration or an operator window error).
"""
from __future__ import annotations

import argparse
import itertools
import json
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional

from .algebra import AlgebraError
from .dispersionless import (
    check_against_dispersive,
    check_metric_inverse,
    check_pencil_shift,
    check_quasihomogeneity,
    generating_function_check,
)
from .hamiltonian import HamiltonianStructure
from .lax import FlowIndex, hierarchy
from .reference_matrices import available, compare_with_reference
from .reports import SCHEMA_VERSION, CheckReport, summarize
from .tau import TauStructure

THREADS_ENV = "BIGRADED_TODA_THREADS"

CONSTRUCT_KINDS = ("root-n", "root-m", "log", "W", "B", "A", "density", "omega")
BATTERIES = ("zs", "tau", "involution", "recursion", "matrices", "frobenius", "all")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    target: str
    N: int
    M: int
    K: int
    pmax: int = 1
    alpha: Optional[int] = None
    p: Optional[int] = None
    beta: Optional[int] = None
    q: Optional[int] = None
    lo: Optional[int] = None
    hi: Optional[int] = None
    samples: int = 50
    seed: int = 0
    tol: float = 1e-8
    fmt: str = "text"
    output: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.N < 1 or self.M < 1:
            raise ConfigError("N and M must be positive")
        if self.K < 0 or self.pmax < 0 or self.samples < 1 or self.tol <= 0:
            raise ConfigError("K, pmax must be non-negative; samples and tol positive")
        for a in (self.alpha, self.beta):
            if a is not None and not -self.M <= a <= self.N - 1:
                raise ConfigError(f"alpha={a} outside [-{self.M}, {self.N - 1}]")
        for x in (self.p, self.q):
            if x is not None and x < 0:
                raise ConfigError("flow level must be non-negative")
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ConfigError(f"empty window [{self.lo}, {self.hi}]")
        return self


_TERM = re.compile(r"\s*([+-]?)\s*(\d+|N|M)")


def parse_alpha(text: Optional[str], N: int, M: int) -> Optional[int]:
    """Integers or expressions such as ``-M`` and ``N-1``."""
    if text is None:
        return None
    pos, total = 0, 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or (pos and not m.group(1)):
            raise ConfigError(f"cannot parse flow index {text!r}")
        token = m.group(2)
        val = N if token == "N" else M if token == "M" else int(token)
        total += -val if m.group(1) == "-" else val
        pos = m.end()
    if not text:
        raise ConfigError("empty flow index")
    return total


# ---------------------------------------------------------------------------
# construct


def _render(obj, fmt: str):
    if fmt == "json":
        return obj.to_json()
    if fmt == "latex":
        return obj.to_latex()
    return str(obj)


def _flow(cfg: RunConfig, which: str = "a") -> FlowIndex:
    alpha, p = (cfg.alpha, cfg.p) if which == "a" else (cfg.beta, cfg.q)
    if alpha is None or p is None:
        flag = "--alpha/--p" if which == "a" else "--beta/--q"
        raise ConfigError(f"{flag} required")
    return FlowIndex(alpha, p)


def construct(cfg: RunConfig):
    h = hierarchy(cfg.N, cfg.M, cfg.K)
    N, M = cfg.N, cfg.M
    kind = cfg.target
    if kind == "root-n":
        return {"root_N": _render(h.root_N(N + M if cfg.lo is None else -cfg.lo), cfg.fmt)}
    if kind == "root-m":
        return {"root_M": _render(h.root_M(N + M if cfg.hi is None else cfg.hi), cfg.fmt)}
    if kind == "log":
        lo = -N if cfg.lo is None else cfg.lo
        hi = M if cfg.hi is None else cfg.hi
        return {f"w[{k}]": _render(c, cfg.fmt) for k, c in h.log_coefficients(lo, hi).items()}
    if kind == "W":
        depth = N + M if cfg.lo is None else -cfg.lo
        height = N + M if cfg.hi is None else cfg.hi
        return {"W_minus": _render(h.W_minus(depth), cfg.fmt),
                "W_nonneg": _render(h.W_nonneg(height), cfg.fmt)}
    if kind == "B":
        idx = _flow(cfg)
        return {f"B[{idx.alpha},{idx.p}]": _render(h.B_operator(idx, lo=cfg.lo, hi=cfg.hi), cfg.fmt)}
    if kind == "A":
        idx = _flow(cfg)
        return {f"A[{idx.alpha},{idx.p}]": _render(h.flow_generator(idx), cfg.fmt)}
    if kind == "density":
        idx = _flow(cfg)
        return {f"h[{idx.alpha},{idx.p}]": _render(h.density(idx), cfg.fmt)}
    if kind == "omega":
        a, b = _flow(cfg, "a"), _flow(cfg, "b")
        om = TauStructure(h).omega(a, b)
        return {f"Omega[{a.alpha},{a.p};{b.alpha},{b.p}]": _render(om, cfg.fmt)}
    raise ConfigError(f"unknown object {kind!r}")


# ---------------------------------------------------------------------------
# check batteries

Task = Callable[[], List[CheckReport]]


def _one(fn, *args) -> Task:
    return lambda: [fn(*args)]


def zs_tasks(cfg: RunConfig) -> List[Task]:
    h = hierarchy(cfg.N, cfg.M, cfg.K)
    idx = h.all_indices(cfg.pmax)
    return [_one(h.check_zakharov_shabat, a, b) for a, b in itertools.combinations(idx, 2)]


def tau_tasks(cfg: RunConfig) -> List[Task]:
    t = TauStructure(hierarchy(cfg.N, cfg.M, cfg.K))
    idx = t.hier.all_indices(cfg.pmax)
    out: List[Task] = []
    for a, b in itertools.combinations_with_replacement(idx, 2):
        out += [_one(t.check_tau_symmetry, a, b), _one(t.check_cross_oracle, a, b),
                _one(t.check_omega_definition, a, b), _one(t.check_omega_symmetry, a, b),
                _one(t.check_omega_degree, a, b)]
    out += [_one(t.check_tau_closedness, *c) for c in itertools.combinations_with_replacement(idx, 3)]
    out += [_one(t.check_density_from_omega, FlowIndex(a.alpha, a.p)) for a in idx if a.p < cfg.pmax]
    return out


def involution_tasks(cfg: RunConfig) -> List[Task]:
    ham = HamiltonianStructure(hierarchy(cfg.N, cfg.M, cfg.K))
    idx = ham.hier.all_indices(cfg.pmax)
    return [_one(ham.check_involution, a, b, w)
            for a, b in itertools.combinations_with_replacement(idx, 2) for w in (1, 2)]


def recursion_tasks(cfg: RunConfig) -> List[Task]:
    ham = HamiltonianStructure(hierarchy(cfg.N, cfg.M, cfg.K))
    out: List[Task] = []
    for a in ham.hier.all_indices(cfg.pmax):
        out += [_one(ham.check_recursion_operator, a), _one(ham.check_recursion, a),
                _one(ham.check_lax_flow, a), _one(ham.check_density_formulas, a)]
    return out


def matrices_tasks(cfg: RunConfig) -> List[Task]:
    ham = HamiltonianStructure(hierarchy(cfg.N, cfg.M, cfg.K))
    out: List[Task] = []
    for which in (1, 2):
        if (cfg.N, cfg.M, which) in available():
            out.append(lambda w=which: compare_with_reference(ham, w))
        out.append(lambda w=which: _explicit_reports(ham, w))
    return out


def _explicit_reports(ham: HamiltonianStructure, which: int) -> List[CheckReport]:
    from .reports import element_report

    rng = range(-ham.M, ham.N)
    return [element_report(f"component-bracket-P{which}", [ham.N, ham.M, n, m],
                           ham.bracket_entry(which, n, m) - ham.explicit_bracket_entry(which, n, m), ham.K)
            for n in rng for m in rng]


def frobenius_tasks(cfg: RunConfig) -> List[Task]:
    N, M = cfg.N, cfg.M
    out: List[Task] = [
        _one(check_metric_inverse, N, M, cfg.samples, cfg.seed, cfg.tol),
        _one(check_quasihomogeneity, N, M),
        _one(check_pencil_shift, N, M),
    ]
    for which in (1, 2):
        out.append(_one(generating_function_check, which, N, M, cfg.samples, cfg.seed, min(cfg.tol, 1e-10)))
        out.append(_one(check_against_dispersive, which, N, M))
    return out


_BATTERIES = {
    "zs": zs_tasks,
    "tau": tau_tasks,
    "involution": involution_tasks,
    "recursion": recursion_tasks,
    "matrices": matrices_tasks,
    "frobenius": frobenius_tasks,
}


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive")
    return n


def run_battery(cfg: RunConfig) -> List[CheckReport]:
    names = [b for b in BATTERIES if b != "all"] if cfg.target == "all" else [cfg.target]
    tasks = [t for name in names for t in _BATTERIES[name](cfg)]
    threads = thread_count()
    if threads == 1:
        results = [task() for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda task: task(), tasks))
    return [r for batch in results for r in batch]


# ---------------------------------------------------------------------------
# output


def format_reports(reports: List[CheckReport], fmt: str) -> str:
    summary = summarize(reports)
    if fmt == "json":
        return json.dumps(summary, indent=2, sort_keys=True)
    ordered = sorted(reports, key=lambda r: (r.identity, json.dumps(r.to_json()["indices"])))
    if fmt == "latex":
        rows = [r.line().replace("_", r"\_") for r in ordered]
        return "\\begin{itemize}\n" + "\n".join(f"  \\item {x}" for x in rows) + "\n\\end{itemize}"
    lines = [r.line() for r in ordered]
    lines.append(f"{sum(r.passed for r in reports)}/{len(reports)} passed")
    return "\n".join(lines)


def format_construct(cfg: RunConfig, payload: dict) -> str:
    if cfg.fmt == "json":
        doc = {"schema": SCHEMA_VERSION, "object": cfg.target, "N": cfg.N, "M": cfg.M, "K": cfg.K,
               "value": payload}
        return json.dumps(doc, indent=2, sort_keys=True)
    return "\n".join(f"{k} = {v}" for k, v in payload.items())


def _emit(text: str, path: Optional[str]):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


# ---------------------------------------------------------------------------
# argument parsing


def _common(sp: argparse.ArgumentParser, K: int):
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--M", type=int, required=True)
    sp.add_argument("--K", type=int, default=K, help="eps truncation order")
    sp.add_argument("--format", dest="fmt", choices=("text", "json", "latex"), default="text")
    sp.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bigraded-toda", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build and print an object")
    c.add_argument("target", choices=CONSTRUCT_KINDS)
    _common(c, 2)
    for flag in ("--alpha", "--beta"):
        c.add_argument(flag, help="flow index, e.g. 0, -M or N-1")
    c.add_argument("--p", type=int)
    c.add_argument("--q", type=int)
    c.add_argument("--lo", type=int, help="lowest Lambda-order to compute")
    c.add_argument("--hi", type=int, help="highest Lambda-order to compute")

    k = sub.add_parser("check", help="run an identity battery")
    k.add_argument("target", choices=BATTERIES)
    _common(k, 3)
    k.add_argument("--pmax", type=int, default=1)
    k.add_argument("--samples", type=int, default=50)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--tol", type=float, default=1e-8)

    f = sub.add_parser("check-frobenius", help="numeric and symbolic checks of the flat pencil")
    _common(f, 1)
    f.add_argument("--samples", type=int, default=50)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--tol", type=float, default=1e-8)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "check-frobenius":
        args.command, args.target = "check", "frobenius"
    kw = dict(command=args.command, target=args.target, N=args.N, M=args.M, K=args.K,
              fmt=args.fmt, output=args.output)
    if args.command == "construct":
        kw.update(alpha=parse_alpha(args.alpha, args.N, args.M), p=args.p,
                  beta=parse_alpha(args.beta, args.N, args.M), q=args.q, lo=args.lo, hi=args.hi)
    else:
        kw.update(pmax=getattr(args, "pmax", 1), samples=args.samples, seed=args.seed, tol=args.tol)
    return RunConfig(**kw).validate()


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        if cfg.command == "construct":
            _emit(format_construct(cfg, construct(cfg)), cfg.output)
            return 0
        reports = run_battery(cfg)
        _emit(format_reports(reports, cfg.fmt), cfg.output)
        return 0 if all(r.passed for r in reports) else 1
    except AlgebraError as exc:
        sys.stderr.write(f"{args.command} {args.target}: {type(exc).__name__}: {exc}\n")
        return 3
    except ValueError as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
