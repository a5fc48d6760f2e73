"""Command-line interface: ``qfracsl <command> [flags]``.

Commands write JSON for structured results and CSV for tables.  With
``--out`` the result goes to that file and the full run configuration to
``<out>.config.json``; without it the result is printed.  Flags override the
values of a ``--config`` JSON file.

Exit codes: 0 success, 1 check failure, 2 configuration error, 3 numerical
failure.

Coefficient and trial-function expressions use this grammar::

    expr    = term , { ("+" | "-") , term } ;
    term    = unary , { ("*" | "/") , unary } ;
    unary   = "-" , unary | power ;
    power   = atom , [ "^" , unary ] ;
    atom    = number | name | call | "(" , expr , ")" ;
    call    = func , "(" , expr , { "," , expr } , ")" ;
    func    = "pow" | "qgamma" | "qsin" | "qcos" ;
    name    = "x" | "q" | "a" ;
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import identities
from .eigensolve import EigenConvergenceError
from .exprparse import ExprEvalError, ExprSyntaxError, evaluate_array, parse
from .qcore import LatticeError, LatticeFn, QLattice, SymLatticeFn
from .qfourier import BoundaryError as FourierBoundaryError
from .qfourier import decay_rate, fourier_coeffs, holder_estimate, qmean_dist, sine_coeffs, synthesize_nodes
from .qspecial import BracketError, TrigBasis, q_sin_extended
from .ritz import ProblemError, SLProblem, convergence_sweep, spectrum
from .variational import BoundaryError, example_undamped, example_damped, rayleigh

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3
SIG_DIGITS = 12
SPECTRUM_KEYS = ("q", "a", "alpha", "m", "eigenvalues", "coefficients", "w_k", "mu_k", "residuals")


class ConfigError(ValueError):
    """A run configuration fails validation."""


@dataclass
class RunConfig:
    q: float = 0.5
    a: float = 1.0
    alpha: float = 0.75
    depth: int = 64
    p_src: str = "1"
    r_src: str = "0"
    w_src: str = "1"
    m: int = 8
    n_eigs: int = 3
    K: int = 8
    tolerances: Dict[str, float] = field(default_factory=lambda: dict(identities.TOLERANCES))
    output_path: Optional[str] = None
    # command-specific inputs
    f_src: str = "x * (a - x)"
    y_src: str = "x * (a - x)"
    m_list: List[int] = field(default_factory=lambda: [2, 4, 8, 12])
    example: str = "undamped"
    lam: Optional[float] = None

    def validate(self) -> "RunConfig":
        def need(ok, msg):
            if not ok:
                raise ConfigError(msg)

        for name in ("q", "a", "alpha"):
            need(isinstance(getattr(self, name), (int, float)), f"{name} must be a number")
        need(0.0 < self.q < 1.0, f"q must lie in (0, 1), got {self.q}")
        need(self.a > 0.0 and math.isfinite(self.a), f"a must be positive, got {self.a}")
        need(0.0 < self.alpha <= 1.0, f"alpha must lie in (0, 1], got {self.alpha}")
        for name in ("depth", "m", "n_eigs", "K"):
            need(isinstance(getattr(self, name), int), f"{name} must be an integer")
        need(self.depth >= 16, f"depth must be at least 16, got {self.depth}")
        need(self.m >= 1, f"m must be positive, got {self.m}")
        need(1 <= self.n_eigs <= self.m, f"n_eigs must lie in 1..m, got {self.n_eigs}")
        need(self.K >= 1, f"K must be positive, got {self.K}")
        need(isinstance(self.tolerances, dict), "tolerances must be a mapping")
        for key, val in self.tolerances.items():
            need(key in identities.TOLERANCES, f"unknown tolerance {key!r}")
            need(isinstance(val, (int, float)) and math.isfinite(val) and val > 0, f"tolerance {key} must be positive")
        need(len(self.m_list) > 0 and all(isinstance(v, int) and v >= 1 for v in self.m_list), "m_list must hold positive integers")
        need(list(self.m_list) == sorted(set(self.m_list)), "m_list must be strictly ascending")
        need(self.example in ("undamped", "damped"), f"example must be undamped or damped, got {self.example!r}")
        for name in ("p_src", "r_src", "w_src", "f_src", "y_src"):
            try:
                parse(getattr(self, name))
            except ExprSyntaxError as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        return self

    def lattice(self) -> QLattice:
        return QLattice(self.q, self.a, self.depth)

    def problem(self) -> SLProblem:
        if self.alpha <= 0.5:
            raise ConfigError(f"the eigenproblem needs alpha > 1/2, got {self.alpha}")
        return SLProblem(self.lattice(), self.alpha, self.p_src, self.r_src, self.w_src)

    def tol(self, key: str) -> float:
        return float(self.tolerances.get(key, identities.TOLERANCES[key]))


# -- formatting ------------------------------------------------------------------


def _round(v):
    """Round floats to ``SIG_DIGITS`` significant digits, recursively."""
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_round(x) for x in v]
    if isinstance(v, dict):
        return {k: _round(x) for k, x in v.items()}
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if not math.isfinite(v) else float(f"{v:.{SIG_DIGITS}g}")
    return v


def _num(v) -> str:
    return f"{float(v):.{SIG_DIGITS}g}"


def _json(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(text: str, config: RunConfig) -> None:
    if config.output_path is None:
        sys.stdout.write(text)
        return
    with open(config.output_path, "w", encoding="utf-8") as fh:
        fh.write(text)
    with open(config.output_path + ".config.json", "w", encoding="utf-8") as fh:
        fh.write(json.dumps(asdict(config), indent=2, sort_keys=True) + "\n")


# -- commands --------------------------------------------------------------------


def cmd_verify(config: RunConfig) -> int:
    """Run the identity suite over the standard grid and the configured point."""
    qs = sorted(set(identities.Q_GRID) | {config.q})
    alphas = sorted(set(identities.ALPHA_GRID) | {config.alpha})
    checks = identities.full_suite(qs, alphas, config.a, config.depth, config.tolerances)
    passed = all(c.passed for c in checks)
    report = {
        "config": asdict(config),
        "tolerances": {**identities.TOLERANCES, **config.tolerances},
        "passed": passed,
        "summary": identities.summarize(checks),
        "checks": [c.as_dict() for c in checks],
    }
    _emit(_json(report), config)
    return EXIT_OK if passed else EXIT_CHECK


def cmd_zeros(config: RunConfig) -> int:
    basis = TrigBasis.build(config.lattice(), config.K, k_max=max(config.K, 8))
    rows = []
    for k in range(1, config.K + 1):
        # |S_q(w_k)| at the double-precision zero, evaluated in extended precision
        res = abs(q_sin_extended(basis.w[k - 1], config.q))
        rows.append([k, _num(basis.w[k - 1]), _num(basis.mu[k - 1]), _num(res)])
    _emit(_csv(["k", "w_k", "mu_k", "residual"], rows), config)
    return EXIT_OK


def _expr_fn(src: str, lattice: QLattice):
    tree = parse(src)
    env = {"q": lattice.q, "a": lattice.a}
    return lambda x: evaluate_array(tree, np.asarray(x, dtype=float), env)


def cmd_fourier(config: RunConfig) -> int:
    """Sine series when ``f(0) = f(a) = 0``, otherwise the full series on ``[-a, a]``."""
    lat = config.lattice()
    fn = _expr_fn(config.f_src, lat)
    basis = TrigBasis.build(lat, config.K, k_max=max(config.K, 8))
    f = LatticeFn.sample(lat, fn, extend=False)
    out = {"config": asdict(config)}
    try:
        coeffs = sine_coeffs(f, config.K, basis)
        synth = synthesize_nodes(coeffs)
        err = qmean_dist(SymLatticeFn.odd(f), SymLatticeFn.odd(synth))
        out.update(kind="sine", c=list(coeffs.c), weighted=list(np.abs(coeffs.c) * basis.mu[: config.K]))
    except FourierBoundaryError:
        g = SymLatticeFn.sample(lat, fn)
        coeffs = fourier_coeffs(g, config.K, basis)
        err = qmean_dist(g, synthesize_nodes(coeffs))
        out.update(kind="full", a0=coeffs.a0, a=list(coeffs.a), b=list(coeffs.b))
        f_sym = g
    else:
        f_sym = SymLatticeFn.odd(f)
    weighted = np.maximum(np.abs(coeffs.a), np.abs(coeffs.b)) if out["kind"] == "full" else np.abs(coeffs.c)
    weighted = weighted * basis.mu[: config.K]
    out["qmean_error"] = err
    out["decay_rate"] = decay_rate(weighted, lat.q) if config.K >= 4 else None
    out["holder_estimate"] = holder_estimate(f_sym)
    _emit(_json(out), config)
    return EXIT_OK


def spectrum_document(config: RunConfig) -> dict:
    """The spectrum JSON document with exactly :data:`SPECTRUM_KEYS`."""
    spec = spectrum(config.m, config.n_eigs, config.problem())
    basis = spec.basis
    doc = {
        "q": config.q,
        "a": config.a,
        "alpha": config.alpha,
        "m": config.m,
        "eigenvalues": list(spec.lambdas),
        "coefficients": [list(row) for row in spec.betas],
        "w_k": list(basis.w[: config.m]),
        "mu_k": list(basis.mu[: config.m]),
        "residuals": list(spec.residuals()),
    }
    return _round(doc)


def cmd_spectrum(config: RunConfig) -> int:
    _emit(_json(spectrum_document(config)), config)
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    table = convergence_sweep(config.m_list, config.n_eigs, config.problem())
    header = ["m"] + [f"lambda_{n}" for n in range(1, config.n_eigs + 1)] + ["monotone"]
    rows = []
    for i, m in enumerate(table.m_list):
        prev = table.lambdas[i - 1] if i else None
        cur = table.lambdas[i]
        ok = prev is None or all(
            np.isnan(p) or c <= p + 1e-10 * max(1.0, abs(p)) for p, c in zip(prev, cur)
        )
        rows.append([m] + ["nan" if np.isnan(v) else _num(v) for v in cur] + ["yes" if ok else "no"])
    _emit(_csv(header, rows), config)
    for line in table.violations:
        print(line, file=sys.stderr)
    return EXIT_OK if table.monotone else EXIT_CHECK


def cmd_rayleigh(config: RunConfig) -> int:
    prob = config.problem()
    y = LatticeFn.sample(prob.lattice, _expr_fn(config.y_src, prob.lattice), extend=False)
    value = rayleigh(y, prob)
    if config.output_path is None:
        print(_num(value))
    else:
        _emit(_json({"config": asdict(config), "rayleigh": value}), config)
    return EXIT_OK


def cmd_el_check(config: RunConfig) -> int:
    """Residual of a worked isoperimetric example against the isoperimetric tolerance."""
    build = example_undamped if config.example == "undamped" else example_damped
    try:
        ex = build(config.lattice(), config.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    res = ex.residual(config.lam)
    tol = config.tol("isoperimetric")
    doc = {
        "config": asdict(config),
        "example": config.example,
        "lambda": ex.lam if config.lam is None else config.lam,
        "scaled_sup": res.scaled_sup(),
        "sup": res.sup(),
        "tolerance": tol,
        "passed": res.scaled_sup() <= tol,
    }
    _emit(_json(doc), config)
    return EXIT_OK if doc["passed"] else EXIT_CHECK


COMMANDS = {
    "verify": cmd_verify,
    "zeros": cmd_zeros,
    "fourier": cmd_fourier,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "rayleigh": cmd_rayleigh,
    "el-check": cmd_el_check,
}


# -- argument handling ---------------------------------------------------------------


def _tolerance_pair(text: str):
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError("expected NAME=VALUE")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}") from None


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfracsl",
        description="q-fractional calculus on q-geometric lattices and the q-fractional Sturm-Liouville problem.",
        epilog=__doc__.split("\n\n", 3)[-1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    add = parser.add_argument
    # defaults of None mean "not given": the config file or RunConfig default applies
    add("--config", help="JSON file with RunConfig fields")
    add("--q", type=float)
    add("--a", type=float)
    add("--alpha", type=float)
    add("--depth", type=int)
    add("--m", type=int)
    add("--n-eigs", dest="n_eigs", type=int)
    add("--K", type=int)
    add("--p", dest="p_src", help="coefficient p(x)")
    add("--r", dest="r_src", help="coefficient r(x)")
    add("--w", dest="w_src", help="weight w(x)")
    add("--f", dest="f_src", help="function for the fourier command")
    add("--y", dest="y_src", help="trial function for the rayleigh command")
    add("--m-list", dest="m_list", type=_int_list, help="basis sizes for sweep, e.g. 2,4,8,12")
    add("--example", choices=("undamped", "damped"), help="worked example for el-check")
    add("--lam", type=float, help="multiplier for el-check (default: the example's)")
    add("--tol", action="append", type=_tolerance_pair, default=None, metavar="NAME=VALUE")
    add("--out", dest="output_path", help="output file (a .config.json sidecar is written next to it)")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for f in fields(RunConfig):
        given = getattr(args, f.name, None)
        if given is not None and f.name != "tolerances":
            values[f.name] = given
    tols = dict(identities.TOLERANCES)
    tols.update(values.get("tolerances", {}) or {})
    tols.update(dict(args.tol or []))
    values["tolerances"] = tols
    return RunConfig(**values).validate()


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
    except (ConfigError, TypeError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](config)
    except (ConfigError, ProblemError, BoundaryError, ExprSyntaxError, LatticeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (
        ArithmeticError,
        BracketError,
        EigenConvergenceError,
        ExprEvalError,
        ValueError,
    ) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
