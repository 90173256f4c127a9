"""Command-line entry point: ``kgcoulomb {spectrum,truncate,compare,sweep}``.

Exit status is 0 on success, 1 for usage errors and 2 when a solver fails.
Tables go to ``--out`` (stdout by default) as CSV or JSON; numbers carry 12
significant digits and do not depend on the locale.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import gmpy2

from . import oracle, rayleigh_ritz, rpm
from ._mp import DEFAULT_PRECISION, exact_rational, precision
from .core_model import KGError, PhysicalParameters, energy_from_W, format_real, reduce
from .frobenius import on_truncation_family, truncation_solve

log = logging.getLogger("kgcoulomb")

SCHEMA_VERSION = 1
ORACLE_TOL = 1e-5

SPECTRUM_COLUMNS = ["method", "nu", "W", "convergence_estimate", "E_squared"]
TRUNCATE_COLUMNS = ["n", "theta", "W", "delta", "trivial", "omega", "sign_consistent", "nu"]
COMPARE_COLUMNS = [
    "nu", "W_truncation", "W_rr", "W_rpm", "W_oracle",
    "dev_rr_rpm", "dev_rr_oracle", "dev_rpm_oracle", "converged_rr", "converged_rpm", "flag",
]
SWEEP_COLUMNS = ["delta", "nu", "W", "converged", "on_truncation_family"]

DEFAULTS = {
    "method": "rr",
    "count": 3,
    "tol": 1e-9,
    "rpm_tol": 1e-6,
    "precision_bits": DEFAULT_PRECISION,
    "basis_cap": rayleigh_ritz.N_CAP,
    "hankel_max": 10,
    "hankel_shift": rpm.DEFAULT_SHIFT,
    "format": "csv",
    "jobs": 1,
    "include_families": False,
    "family_n_max": 6,
}

METHOD_ALIASES = {"rr": "rayleigh_ritz", "rayleigh_ritz": "rayleigh_ritz", "rpm": "rpm",
                  "oracle": "oracle", "all": "all"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _complain(f"{self.prog}: {message}")
        raise SystemExit(1)


def _complain(msg: str) -> None:
    if sys.stderr.isatty() and "NO_COLOR" not in os.environ:
        msg = f"\x1b[31m{msg}\x1b[0m"
    print(msg, file=sys.stderr)


# --- argument types ----------------------------------------------------------

_SQRT = re.compile(r"^\s*([+-]?)\s*sqrt\((.+)\)\s*$")


def real_text(text: str) -> str:
    """Validate a real number, allowing ``sqrt(x)``, ``-sqrt(x)`` and ``p/q``."""
    try:
        parse_real(text, 64)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from None
    return text


def parse_real(text: str, bits: int):
    m = _SQRT.match(text)
    with precision(bits):
        if m:
            inner = parse_real(m.group(2), bits)
            if inner < 0:
                raise ValueError("sqrt of a negative number")
            val = gmpy2.sqrt(inner)
            return -val if m.group(1) == "-" else val
        if "/" in text:
            num, den = text.split("/", 1)
            return gmpy2.mpfr(gmpy2.mpq(num.strip()) / gmpy2.mpq(den.strip()))
        val = gmpy2.mpfr(text.strip())
        if not gmpy2.is_finite(val):
            raise ValueError("not finite")
        return val


def positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def flag(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


CONFIG_TYPES = {
    "gamma": real_text, "delta": real_text, "m": real_text, "omega": real_text, "f": real_text,
    "l": int, "n": positive_int, "method": str, "count": positive_int, "tol": positive_float,
    "rpm_tol": positive_float, "precision_bits": positive_int, "basis_cap": positive_int,
    "hankel_max": positive_int, "hankel_shift": int, "format": str, "out": str,
    "delta_min": real_text, "delta_max": real_text, "step": positive_float, "jobs": positive_int,
    "include_families": flag, "family_n_max": positive_int,
}


def read_config(path: str) -> dict:
    """key=value lines; '#' starts a comment; dashes and underscores are interchangeable."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in CONFIG_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_TYPES[key](value)
        except (argparse.ArgumentTypeError, ValueError) as exc:
            raise UsageError(f"{path}:{lineno}: {exc}") from None
    return out


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--precision-bits", type=positive_int, help="working precision in bits (default 200)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--config", help="key=value file; command-line flags take precedence")
    common.add_argument("-v", "--verbose", action="store_true")

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--gamma", type=real_text)
    problem.add_argument("--delta", type=real_text, help="reduced Coulomb strength, e.g. 2.45 or -sqrt(6)")
    problem.add_argument("--m", type=real_text)
    problem.add_argument("--omega", type=real_text)
    problem.add_argument("--f", type=real_text)
    problem.add_argument("--l", type=int)

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--count", type=positive_int, help="number of eigenvalues (default 3)")
    solver.add_argument("--tol", type=positive_float, help="Rayleigh-Ritz convergence tolerance (default 1e-9)")
    solver.add_argument("--rpm-tol", type=positive_float, help="Hankel root movement tolerance (default 1e-6)")
    solver.add_argument("--basis-cap", type=positive_int, help="largest Rayleigh-Ritz basis (default 60)")
    solver.add_argument("--hankel-max", type=positive_int, help="largest Hankel dimension D (default 10)")
    solver.add_argument("--hankel-shift", type=int, help="Hankel shift d (default 1)")

    p = _Parser(prog="kgcoulomb", description="Eigenvalues of the Klein-Gordon oscillator with a Coulomb-type term.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", parents=[common, problem, solver], help="eigenvalues at one parameter point")
    s.add_argument("--method", choices=sorted(METHOD_ALIASES))

    t = sub.add_parser("truncate", parents=[common], help="exact polynomial solutions of degree n")
    t.add_argument("--gamma", type=real_text)
    t.add_argument("--n", type=int)
    t.add_argument("--m", type=real_text)
    t.add_argument("--f", type=real_text)
    t.add_argument("--tol", type=positive_float)

    sub.add_parser("compare", parents=[common, problem, solver], help="all methods side by side")

    w = sub.add_parser("sweep", parents=[common, solver], help="W_nu(delta) over a delta range")
    w.add_argument("--gamma", type=real_text)
    w.add_argument("--delta-min", type=real_text)
    w.add_argument("--delta-max", type=real_text)
    w.add_argument("--step", type=positive_float)
    w.add_argument("--jobs", type=positive_int, help="worker processes (default 1)")
    w.add_argument("--include-families", type=flag, nargs="?", const=True,
                   help="also evaluate at the exact truncation-family deltas in range")
    w.add_argument("--family-n-max", type=positive_int)
    return p


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset options from the config file, then from DEFAULTS."""
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    for key in set(CONFIG_TYPES) | set(DEFAULTS):
        if getattr(args, key, None) is None:
            if key in conf:
                setattr(args, key, conf[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
            elif not hasattr(args, key):
                setattr(args, key, None)
    if args.method not in METHOD_ALIASES:
        raise UsageError(f"unknown method {args.method!r}")
    if args.format not in ("csv", "json"):
        raise UsageError(f"unknown format {args.format!r}")
    if args.precision_bits < 53:
        raise UsageError("precision-bits must be at least 53")
    if args.hankel_shift < 0:
        raise UsageError("hankel-shift must be >= 0")
    return args


@dataclass
class Problem:
    gamma: object
    delta: object
    physical: PhysicalParameters | None = None


def problem_from(args) -> Problem:
    phys = [args.m, args.omega, args.f, args.l]
    reduced = [args.gamma, args.delta]
    if any(v is not None for v in phys) and any(v is not None for v in reduced):
        raise UsageError("give either --gamma/--delta or --m/--omega/--f/--l, not both")
    bits = args.precision_bits
    if all(v is not None for v in reduced):
        g = parse_real(args.gamma, bits)
        if not g > 0:
            raise UsageError("gamma must be positive")
        return Problem(g, parse_real(args.delta, bits))
    if all(v is not None for v in phys):
        try:
            params = PhysicalParameters(parse_real(args.m, bits), parse_real(args.omega, bits),
                                        parse_real(args.f, bits), args.l)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        red = reduce(params, bits)
        return Problem(red.gamma, red.delta, params)
    raise UsageError("need --gamma and --delta, or all of --m --omega --f --l")


# --- output ------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        return v
    return format_real(v)


def _json_value(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    x = float(v)
    if not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(format_real(x))


@dataclass
class Table:
    command: str
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            doc = {
                "schema_version": SCHEMA_VERSION,
                "command": self.command,
                "columns": self.columns,
                "meta": {k: _json_value(v) if not isinstance(v, (list, dict)) else v for k, v in self.meta.items()},
                "rows": [{c: _json_value(r.get(c)) for c in self.columns} for r in self.rows],
            }
            return json.dumps(doc, indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()


def emit(table: Table, args) -> None:
    text = table.render(args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- commands ----------------------------------------------------------------

def _solve(method: str, prob: Problem, args):
    g, d, bits, count = prob.gamma, prob.delta, args.precision_bits, args.count
    if method == "rayleigh_ritz":
        return rayleigh_ritz.converge_spectrum(g, d, count, args.tol, bits, cap=args.basis_cap)
    if method == "rpm":
        window = rpm.default_window(g, d, count)
        return rpm.rpm_spectrum(g, d, window, D_max=args.hankel_max, tol=args.rpm_tol,
                                d=args.hankel_shift, precision_bits=bits)
    return oracle.fd_spectrum(float(g), float(d), count=count)


def cmd_spectrum(args) -> Table:
    prob = problem_from(args)
    method = METHOD_ALIASES[args.method]
    methods = ["rayleigh_ritz", "rpm", "oracle"] if method == "all" else [method]
    table = Table("spectrum", SPECTRUM_COLUMNS, meta={"gamma": prob.gamma, "delta": prob.delta})
    for m in methods:
        spec = _solve(m, prob, args)
        if not spec.eigenvalues:
            _complain(f"warning: {m}: {spec.metadata.get('diagnostic', 'no eigenvalues found')}")
        for nu, (w, est, ok) in enumerate(zip(spec.eigenvalues, spec.convergence, spec.converged)):
            if nu >= args.count:
                break
            e2 = energy_from_W(prob.physical, w, args.precision_bits).E_squared if prob.physical else None
            table.rows.append({"method": m, "nu": nu, "W": w, "convergence_estimate": est, "E_squared": e2})
            if not ok:
                _complain(f"warning: {m} nu={nu} not converged (estimate {format_real(est)})")
    return table


def spectral_index(gamma, delta, W, args, match_tol: float = 1e-8) -> int:
    """Position of W in the converged Rayleigh-Ritz spectrum at (gamma, delta)."""
    count = 3
    while count <= args.basis_cap // 2:
        spec = rayleigh_ritz.converge_spectrum(gamma, delta, count, args.tol, args.precision_bits,
                                               cap=args.basis_cap)
        for nu, w in enumerate(spec.eigenvalues):
            if abs(w - W) < match_tol:
                return nu
        if spec.eigenvalues[-1] > W:
            break
        count += 3
    raise KGError(f"W={format_real(W)} not found in the Rayleigh-Ritz spectrum at delta={format_real(delta)}")


def cmd_truncate(args) -> Table:
    if args.gamma is None or args.n is None:
        raise UsageError("truncate needs --gamma and --n")
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    bits = args.precision_bits
    gamma = args.gamma if exact_rational(args.gamma) is not None else parse_real(args.gamma, bits)
    fam = truncation_solve(gamma, args.n, bits)
    m = parse_real(args.m, bits) if args.m is not None else None
    f = parse_real(args.f, bits) if args.f is not None else None
    table = Table("truncate", TRUNCATE_COLUMNS, meta={"gamma": fam.gamma, "n": fam.n})
    omegas = {}
    if m is not None and f is not None:
        omegas = {float(d): (om, ok) for d, om, ok in fam.allowed_omegas(m, f, bits)}
    for d, triv in zip(fam.delta_roots, fam.trivial):
        om, ok = omegas.get(float(d), (None, None))
        table.rows.append({
            "n": fam.n, "theta": fam.theta, "W": fam.W, "delta": d, "trivial": triv,
            "omega": om, "sign_consistent": ok, "nu": spectral_index(fam.gamma, d, fam.W, args),
        })
    return table


@dataclass
class ComparisonRow:
    nu: int
    W_rr: object = None
    W_rpm: object = None
    W_oracle: float | None = None
    W_truncation: object = None
    converged_rr: bool | None = None
    converged_rpm: bool | None = None
    flags: list = field(default_factory=list)

    @staticmethod
    def _dev(a, b):
        if a is None or b is None:
            return None
        if isinstance(a, float) or isinstance(b, float):
            return abs(float(a) - float(b))
        return float(abs(a - b))

    @property
    def dev_rr_rpm(self):
        return self._dev(self.W_rr, self.W_rpm)

    @property
    def dev_rr_oracle(self):
        return self._dev(self.W_rr, self.W_oracle)

    @property
    def dev_rpm_oracle(self):
        return self._dev(self.W_rpm, self.W_oracle)

    def as_dict(self) -> dict:
        return {
            "nu": self.nu, "W_truncation": self.W_truncation, "W_rr": self.W_rr, "W_rpm": self.W_rpm,
            "W_oracle": self.W_oracle, "dev_rr_rpm": self.dev_rr_rpm, "dev_rr_oracle": self.dev_rr_oracle,
            "dev_rpm_oracle": self.dev_rpm_oracle, "converged_rr": self.converged_rr,
            "converged_rpm": self.converged_rpm, "flag": ";".join(self.flags),
        }


def compare(prob: Problem, args) -> list[ComparisonRow]:
    rr = _solve("rayleigh_ritz", prob, args)
    rp = _solve("rpm", prob, args)
    fd = _solve("oracle", prob, args)
    rows = [ComparisonRow(nu, W_rr=w, converged_rr=ok) for nu, (w, ok) in enumerate(zip(rr.eigenvalues, rr.converged))]
    for w in rp.eigenvalues:
        best = min(rows, key=lambda r: abs(r.W_rr - w))
        if abs(float(best.W_rr - w)) < 1e-3 and best.W_rpm is None:
            best.W_rpm, best.converged_rpm = w, True
    for r, w in zip(rows, fd.eigenvalues):
        r.W_oracle = w
    for n, W in on_truncation_family(prob.gamma, prob.delta, n_max=args.family_n_max,
                                     precision_bits=args.precision_bits):
        hit = [r for r in rows if abs(r.W_rr - W) < 1e-8]
        if not hit:
            raise KGError(f"truncation value W={format_real(W)} (n={n}) is missing from the Rayleigh-Ritz spectrum")
        hit[0].W_truncation = W
    pair_tol = 10 * max(args.tol, args.rpm_tol)
    for r in rows:
        if r.W_rpm is None:
            r.flags.append("rpm_missing")
        elif r.dev_rr_rpm > pair_tol:
            r.flags.append("rr_rpm")
        if r.dev_rr_oracle is not None and r.dev_rr_oracle > ORACLE_TOL:
            r.flags.append("rr_oracle")
        if r.dev_rpm_oracle is not None and r.dev_rpm_oracle > ORACLE_TOL:
            r.flags.append("rpm_oracle")
        if not r.converged_rr:
            r.flags.append("rr_unconverged")
    return rows


def cmd_compare(args) -> Table:
    prob = problem_from(args)
    rows = compare(prob, args)
    for r in rows:
        if r.flags:
            _complain(f"warning: nu={r.nu}: {', '.join(r.flags)}")
    return Table("compare", COMPARE_COLUMNS, [r.as_dict() for r in rows],
                 meta={"gamma": prob.gamma, "delta": prob.delta})


def sweep_grid(lo: float, hi: float, step: float) -> list[float]:
    if hi < lo:
        return []
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [float(format_real(lo + i * step)) for i in range(n)]


def _sweep_point(task):
    gamma, delta, count, tol, bits, cap = task
    spec = rayleigh_ritz.converge_spectrum(gamma, delta, count, tol, bits, cap=cap)
    return [(float(w), ok) for w, ok in zip(spec.eigenvalues, spec.converged)]


def cmd_sweep(args) -> Table:
    if args.gamma is None or args.delta_min is None or args.delta_max is None or args.step is None:
        raise UsageError("sweep needs --gamma, --delta-min, --delta-max and --step")
    bits = args.precision_bits
    gamma = parse_real(args.gamma, bits)
    if not gamma > 0:
        raise UsageError("gamma must be positive")
    lo, hi = float(parse_real(args.delta_min, bits)), float(parse_real(args.delta_max, bits))
    points = [(d, None) for d in sweep_grid(lo, hi, args.step)]
    families = []
    if points:
        for n in range(1, args.family_n_max + 1):
            fam = truncation_solve(gamma, n, bits)
            families += [(fam.n, r, fam.W) for r in fam.nontrivial_roots if lo <= r <= hi]
    if args.include_families:
        points += [(r, (n, W)) for n, r, W in families]
        points.sort(key=lambda p: float(p[0]))
    tasks = [(gamma, d, args.count, args.tol, bits, args.basis_cap) for d, _ in points]
    if args.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    table = Table("sweep", SWEEP_COLUMNS, meta={"gamma": gamma})
    for (d, fam), vals in zip(points, results):
        for nu, (w, ok) in enumerate(vals):
            mark = None
            if fam is not None and abs(w - float(fam[1])) < 1e-8:
                mark = fam[0]
            table.rows.append({"delta": d, "nu": nu, "W": w, "converged": ok, "on_truncation_family": mark})
            if not ok:
                _complain(f"warning: delta={format_real(d)} nu={nu} not converged")
    return table


COMMANDS = {"spectrum": cmd_spectrum, "truncate": cmd_truncate, "compare": cmd_compare, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = resolve(args)
        table = COMMANDS[args.command](args)
        emit(table, args)
    except UsageError as exc:
        _complain(f"usage error: {exc}")
        return 1
    except (KGError, ArithmeticError) as exc:
        _complain(f"solver failure: {exc}")
        return 2
    except OSError as exc:
        _complain(f"error: {exc}")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
