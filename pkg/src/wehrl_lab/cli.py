"""Command-line driver: one subcommand per verification campaign.

Exit status is 0 when every checked inequality held, 2 on a violation
(the offending instance is part of the report), 64 for bad arguments and
74 when the report cannot be written.
"""

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import metadata

import numpy as np

from .channel import channel_output, coherent_output_spectrum
from .concave import STANDARD_FAMILY, ConcaveSpec
from .coupling import pminus_formula_check
from .entropy import (classical_limit_curve, converged_average,
                      von_neumann_entropy)
from .glauber import FockDensity, bloch_limit_curve, glauber_scan, glauber_vacuum_value
from .majorization import concave_sum, spectrum, trace_concave
from .optimizer import (SearchConfig, conjecture_scan, minimize_output_concave, sample_density,
                        sample_pure_state, trial_rng)
from .spin import sphere_quadrature

SCHEMA = "wehrl-lab/report/v1"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 2, 64, 74
QUAD_ENV = "WEHRL_LAB_QUAD_LEVEL"
DEFAULT_QUAD_LEVEL = 8
STATES = ("coherent", "pure", "mixed", "maximally-mixed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_id():
    try:
        return f"artifact {metadata.version('artifact')}"
    except metadata.PackageNotFoundError:
        return "artifact (not installed)"


@dataclass
class RunSpec:
    """A validated command with its parameter map."""

    command: str
    params: dict

    def __post_init__(self):
        allowed = set(_COMMON) | set(_EXTRA.get(self.command, ()))
        unknown = set(self.params) - allowed
        if self.command not in _EXTRA:
            raise UsageError(f"unknown command {self.command!r}")
        if unknown:
            raise UsageError(f"unknown parameters for {self.command}: {sorted(unknown)}")


@dataclass
class Report:
    command: str
    params: dict
    verdict: bool
    min_slack: object
    columns: list
    rows: list
    details: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def as_json_obj(self):
        return {
            "schema": SCHEMA,
            "command": self.command,
            "parameters": {k: self.params[k] for k in sorted(self.params)},
            "build": _build_id(),
            "seed": self.params.get("seed"),
            "verdict": "pass" if self.verdict else "violation",
            "min_slack": self.min_slack,
            "columns": self.columns,
            "rows": [dict(zip(self.columns, r)) for r in self.rows],
            "details": self.details,
            "violations": self.violations,
        }


# ---------------------------------------------------------------- output

def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def _to_json(obj, indent=0):
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (bool, np.bool_, int, float, np.integer, np.floating)):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{_to_json(str(k))}: {_to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + _to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def render(report, fmt):
    if fmt == "json":
        return _to_json(report.as_json_obj()) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([v if isinstance(v, str) else _num(v) for v in row])
    return buf.getvalue()


def emit_report(report, fmt, path):
    text = render(report, fmt)
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


# ---------------------------------------------------------------- campaigns

def _function_list(tags, default):
    try:
        return tuple(ConcaveSpec.parse(t) for t in tags) if tags else default
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _state(two_j, kind, seed):
    d = two_j + 1
    if kind == "coherent":
        rho = np.zeros((d, d), dtype=complex)
        rho[-1, -1] = 1.0
        return rho
    if kind == "maximally-mixed":
        return np.eye(d, dtype=complex) / d
    rng = trial_rng(seed, 0)
    if kind == "pure":
        psi = sample_pure_state(two_j, rng)
        return np.outer(psi, psi.conj())
    return sample_density(two_j, None, rng)


def _matrix_detail(rho):
    return {"rho_real": np.asarray(rho).real.tolist(), "rho_imag": np.asarray(rho).imag.tolist()}


def run_spectrum(p):
    two_j, k = p["two_j"], p["k"]
    if k < 0:
        raise UsageError("spectrum needs k >= 0")
    exact = coherent_output_spectrum(two_j, k).eigenvalues
    up = np.zeros((two_j + 1, two_j + 1), dtype=complex)
    up[-1, -1] = 1.0
    numeric = spectrum(channel_output(two_j, k, up), renormalize=False)[: exact.size]
    delta = float(np.max(np.abs(numeric - exact)))
    rows = [(j, lam, num) for j, (lam, num) in enumerate(zip(exact, numeric))]
    return Report("spectrum", p, delta < 1e-12, -delta, ["j", "lambda", "numeric"], rows,
                  {"max_abs_delta": delta, "two_k": two_j + k})


def run_verify_majorization(p):
    fs = _function_list(p["f"], STANDARD_FAMILY)
    quad = sphere_quadrature(p["quad_level"])
    rep = conjecture_scan(p["two_j"], p["k"], fs, p["trials"], p["seed"], quad=quad,
                          n_jobs=p["threads"])
    rows = [(name, rep.min_slack[name], rep.argmin[name]["trial"], rep.argmin[name]["ensemble"])
            for name in rep.min_slack]
    return Report("verify-majorization", p, rep.passed, dict(rep.min_slack),
                  ["check", "min_slack", "trial", "ensemble"], rows,
                  {"coherent_spectrum": coherent_output_spectrum(p["two_j"], p["k"]).eigenvalues},
                  rep.violations)


def run_wehrl(p):
    two_j = p["two_j"]
    rho = _state(two_j, p["state"], p["seed"])
    value, level = converged_average(rho, "xlogx", start_level=p["quad_level"])
    bound = two_j / (two_j + 1)
    slack = value - bound
    ok = slack >= -1e-8
    rows = [(p["state"], value, von_neumann_entropy(rho), bound, slack)]
    return Report("wehrl", p, ok, slack, ["state", "wehrl", "von_neumann", "lower_bound", "slack"],
                  rows, {"final_quad_level": level},
                  [] if ok else [dict(_matrix_detail(rho), slack=slack)])


def run_berezin_lieb(p):
    rho = _state(p["two_j"], p["state"], p["seed"])
    rows, worst = [], math.inf
    for f in _function_list(p["f"], STANDARD_FAMILY):
        avg, _ = converged_average(rho, f, start_level=p["quad_level"])
        tr = trace_concave(rho, f)
        worst = min(worst, avg - tr)
        rows.append((f.tag, avg, tr, avg - tr))
    ok = worst >= -1e-9
    return Report("berezin-lieb", p, ok, worst, ["f", "classical", "trace", "gap"], rows, {},
                  [] if ok else [dict(_matrix_detail(rho), slack=worst)])


def run_limit(p):
    fs = _function_list(p["f"], (ConcaveSpec.parse("xlogx"),))
    if len(fs) != 1:
        raise UsageError("limit takes exactly one --f")
    ks = p["k_values"]
    curve = classical_limit_curve(p["two_j"], fs[0], [p["two_j"] + k for k in ks])
    rows = [(k, tk, v, e) for k, (tk, v, e) in zip(ks, curve.rows())]
    return Report("limit", p, curve.monotone, None, ["k", "two_k", "value", "abs_error"], rows,
                  {"target": curve.target, "decay_exponent": curve.exponent,
                   "monotone": curve.monotone})


def run_pminus_check(p):
    two_j, two_k = p["two_j"], p["two_k"]
    worst_res, worst_mu, mus, bad = 0.0, 0.0, [], []
    for t in range(p["trials"]):
        rng = trial_rng(p["seed"], t)
        psi = sample_pure_state(two_j, rng)
        phi = sample_pure_state(two_k, rng)
        r = pminus_formula_check(two_j, two_k, psi, phi)
        worst_res = max(worst_res, r.residual, r.norm_residual)
        worst_mu = max(worst_mu, r.mu_abs2_error)
        mus.append(r.mu)
        if max(r.residual, r.norm_residual, r.mu_abs2_error) >= 1e-12 and len(bad) < 5:
            bad.append({"trial": t, "residual": r.residual, "mu_abs2_error": r.mu_abs2_error,
                        "psi_real": psi.real.tolist(), "psi_imag": psi.imag.tolist(),
                        "phi_real": phi.real.tolist(), "phi_imag": phi.imag.tolist()})
    mus = np.array(mus)
    rows = [(two_j, two_k, abs(mus[0]) ** 2, r.mu_abs2_expected, worst_res, worst_mu)]
    return Report("pminus-check", p, not bad, -max(worst_res, worst_mu),
                  ["two_j", "two_k", "mu_abs2", "mu_abs2_expected", "max_residual",
                   "max_mu_abs2_error"], rows,
                  {"mu_real": float(mus[0].real), "mu_imag": float(mus[0].imag),
                   "mu_spread": float(np.max(np.abs(mus - mus[0])))}, bad)


def run_glauber(p):
    fs = _function_list(p["f"], STANDARD_FAMILY)
    scan = glauber_scan(p["n_max"], p["trials"], p["seed"], fs)
    rows = [(f.tag, glauber_vacuum_value(f), scan.min_slack[str(f)]) for f in fs]
    vacuum = FockDensity.vacuum(0)
    curve = bloch_limit_curve(vacuum, fs[0], p["ladder"])
    details = {"bloch_curve": {"function": fs[0].tag, "target": curve.target,
                               "rows": [list(r) for r in curve.rows()],
                               "monotone": curve.monotone, "decay_exponent": curve.exponent}}
    ok = scan.passed and curve.monotone
    return Report("glauber", p, ok, dict(scan.min_slack), ["f", "vacuum_value", "min_slack"], rows,
                  details, scan.violations)


def run_search(p):
    if p["k"] < 1:
        raise UsageError("search-min-entropy needs k >= 1")
    fs = _function_list(p["f"], (ConcaveSpec.parse("xlogx"),))
    rows, worst, ok = [], math.inf, True
    cfg = SearchConfig(restarts=p["restarts"], seed=p["seed"])
    coh = coherent_output_spectrum(p["two_j"], p["k"]).eigenvalues
    states = {}
    for f in fs:
        res = minimize_output_concave(p["two_j"], p["k"], f, cfg)
        target = concave_sum(coh, f)
        gap = res.best_value - target
        worst = min(worst, gap)
        ok = ok and -1e-9 <= gap <= 1e-6
        rows.append((f.tag, res.best_value, target, gap, res.coherent_fidelity, res.converged))
        states[f.tag] = {"real": res.best_state.real.tolist(), "imag": res.best_state.imag.tolist()}
    return Report("search-min-entropy", p, ok, worst,
                  ["f", "best_value", "coherent_value", "gap", "coherent_fidelity", "converged"],
                  rows, {"best_states": states})


CAMPAIGNS = {
    "spectrum": run_spectrum,
    "verify-majorization": run_verify_majorization,
    "wehrl": run_wehrl,
    "berezin-lieb": run_berezin_lieb,
    "limit": run_limit,
    "pminus-check": run_pminus_check,
    "glauber": run_glauber,
    "search-min-entropy": run_search,
}

_COMMON = ("seed", "format", "out", "threads", "quad_level")
_EXTRA = {
    "spectrum": ("two_j", "k"),
    "verify-majorization": ("two_j", "k", "trials", "f"),
    "wehrl": ("two_j", "state"),
    "berezin-lieb": ("two_j", "state", "f"),
    "limit": ("two_j", "f", "k_values"),
    "pminus-check": ("two_j", "two_k", "trials"),
    "glauber": ("n_max", "trials", "f", "ladder"),
    "search-min-entropy": ("two_j", "k", "f", "restarts"),
}


def dispatch(spec):
    """Run one campaign; returns ``(exit status, Report)``."""
    report = CAMPAIGNS[spec.command](spec.params)
    return (EXIT_OK if report.verdict else EXIT_VIOLATION), report


# ---------------------------------------------------------------- arguments

def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _seed(text):
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return v


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _default_quad_level():
    raw = os.environ.get(QUAD_ENV)
    if raw is None:
        return DEFAULT_QUAD_LEVEL
    try:
        return _positive(raw)
    except (ValueError, argparse.ArgumentTypeError):
        raise UsageError(f"{QUAD_ENV} must be a positive integer, got {raw!r}") from None


def build_parser(quad_default=DEFAULT_QUAD_LEVEL):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default: stdout)")
    common.add_argument("--threads", type=_positive, default=1)
    common.add_argument("--quad-level", type=_positive, default=quad_default,
                        help=f"sphere quadrature level (default from {QUAD_ENV} or 8)")

    parser = _Parser(prog="wehrl-lab", description="Coherent-state channel and entropy checks.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    sp = add("spectrum", "closed-form output spectrum of a coherent input")
    sp.add_argument("--two-j", type=_nonneg, required=True)
    sp.add_argument("--k", type=int, required=True)

    sp = add("verify-majorization", "randomized majorization and concave-inequality scan")
    sp.add_argument("--two-j", type=_nonneg, required=True)
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--trials", type=_positive, default=1000)
    sp.add_argument("--f", action="append", default=None, help="function tag (repeatable)")

    for name, help_text in (("wehrl", "classical entropy of a state"),
                            ("berezin-lieb", "classical average against Tr f(rho)")):
        sp = add(name, help_text)
        sp.add_argument("--two-j", type=_nonneg, required=True)
        sp.add_argument("--state", choices=STATES, default="coherent")
        if name == "berezin-lieb":
            sp.add_argument("--f", action="append", default=None)

    sp = add("limit", "scaled coherent output averages as K grows")
    sp.add_argument("--two-j", type=_nonneg, required=True)
    sp.add_argument("--f", action="append", default=None)
    sp.add_argument("--k-values", type=_int_list, default=[1, 2, 5, 10, 20, 50, 100, 200, 400])

    sp = add("pminus-check", "min-spin projection identity on random pairs")
    sp.add_argument("--two-j", type=_nonneg, required=True)
    sp.add_argument("--two-k", type=_nonneg, required=True)
    sp.add_argument("--trials", type=_positive, default=100)

    sp = add("glauber", "phase-space inequality and the large-spin limit")
    sp.add_argument("--n-max", type=_nonneg, default=8)
    sp.add_argument("--trials", type=_positive, default=200)
    sp.add_argument("--f", action="append", default=None)
    sp.add_argument("--ladder", type=_int_list, default=[32, 64, 128])

    sp = add("search-min-entropy", "numerical minimum of the output concave functional")
    sp.add_argument("--two-j", type=_nonneg, required=True)
    sp.add_argument("--k", type=_positive, required=True)
    sp.add_argument("--f", action="append", default=None)
    sp.add_argument("--restarts", type=_positive, default=8)
    return parser


def main(argv=None):
    try:
        parser = build_parser(_default_quad_level())
    except UsageError as exc:
        print(f"wehrl-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    args = parser.parse_args(argv)
    params = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        spec = RunSpec(args.command, params)
        status, report = dispatch(spec)
    except (UsageError, ValueError) as exc:
        parser.print_usage(sys.stderr)
        print(f"wehrl-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        emit_report(report, args.format, args.out)
    except OSError as exc:
        print(f"wehrl-lab: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
