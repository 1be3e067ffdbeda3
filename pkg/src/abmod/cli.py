"""Command line front end: ``abmod <command> [--in FILE] [--out FILE] ...``.

Input is one JSON document, output is one JSON report.  Exit status is 0 on
success, 1 on a mathematical error or a failed verification case, 2 on a
usage error.
"""

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .change import ChangeOfVariable, pushforward
from .classify import (default_order, empirical_L, extract_gamma, find_L,
                       invariant_report, rank2_theme_param, semisimplicity_witness)
from .errors import AbModError, MathError, ParseError, UsageError, ValidationError
from .module import (AbModule, FrescoPresentation, module_from_presentation,
                     presentation_from_module, principal_jh, saturate_and_bernstein)
from .series import TruncSeries
from .suites import SUITE_NAMES, run_suite
from . import linalg

COMMANDS = ("invariants", "bernstein", "jh", "pushforward", "classify", "verify")
TOP_FIELDS = {"command", "input", "theta", "options"}
OPTION_FIELDS = {"order", "guard", "suite", "seed", "decimal"}
PRESENTATION_FIELDS = {"lambda1", "p", "S", "order"}
MODULE_FIELDS = {"action", "order"}


@dataclass
class JobSpec:
    command: str
    input: object = None
    theta: Optional[ChangeOfVariable] = None
    options: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# parsing

def parse_rational(x, where: str) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, str)):
        raise ParseError(f"{where}: expected a rational string 'p/q', got {x!r}")
    try:
        return Fraction(x)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"{where}: malformed rational {x!r}") from None


def _int(x, where, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        raise ValidationError(f"{where}: must be >= {minimum}")
    return x


def _list(x, where):
    if not isinstance(x, list):
        raise ParseError(f"{where}: expected a list")
    return x


def _reject_unknown(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ParseError(f"{where}: unknown field(s) {extra}")


def _series(x, order, where):
    coeffs = [parse_rational(c, f"{where}[{i}]") for i, c in enumerate(_list(x, where))]
    return TruncSeries(coeffs or [0], order)


def _parse_input(obj, order_override):
    if not isinstance(obj, dict):
        raise ParseError("input: expected an object")
    if "action" in obj:
        _reject_unknown(obj, MODULE_FIELDS, "input")
        order = order_override or _int(obj.get("order"), "input.order", 1)
        rows = _list(obj["action"], "input.action")
        k = len(rows)
        if k == 0:
            raise ValidationError("input.action: empty matrix")
        action = []
        for i, row in enumerate(rows):
            row = _list(row, f"input.action[{i}]")
            if len(row) != k:
                raise ValidationError(f"input.action[{i}]: expected {k} entries")
            action.append([_series(x, order, f"input.action[{i}][{j}]")
                           for j, x in enumerate(row)])
        return AbModule(action, order)
    _reject_unknown(obj, PRESENTATION_FIELDS, "input")
    for name in ("lambda1", "p", "S", "order"):
        if name not in obj:
            raise ParseError(f"input.{name}: missing")
    lam = parse_rational(obj["lambda1"], "input.lambda1")
    p = [_int(x, f"input.p[{i}]", 0) for i, x in enumerate(_list(obj["p"], "input.p"))]
    order = order_override or _int(obj["order"], "input.order", 1)
    S = [_series(s, order, f"input.S[{j}]") for j, s in enumerate(_list(obj["S"], "input.S"))]
    if len(S) != len(p):
        raise ValidationError("input: S and p must have the same length")
    for j, s in enumerate(S):
        if s[0] != 1:
            raise ValidationError(f"input.S[{j}]: constant term must be 1, got {s[0]}")
    try:
        return FrescoPresentation(lam, p, S, order)
    except ValueError as exc:
        raise ValidationError(f"input: {exc}") from None


def parse_spec(text, overrides: Optional[dict] = None) -> JobSpec:
    """Validated JobSpec from UTF-8 JSON; ``overrides`` come from command-line flags."""
    overrides = overrides or {}
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not UTF-8: {exc}") from None
    try:
        obj = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    _reject_unknown(obj, TOP_FIELDS, "spec")
    command = overrides.get("command") or obj.get("command")
    if command not in COMMANDS:
        raise ParseError(f"command: expected one of {list(COMMANDS)}, got {command!r}")
    opts_in = obj.get("options", {})
    _reject_unknown(opts_in, OPTION_FIELDS, "options")
    options = {"seed": 0, "decimal": False}
    for name in ("order", "guard", "seed"):
        if name in opts_in:
            options[name] = _int(opts_in[name], f"options.{name}", 0)
    if "suite" in opts_in:
        options["suite"] = opts_in["suite"]
    if "decimal" in opts_in:
        options["decimal"] = bool(opts_in["decimal"])
    for name, value in overrides.items():
        if name != "command" and value is not None:
            options[name] = value
    job = JobSpec(command, options=options)
    if command == "verify":
        suite = options.get("suite", "all")
        if suite not in SUITE_NAMES + ("all",):
            raise ValidationError(f"options.suite: unknown suite {suite!r}")
        options["suite"] = suite
        return job
    if "input" not in obj:
        raise ParseError("input: missing")
    job.input = _parse_input(obj["input"], options.get("order"))
    rank = job.input.rank
    guard = options.get("guard")
    if guard is not None and job.input.order < rank + guard:
        raise ValidationError(f"order {job.input.order} < rank + guard = {rank + guard}")
    if "theta" in obj:
        cs = [parse_rational(c, f"theta[{i}]") for i, c in enumerate(_list(obj["theta"], "theta"))]
        if not cs or cs[0] == 0:
            raise ValidationError("theta[0]: the linear coefficient must be nonzero")
        job.theta = ChangeOfVariable(cs)
    elif command == "pushforward":
        raise ParseError("theta: required for pushforward")
    return job


# ---------------------------------------------------------------------------
# serialisation

def _jsonable(x, decimal):
    if isinstance(x, Fraction):
        if decimal:
            return {"exact": str(x), "decimal": f"{float(x):.12g}"}
        return str(x)
    if isinstance(x, TruncSeries):
        return [_jsonable(c, decimal) for c in x.coeffs]
    if isinstance(x, FrescoPresentation):
        return {"lambda1": _jsonable(x.lambda1, decimal), "p": list(x.p),
                "S": [_jsonable(s, decimal) for s in x.S], "order": x.order}
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: _jsonable(getattr(x, f.name), decimal) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): _jsonable(v, decimal) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v, decimal) for v in x]
    return x


def _dump(report, decimal) -> bytes:
    return (json.dumps(_jsonable(report, decimal), indent=2, sort_keys=True) + "\n").encode()


# ---------------------------------------------------------------------------
# jobs

def _presentation(job):
    if isinstance(job.input, FrescoPresentation):
        return job.input
    return presentation_from_module(job.input)[0]


def _module(job):
    if isinstance(job.input, AbModule):
        return job.input
    return module_from_presentation(job.input)[0]


def _job_bernstein(job):
    E = _module(job)
    _, B, minimal = saturate_and_bernstein(E, job.options.get("guard"), want_module=False)
    roots, splits = linalg.rational_roots(B)
    return {"bernstein": B, "minimal": minimal, "splits": splits,
            "roots": sorted(r for r, m in roots for _ in range(m))}


def _job_jh(job):
    E = _module(job)
    jh = principal_jh(E)
    pres, _ = presentation_from_module(E, jh)
    return {"exponents": jh.exponents, "presentation": pres}


def _job_pushforward(job):
    pres = _presentation(job)
    out = pushforward(pres, job.theta, job.options.get("guard"))
    return {"theta": list(job.theta.coeffs), "presentation": out}


def _job_classify(job):
    pres = _presentation(job)
    E = _module(job)
    k = pres.rank
    out = {"rank": k, "lambda1": pres.lambda1, "p": list(pres.p)}
    if k == 2:
        out["theme_param"] = _try(lambda: rank2_theme_param(E))
    if k == 3:
        p1, p2 = pres.p
        out["gamma"] = _try(lambda: extract_gamma(E))
        w = _try(lambda: semisimplicity_witness(pres.lambda1, p1, p2, *pres.S))
        out["witness"] = w
        if p1 >= 2 and p2 >= 1:
            emp = empirical_L(pres.lambda1, p1, p2, max(pres.order, default_order(p1, p2)))
            out["L_emp"] = emp.L
            out["flags"] = [f"printed L matches: {m}" for m in emp.matches] or \
                ["no printed L formula matches L_emp"]
    out["L"] = _try(lambda: find_L(E))
    return out


def _try(fn):
    try:
        return fn()
    except MathError as exc:
        return {"error": exc.code, "message": str(exc)}


def run_job(job: JobSpec) -> bytes:
    decimal = job.options.get("decimal", False)
    cmd = job.command
    if cmd == "verify":
        cases = sorted(run_suite(job.options["suite"], job.options.get("seed", 0)),
                       key=lambda c: c.id)
        failed = [c.id for c in cases if not c.passed]
        report = {"suite": job.options["suite"], "seed": job.options.get("seed", 0),
                  "cases": cases, "case_count": len(cases),
                  "pass_count": len(cases) - len(failed), "failed": failed}
    elif cmd == "invariants":
        report = invariant_report(job.input, job.options.get("guard"))
    elif cmd == "bernstein":
        report = _job_bernstein(job)
    elif cmd == "jh":
        report = _job_jh(job)
    elif cmd == "pushforward":
        report = _job_pushforward(job)
    else:
        report = _job_classify(job)
    return _dump(report, decimal)


# ---------------------------------------------------------------------------

def _parser():
    ap = argparse.ArgumentParser(prog="abmod", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--in", dest="infile", help="JSON job file (default: stdin)")
    ap.add_argument("--out", dest="outfile", help="report file (default: stdout)")
    ap.add_argument("--order", type=int)
    ap.add_argument("--guard", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--suite", choices=SUITE_NAMES + ("all",))
    ap.add_argument("--decimal", action="store_true", default=None,
                    help="add non-authoritative decimal renderings")
    return ap


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        if args.infile:
            with open(args.infile, "rb") as fh:
                text = fh.read()
        elif args.command == "verify" and sys.stdin.isatty():
            text = b""
        else:
            text = sys.stdin.buffer.read()
        overrides = {"command": args.command, "order": args.order, "guard": args.guard,
                     "seed": args.seed, "suite": args.suite, "decimal": args.decimal}
        job = parse_spec(text, overrides)
        report = run_job(job)
        status = 0
        if job.command == "verify" and json.loads(report)["failed"]:
            status = 1
    except UsageError as exc:
        report, status = _dump({"error": exc.code, "message": str(exc)}, False), 2
    except OSError as exc:
        report, status = _dump({"error": "usage_error", "message": str(exc)}, False), 2
    except AbModError as exc:
        report, status = _dump({"error": exc.code, "message": str(exc)}, False), 1
    except AssertionError as exc:
        report, status = _dump({"error": "internal_check", "message": str(exc)}, False), 1
    if args.outfile:
        with open(args.outfile, "wb") as fh:
            fh.write(report)
    else:
        sys.stdout.buffer.write(report)
    if status:
        print(json.loads(report).get("error", "verification failed"), file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
