"""``narctl``: validate market files, check robust no-arbitrage, build and audit certificates.

Exit codes: 0 the criterion holds (or a file is valid / verifies), 1 error or
invalid input, 2 the criterion fails (evidence written), 3 nothing to do.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .arbitrage import ConstructionError, build_arbitrage, certificate_violations
from .cones import ConeDomainError
from .engine import (cpp_to_bank_form, bank_form_violations, cpp_violations, find_consistent_price_process,
                     run_recursion, run_recursion_bank)
from .exact import fmt, rational
from .figure import FigureError, write_figure
from .jsonio import ModelFileError, Report, load_model, load_report, save_report, trace_summary
from .market import TighteningError
from .polytopes import hormander_lift

EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_NOTHING = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _err(msg: str) -> None:
    print(f"narctl: {msg}", file=sys.stderr)


def _t_range(text: str | None):
    if text is None:
        return None
    try:
        a, b = text.split(":") if ":" in text else (text, text)
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"--t-range expects 'a:b', got {text!r}") from None
    if lo > hi or lo < 0:
        raise UsageError(f"--t-range {text!r} is empty")
    return lo, hi


def _write_trace_csv(traces: dict, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["trace", "node", "field", "status", "generators"])
        for kind, summary in traces.items():
            for nid, entry in summary.items():
                for fld, val in entry.items():
                    if val == "empty":
                        w.writerow([kind, nid, fld, "empty", ""])
                        continue
                    pts = val.get("vertices") or val.get("rays")
                    w.writerow([kind, nid, fld, "nonempty", " ".join("(" + ",".join(p) + ")" for p in pts)])


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_validate(args) -> int:
    model = load_model(args.model_file)
    print(f"valid: {model.kind} model, {model.d} assets, {len(model.tree)} nodes, horizon {model.tree.horizon}")
    return EXIT_OK


def cmd_check(args) -> int:
    model = load_model(args.model_file)
    if args.model in ("bank", "both") and model.kind != "bank":
        raise UsageError(f"--model {args.model} needs a bank-account model file")
    traces, rep = {}, None
    cone = box = None
    if args.model in ("cone", "both"):
        cone = run_recursion(model, jobs=args.jobs)
        traces["cone"] = trace_summary(cone)
    if args.model in ("bank", "both"):
        box = run_recursion_bank(model, jobs=args.jobs)
        traces["box"] = trace_summary(box)
    if cone is not None and box is not None:
        bad = [nid for nid in model.tree.ids if cone.values[nid] != hormander_lift(box.values[nid])]
        if bad:
            _err(f"cone and box recursions disagree at nodes {', '.join(bad)}")
            return EXIT_ERROR
        print("cone and box recursions agree at every node")
    trace = cone or box
    if trace.holds:
        cpp = find_consistent_price_process(model)
        if cpp is None or cpp_violations(model, cpp.Z):
            _err("recursion holds but no strictly consistent price process was found")
            return EXIT_ERROR
        rep = Report(True, traces, cpp=cpp)
        print("verdict: holds")
        print(f"consistent price process at root: ({', '.join(fmt(cpp.Z[model.tree.root]))})")
        code = EXIT_OK
    else:
        n, A = trace.failure_time(), trace.failure_set()
        rep = Report(False, traces, failure=(n, A))
        print("verdict: fails")
        print(f"failure time: {n}")
        print(f"failure set: {', '.join(A)}")
        code = EXIT_FAIL
    if args.out:
        save_report(rep, args.out)
    if args.report_dir:
        out = Path(args.report_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_trace_csv(traces, out / "trace.csv")
        if model.kind == "bank" and model.d == 3:
            write_figure(model, out / "boxes.png")
        print(f"report written to {out}")
    return code


def cmd_arbitrage(args) -> int:
    model = load_model(args.model_file)
    lam = rational(args.lam)
    trace = run_recursion(model, jobs=args.jobs)
    if trace.holds:
        print("verdict: holds; no arbitrage to construct")
        return EXIT_NOTHING
    cert = build_arbitrage(model, lam, trace)
    print("verdict: fails")
    print(f"failure time n = {cert.n}, A_n = {{{', '.join(cert.failure_set)}}}")
    print(f"adjustment time m = {cert.m}, B_m = {{{', '.join(cert.adjusted)}}}")
    for nid in model.tree.ids:
        print(f"  x[{nid}] = ({', '.join(fmt(cert.x[nid]))})")
    for nid, e in cert.eps.items():
        print(f"  eps[{nid}] = ({', '.join(fmt(e))})  [{cert.eps_mode[nid]}]")
    for leaf, p in cert.payoff.items():
        print(f"  payoff[{leaf}] = ({', '.join(fmt(p))})")
    if args.out:
        rep = Report(False, {"cone": trace_summary(trace)}, failure=(cert.n, cert.failure_set), arbitrage=cert)
        save_report(rep, args.out)
    return EXIT_FAIL


def report_violations(rep: Report, model) -> list[str]:
    out = []
    if rep.verdict:
        if rep.cpp is None:
            return ["structure: a passing report must carry a consistent price process"]
        out += cpp_violations(model, rep.cpp.Z)
        if not out and model.kind == "bank":
            try:
                out += bank_form_violations(model, cpp_to_bank_form(model, rep.cpp))
            except ValueError as exc:
                out.append(f"ri-membership: {exc}")
        return out
    if rep.arbitrage is not None:
        out += certificate_violations(rep.arbitrage, model)
    if rep.failure is not None:
        trace = run_recursion(model)
        if trace.holds:
            out.append("verdict: the recursion holds for this model")
        elif (trace.failure_time(), sorted(trace.failure_set())) != (rep.failure[0], sorted(rep.failure[1])):
            out.append("failure: recorded failure time or set differs from the recursion")
    if rep.arbitrage is None and rep.failure is None:
        out.append("structure: a failing report must carry a failure set or a certificate")
    return out


def cmd_verify(args) -> int:
    model = load_model(args.model_file)
    rep = load_report(args.report_file)
    problems = report_violations(rep, model)
    if problems:
        for p in problems:
            print(f"violation: {p}")
        return EXIT_ERROR
    print("verified: every invariant holds")
    return EXIT_OK


def cmd_figure(args) -> int:
    model = load_model(args.model_file)
    try:
        elements = write_figure(model, args.out, _t_range(args.t_range), title=args.title or "")
    except FigureError as exc:
        raise UsageError(str(exc)) from None
    print(f"wrote {len(elements)} elements to {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="narctl", description="Robust no-arbitrage checks for transaction-cost markets on scenario trees.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a model file against the bid-ask axioms and tree rules")
    s.add_argument("model_file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("check", help="run the recursion and report the verdict")
    s.add_argument("model_file")
    s.add_argument("--model", choices=["cone", "bank", "both"], default="cone")
    s.add_argument("--out", help="write the JSON report here")
    s.add_argument("--report-dir", help="write trace.csv (and boxes.png for 3-asset bank models) here")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("arbitrage", help="construct and verify an arbitrage certificate")
    s.add_argument("model_file")
    s.add_argument("--lambda", dest="lam", default="1/2", help="spread contraction factor in (0,1)")
    s.add_argument("--out", help="write the JSON certificate here")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_arbitrage)

    s = sub.add_parser("verify", help="re-check a report against its model")
    s.add_argument("report_file")
    s.add_argument("model_file")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("figure", help="draw boxes and recursion values of a 3-asset bank model")
    s.add_argument("model_file")
    s.add_argument("--out", default="figure.svg")
    s.add_argument("--t-range", help="times a:b to draw")
    s.add_argument("--title")
    s.set_defaults(func=cmd_figure)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 means "criterion fails" here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except ModelFileError as exc:
        for p in exc.problems:
            _err(p)
    except (UsageError, ConeDomainError, ConstructionError, TighteningError, ValueError) as exc:
        _err(str(exc))
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
