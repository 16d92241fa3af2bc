"""Command-line front end.

Subcommands::

    twtl parse      parse/validate a formula, print canonical form + horizon
    twtl check      Boolean verdict plus rho and eta for a complete trace
    twtl rho        robustness only
    twtl eta        AGM robustness only
    twtl monitor    replay a trace (or stdin stream) through the online monitors
    twtl casestudy  write the bundled planar-navigation scenario
    twtl oracle     debug: unmemoized reference evaluators

Exit codes: check 0 satisfied / 1 violated / 2 error; monitor 3 when the
trace ends before the horizon ("inconclusive at end of trace"); 2 on any
I/O, parse, or validation failure. Set TWTL_LOG=DEBUG|INFO|... for logging.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from typing import Iterable, Sequence, TextIO

from .formula import TwtlSyntaxError, format_formula, horizon, parse_file, steps, validate
from .monitor import MonitorState, StepResult
from .semantics import EvalConfig, bool_sat, eta, rho
from .trace import PredicateTable, Word, load_trace

log = logging.getLogger("twtl")

RECORD_FIELDS = ("t", "rho_lo", "rho_hi", "eta_lo", "eta_hi", "verdict_rho", "verdict_eta")


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def write_records(out: TextIO, fmt: str, records: Iterable[StepResult]) -> None:
    """Emit monitor records as CSV (with header) or JSON lines."""
    if fmt == "csv":
        out.write(",".join(RECORD_FIELDS) + "\n")
    for rec in records:
        if fmt == "csv":
            out.write(f"{_fmt(rec.t)},{_fmt(rec.rho.lo)},{_fmt(rec.rho.hi)},"
                      f"{_fmt(rec.eta.lo)},{_fmt(rec.eta.hi)},"
                      f"{rec.verdict_rho},{rec.verdict_eta}\n")
        else:
            out.write(json.dumps({
                "t": rec.t,
                "rho_lo": rec.rho.lo, "rho_hi": rec.rho.hi,
                "eta_lo": rec.eta.lo, "eta_hi": rec.eta.hi,
                "verdict_rho": str(rec.verdict_rho), "verdict_eta": str(rec.verdict_eta),
            }) + "\n")


class CliError(Exception):
    """User-facing failure; maps to exit code 2."""


def _add_common(p: argparse.ArgumentParser, trace: bool = True) -> None:
    p.add_argument("--formula", required=True, help="path to a formula file")
    p.add_argument("--config", required=True, help="path to the predicate/bounds JSON")
    if trace:
        p.add_argument("--trace", help="path to the trace CSV")
    p.add_argument("--dt", type=float, default=1.0, help="sampling step (default 1)")
    p.add_argument("--rho-bot", type=float, default=-10.0)
    p.add_argument("--rho-top", type=float, default=10.0)
    p.add_argument("--conservative-eta", action="store_true",
                   help="use +-1 instead of per-atom eta extremes in [eta]")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twtl", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse and validate a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--config", help="optional predicate JSON for atom resolution checks")
    p.add_argument("--dt", type=float, default=1.0)

    for name in ("check", "rho", "eta"):
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(trace_required=True)

    p = sub.add_parser("monitor", help="replay a trace through the online monitors")
    _add_common(p)
    p.add_argument("--stream", action="store_true", help="read samples from stdin")
    p.add_argument("--tau", help="comma-separated emission times (default: every step)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--out", help="output file (default stdout)")

    p = sub.add_parser("casestudy", help="write the bundled navigation scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    p = sub.add_parser("oracle", help="debug: unmemoized reference evaluators")
    _add_common(p)
    return ap


def _load_inputs(args) -> tuple:
    try:
        f = parse_file(args.formula)
    except OSError as exc:
        raise CliError(f"cannot read formula: {exc}") from exc
    except TwtlSyntaxError as exc:
        raise CliError(f"{args.formula}: {exc}") from exc
    try:
        table = PredicateTable.from_json(args.config)
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot load config {args.config}: {exc}") from exc
    cfg = EvalConfig(rho_bot=args.rho_bot, rho_top=args.rho_top, dt=args.dt)
    problems = [d for d in validate(f, table, args.dt) if d.severity == "error"]
    if problems:
        raise CliError("; ".join(str(d) for d in problems))
    for d in validate(f, table, args.dt):
        if d.severity == "warning":
            log.warning("%s", d.message)
    return f, table, cfg


def _load_word(args, cfg: EvalConfig) -> Word:
    if not getattr(args, "trace", None):
        raise CliError("--trace is required")
    try:
        return load_trace(args.trace, dt_expected=cfg.dt)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc


def _truncate_to_horizon(word: Word, f, cfg: EvalConfig) -> Word:
    hsteps = steps(horizon(f, cfg.dt), cfg.dt)
    if word.n > hsteps + 1:
        log.warning("trace has %d samples, horizon needs %d; extra samples ignored",
                    word.n, hsteps + 1)
        word = word.prefix(hsteps + 1)
    return word


def _cmd_parse(args) -> int:
    try:
        f = parse_file(args.formula)
    except OSError as exc:
        raise CliError(f"cannot read formula: {exc}") from exc
    except TwtlSyntaxError as exc:
        raise CliError(f"{args.formula}: {exc}") from exc
    print(format_formula(f))
    print(f"horizon: {horizon(f, args.dt):g}")
    if args.config:
        table = PredicateTable.from_json(args.config)
        diags = validate(f, table, args.dt)
        for d in diags:
            print(str(d), file=sys.stderr)
        if any(d.severity == "error" for d in diags):
            return 2
    return 0


def _cmd_check(args) -> int:
    f, table, cfg = _load_inputs(args)
    word = _truncate_to_horizon(_load_word(args, cfg), f, cfg)
    try:
        sat = bool_sat(word, f, table, cfg)
        r = rho(word, f, table, cfg)
        e = eta(word, f, table, cfg)
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc)) from exc
    print(f"{'sat' if sat else 'unsat'} rho={_fmt(r)} eta={_fmt(e)}")
    return 0 if sat else 1


def _cmd_value(args, which: str) -> int:
    f, table, cfg = _load_inputs(args)
    word = _truncate_to_horizon(_load_word(args, cfg), f, cfg)
    try:
        value = (rho if which == "rho" else eta)(word, f, table, cfg)
    except (ValueError, KeyError) as exc:
        raise CliError(str(exc)) from exc
    print(_fmt(value))
    return 0


def _stdin_samples(signal_names: Sequence[str]):
    reader = csv.reader(sys.stdin)
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise CliError("stream: empty input") from None
    if header[:1] != ["time"] or len(header) < 2:
        raise CliError(f"stream: header must be 'time,<sig1>,...', got {header}")
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            values = [float(c) for c in row]
        except ValueError:
            raise CliError(f"stream:{lineno}: malformed line {row}") from None
        if len(values) != len(header):
            raise CliError(f"stream:{lineno}: expected {len(header)} columns")
        yield dict(zip(header[1:], values[1:]))


def _cmd_monitor(args) -> int:
    f, table, cfg = _load_inputs(args)
    taus = None
    if args.tau:
        try:
            taus = [float(t) for t in args.tau.split(",")]
        except ValueError:
            raise CliError(f"malformed --tau {args.tau!r}") from None
    state = MonitorState(f, table, cfg, conservative_eta=args.conservative_eta)
    if args.stream:
        samples = _stdin_samples(state.signal_names)
    else:
        word = _truncate_to_horizon(_load_word(args, cfg), f, cfg)
        samples = ({s: word.value(s, k) for s in state.signal_names}
                   for k in range(word.n))

    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        records = []
        for sample in samples:
            if state.finalized:
                log.warning("trace continues past the horizon; extra samples ignored")
                break
            res = state.step(sample)
            if taus is None or any(abs(res.t - t) <= 1e-9 * cfg.dt for t in taus):
                records.append(res)
        write_records(out, args.format, records)
    finally:
        if out is not sys.stdout:
            out.close()
    if not state.finalized:
        log.warning("inconclusive at end of trace: %d of %d samples observed",
                    state._count, state.horizon_steps + 1)
        return 3
    return 0


def _cmd_casestudy(args) -> int:
    from . import casestudy

    result = casestudy.run_case_study(args.out, fmt=args.format)
    print(f"horizon: {result.horizon:g}")
    for label, vals in result.results.items():
        print(f"{label}: {'sat' if vals['sat'] else 'unsat'} "
              f"rho={_fmt(vals['rho'])} eta={_fmt(vals['eta'])}")
    for path in result.files:
        print(f"wrote {path}")
    return 0


def _cmd_oracle(args) -> int:
    from . import oracle

    f, table, cfg = _load_inputs(args)
    word = _truncate_to_horizon(_load_word(args, cfg), f, cfg)
    sat = oracle.oracle_bool(word, f, table, cfg)
    print(f"{'sat' if sat else 'unsat'} rho={_fmt(oracle.oracle_rho(word, f, table, cfg))} "
          f"eta={_fmt(oracle.oracle_eta(word, f, table, cfg))}")
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    level = os.environ.get("TWTL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="twtl: %(levelname)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command in ("rho", "eta"):
            return _cmd_value(args, args.command)
        if args.command == "monitor":
            return _cmd_monitor(args)
        if args.command == "casestudy":
            return _cmd_casestudy(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        raise CliError(f"unknown command {args.command}")
    except CliError as exc:
        print(f"twtl: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
