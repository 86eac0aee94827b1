"""Command-line driver: ``tensorlift {gen,opt,verify,assemble}``.

Exit codes: 0 success, 1 usage error, 2 parse or verification error of an
input, 3 equivalence counterexample, 4 internal error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

from .assembler import assemble, spec_facts
from .corpus import DEFAULTS, DesignError, DesignSpec, full_corpus, generate
from .ir import Module, ParseError, VerificationError, parse_module, print_module
from .oracle import Budget, SignatureMismatch, check_equivalence, emit_smt
from .oracle.equiv import pins_from_descriptor
from .passes import DescriptorError, UnknownPassError, run_pipeline

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_COUNTEREXAMPLE, EXIT_INTERNAL = 0, 1, 2, 3, 4
SEED_ENV = "TENSORLIFT_SEED"
REPORT_FIELDS = ("function", "pass", "ops_before", "ops_after", "rewrites",
                 "annotations_added", "error")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_module(path: str, verify: bool = True) -> Module:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return parse_module(text, verify=verify)
    except (ParseError, VerificationError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _with_descriptors(m: Module, path: str | None) -> Module:
    """Descriptors from ``path`` replace same-named ones in ``m``."""
    if not path:
        return m
    extra = _read_module(path).descriptors
    names = {d.name for d in extra}
    return Module([d for d in m.descriptors if d.name not in names] + extra, m.functions)


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV, "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from exc


def report_table(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter="\t", lineterminator="\n")
    w.writerow(REPORT_FIELDS)
    for r in reports:
        w.writerow([r.function, r.name, r.ops_before, r.ops_after, r.rewrites,
                    r.annotations_added, r.error or ""])
    return buf.getvalue()


def cmd_gen(args) -> int:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    if args.design == "corpus":
        m, ex = full_corpus()
        label = "corpus"
    else:
        given = {k: getattr(args, k) for k in DEFAULTS[args.design]
                 if getattr(args, k, None) is not None}
        spec = DesignSpec(args.design, given, args.seed)
        try:
            m, ex = generate(spec)
        except DesignError as exc:
            raise UsageError(str(exc)) from exc
        label = spec.label
    (out / f"{label}.ir").write_text(print_module(m))
    (out / f"{label}.desc").write_text(print_module(Module(m.descriptors, [])))
    (out / f"{label}.expect").write_text(ex.to_text())
    print(out / f"{label}.ir")
    return EXIT_OK


def cmd_opt(args) -> int:
    if args.pipeline and args.passes:
        raise UsageError("--pipeline and --pass are mutually exclusive")
    if args.pipeline not in (None, "full"):
        raise UsageError(f"unknown pipeline {args.pipeline!r}; only 'full' is defined")
    passes = None if args.pipeline or not args.passes else [
        p.strip() for p in args.passes.split(",") if p.strip()]
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    m = _with_descriptors(_read_module(args.input), args.descriptors)
    try:
        result = run_pipeline(m, passes, workers=args.workers)
    except UnknownPassError as exc:
        raise UsageError(str(exc)) from exc
    except DescriptorError as exc:
        raise InputError(str(exc)) from exc
    _write(args.output, print_module(result.module))
    if args.report:
        _write(args.report, report_table(result.reports))
    if args.figure:
        from .plotting import plot_pass_counts

        plot_pass_counts(result.reports, args.figure)
    return EXIT_OK


def cmd_verify(args) -> int:
    left = _read_module(args.left)
    right = _read_module(args.right)
    descs = _read_module(args.restrict).descriptor_map() if args.restrict else {}
    seed = args.seed if args.seed is not None else _default_seed()
    budget = Budget(exhaustive_bits=args.exhaustive_bits, samples=args.samples, seed=seed)
    lnames = [f.name for f in left.functions]
    rnames = {f.name for f in right.functions}
    missing = [n for n in lnames if n not in rnames] + sorted(rnames - set(lnames))
    if missing:
        raise InputError(f"functions present in only one input: {', '.join(missing)}")
    texts, smt, found = [], [], False
    for f in left.functions:
        g = right.function(f.name)
        try:
            pins = pins_from_descriptor(f, descs.get(f.instruction))
            report = check_equivalence(f, g, pinned=pins, budget=budget)
            if args.emit_smt:
                smt.append(f"; {f.name}\n" + emit_smt(f, g, pinned=pins))
        except (SignatureMismatch, ValueError) as exc:
            raise InputError(str(exc)) from exc
        texts.append(report.to_text())
        found |= not report.ok
    _write(args.output, "\n".join(texts))
    if args.emit_smt:
        Path(args.emit_smt).write_text("\n".join(smt))
    return EXIT_COUNTEREXAMPLE if found else EXIT_OK


def cmd_assemble(args) -> int:
    m = _with_descriptors(_read_module(args.input), args.descriptors)
    result = assemble(m)
    _write(args.output, result.text)
    for w in result.spec.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.facts:
        facts = spec_facts(result.spec)
        _write(args.facts, "".join(f"{k} = {v}\n" for k, v in sorted(facts.items())))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="tensorlift", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a synthetic design")
    g.add_argument("--design", required=True, choices=list(DEFAULTS) + ["corpus"])
    for name in ("W", "V", "w", "n", "banks", "window", "stride", "rows", "addr_width",
                 "activation", "macro"):
        g.add_argument(f"--{name.replace('_', '-')}", dest=name, type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    o = sub.add_parser("opt", help="run lifting passes")
    o.add_argument("input")
    o.add_argument("--pipeline")
    o.add_argument("--pass", dest="passes", help="comma-separated pass flags")
    o.add_argument("-o", "--output")
    o.add_argument("--report", help="tab-separated per-pass report")
    o.add_argument("--figure", help="bar chart of op counts per stage (png, pdf, svg)")
    o.add_argument("--descriptors")
    o.add_argument("--workers", type=int, default=1)
    o.set_defaults(func=cmd_opt)

    v = sub.add_parser("verify", help="check two modules for equivalence")
    v.add_argument("left")
    v.add_argument("right")
    v.add_argument("--restrict", help="descriptor file whose fixed controls pin inputs")
    v.add_argument("--emit-smt", dest="emit_smt")
    v.add_argument("-o", "--output")
    v.add_argument("--seed", type=int)
    v.add_argument("--samples", type=int, default=Budget.samples)
    v.add_argument("--exhaustive-bits", dest="exhaustive_bits", type=int,
                   default=Budget.exhaustive_bits)
    v.set_defaults(func=cmd_verify)

    a = sub.add_parser("assemble", help="emit a TAIDL specification")
    a.add_argument("input")
    a.add_argument("--descriptors")
    a.add_argument("-o", "--output")
    a.add_argument("--facts", help="write banked/ordering summary lines")
    a.set_defaults(func=cmd_assemble)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        return args.func(args)
    except UsageError as exc:
        print(f"tensorlift: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"tensorlift: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # any escape is an internal invariant violation
        print(f"tensorlift: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
