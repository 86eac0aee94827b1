"""Pass registry and pipeline driver."""

from __future__ import annotations

import copy
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..ir.core import Function, InstructionDescriptor, Module
from ..ir.verify import verify
from .canon import canon_bitmanip, narrow_types
from .common import PassReport
from .idioms import PassError, detect_clamp, detect_mac, specialize_control
from .loops import lift_to_linalg, reconstruct_loops
from .metadata import emit_taidl_metadata

# (stage code, command-line flag, implementation) in pipeline order
PASSES = (
    ("A1", "canon-bitmanip", canon_bitmanip),
    ("A2", "narrow-types", narrow_types),
    ("B3", "detect-mac", detect_mac),
    ("B4", "specialize-control", specialize_control),
    ("B5", "detect-clamp", detect_clamp),
    ("C6", "reconstruct-loops", reconstruct_loops),
    ("C7", "lift-to-linalg", lift_to_linalg),
    ("D8", "emit-taidl-metadata", emit_taidl_metadata),
)
FLAGS = tuple(flag for _, flag, _ in PASSES)
CODE_OF = {flag: code for code, flag, _ in PASSES}


class DescriptorError(ValueError):
    pass


class UnknownPassError(ValueError):
    pass


@dataclass
class PipelineResult:
    module: Module
    reports: list = field(default_factory=list)
    # stage code ("input", "A1", ...) -> Module, when requested
    snapshots: dict = field(default_factory=dict)

    def report_text(self) -> str:
        return "".join(r.to_line() + "\n" for r in self.reports)


def resolve(passes) -> list:
    """Pass flags (or codes) -> [(code, flag, fn)] in pipeline order."""
    if passes is None:
        return list(PASSES)
    wanted = []
    for p in passes:
        hit = [entry for entry in PASSES if p in (entry[0], entry[1])]
        if not hit:
            raise UnknownPassError(f"unknown pass {p!r}; known: {', '.join(FLAGS)}")
        wanted.append(hit[0])
    return sorted(set(wanted), key=PASSES.index)


def check_descriptors(module: Module) -> None:
    """Every fixed control must name an argument of some function of its instruction."""
    problems = []
    for d in module.descriptors:
        group = [f for f in module.functions if f.instruction == d.name]
        if not group:
            continue
        names = set().union(*(f.arg_names() for f in group))
        for key in d.fixed_controls:
            if key not in names:
                problems.append(f"{d.name}: control {key!r} is not a signal of the instruction")
    if problems:
        raise DescriptorError("; ".join(problems))


def run_pass(entry, f: Function, descriptor: InstructionDescriptor | None):
    """Apply one pass to a copy of ``f``; returns (new function, report).

    On failure the input function is returned unchanged and the report
    carries the error.
    """
    code, flag, fn = entry
    before = f.op_count()
    g = copy.deepcopy(f)
    try:
        rewrites, annotations = fn(g, descriptor)
        problems = verify(g)
        if problems:
            raise PassError(f"result fails verification: {problems[0]}")
    except PassError as exc:
        return f, PassReport(flag, f.name, before, before, error=str(exc))
    return g, PassReport(flag, f.name, before, g.op_count(), rewrites, annotations)


def _lift_one(args):
    f, descriptor, entries, snapshots = args
    reports, stages = [], {}
    for entry in entries:
        f, report = run_pass(entry, f, descriptor)
        reports.append(report)
        if snapshots:
            stages[entry[0]] = copy.deepcopy(f)
    return f, reports, stages


def run_pipeline(module: Module, passes=None, workers: int = 1,
                 snapshots: bool = False) -> PipelineResult:
    """Run the selected passes over every function of ``module``.

    Functions are independent, so ``workers > 1`` lifts them in parallel;
    output order always follows the input order.
    """
    entries = resolve(passes)
    check_descriptors(module)
    dmap = module.descriptor_map()
    jobs = [(f, dmap.get(f.instruction), entries, snapshots) for f in module.functions]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_lift_one, jobs))
    else:
        results = [_lift_one(j) for j in jobs]
    out = Module(copy.deepcopy(module.descriptors), [r[0] for r in results])
    result = PipelineResult(out, [rep for r in results for rep in r[1]])
    if snapshots:
        result.snapshots["input"] = copy.deepcopy(module)
        for code, _, _ in entries:
            result.snapshots[code] = Module(out.descriptors, [r[2][code] for r in results])
    return result
