"""Expectations: per-pass structural outcomes a lift must reach.

Stored as ``<function>.<stage>.<metric> = <value>`` lines.  ``stage`` is
``input`` (before any pass), a pass code ``A1`` ... ``D8``, or ``assemble``
(with function ``module``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..ir.analysis import backward_slice, definitions, uses
from ..ir.core import Argument, Function

STAGES = ("input", "A1", "A2", "B3", "B4", "B5", "C6", "C7", "D8", "assemble")


@dataclass
class Expectations:
    records: dict = field(default_factory=dict)

    def add(self, function: str, stage: str, metric: str, value) -> None:
        if stage not in STAGES:
            raise ValueError(f"unknown stage {stage!r}")
        self.records[(function, stage, metric)] = value

    def to_text(self) -> str:
        order = {s: k for k, s in enumerate(STAGES)}
        keys = sorted(self.records, key=lambda k: (k[0], order[k[1]], k[2]))
        return "".join(f"{fn}.{st}.{me} = {self.records[(fn, st, me)]}\n" for fn, st, me in keys)

    @classmethod
    def from_text(cls, text: str) -> "Expectations":
        ex = cls()
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            m = re.fullmatch(r"([^.\s]+)\.([^.\s]+)\.(\S+)\s*=\s*(.*)", line)
            if not m:
                raise ValueError(f"line {lineno}: malformed expectation {line!r}")
            value = m.group(4).strip()
            ex.add(m.group(1), m.group(2), m.group(3), int(value) if re.fullmatch(r"-?\d+", value) else value)
        return ex

    def stages(self) -> set:
        return {st for _, st, _ in self.records}


def _bitext_steps(f: Function) -> int:
    defs = definitions(f)
    n = 0
    for op in f.walk():
        if op.opcode != "ori":
            continue
        for v in op.operands:
            d = defs.get(v)
            if getattr(d, "opcode", None) != "shli":
                continue
            e = defs.get(d.operands[0])
            if getattr(e, "opcode", None) == "extui":
                src = defs.get(e.operands[0])
                if getattr(src, "opcode", None) == "select" and src.type.width == 1:
                    n += 1
    return n


def _depends_on(f: Function, value: str, signal: str) -> bool:
    defs = definitions(f)
    for op in backward_slice(f, [value]):
        if signal in op.operands:
            return True
    return isinstance(defs.get(value), Argument) and value == signal


def metric(f: Function, name: str):
    """Evaluate one named structural metric on ``f``."""
    ops = list(f.walk())
    loops = [op for op in ops if op.opcode == "for"]
    if name == "ops":
        return len(ops)
    if name == "bitext_steps":
        return _bitext_steps(f)
    if name == "arith_ext":
        return sum(1 for op in ops if op.opcode == "shrsi")
    if name in ("extsi", "extui", "trunci", "select", "muli", "addi"):
        return sum(1 for op in ops if op.opcode == name)
    if name == "loops":
        return len(loops)
    if name == "iter_args":
        return len(loops[0].iter_args) if loops else 0
    if name == "trip":
        return loops[0].trip_count if loops else 0
    if name == "linalg_op":
        tags = [op.attrs["linalg_op"] for op in loops if "linalg_op" in op.attrs]
        return tags[0] if tags else "none"
    if name == "mac":
        return sum(1 for op in ops if "atlaas.mac" in op.attrs)
    if name == "mac_widths":
        from ..passes.idioms import parse_mac

        macs = [parse_mac(op.attrs["atlaas.mac"]) for op in ops if "atlaas.mac" in op.attrs]
        return ";".join(f"{m['lhs_width']}x{m['rhs_width']}" for m in macs) or "none"
    if name == "clamp":
        cl = [op.attrs["atlaas.clamp"] for op in ops if "atlaas.clamp" in op.attrs]
        if not cl:
            return "none"
        lo, hi, sgn, _ = cl[0]
        return f"{lo},{hi},{'signed' if sgn else 'unsigned'}"
    if name == "compute":
        return f.attrs.get("taidl.compute", "none")
    if name == "activation":
        return f.attrs.get("taidl.activation", "none")
    if name == "compute_core":
        from ..ir.analysis import compute_core_size

        return compute_core_size(f)
    kind, _, arg = name.partition(":")
    if kind == "selects_on":
        return sum(1 for op in ops if op.opcode in ("select", "if")
                   and _depends_on(f, op.operands[0], arg))
    if kind == "refs":
        return len(uses(f).get(arg, []))
    if kind in ("role", "port_class"):
        a = f.arg(arg)
        return a.attrs.get(f"taidl.{kind}", "none") if a else "absent"
    raise KeyError(f"unknown metric {name!r}")


def check(expectations: Expectations, snapshots: dict, spec_facts: dict | None = None) -> list:
    """Compare expectations against pipeline snapshots.

    ``snapshots`` maps stage -> Module (``input`` plus each pass code);
    ``spec_facts`` maps assemble-stage metric -> value.  Returns a list of
    ``(key, expected, actual)`` mismatches.
    """
    failures = []
    for (fn, st, me), want in sorted(expectations.records.items()):
        if st == "assemble":
            got = (spec_facts or {}).get(me, "missing")
        else:
            module = snapshots.get(st)
            if module is None:
                got = "missing stage"
            else:
                try:
                    got = metric(module.function(fn), me)
                except KeyError:
                    got = "missing function"
        if str(got) != str(want):
            failures.append((f"{fn}.{st}.{me}", want, got))
    return failures
