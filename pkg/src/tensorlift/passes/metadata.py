"""Attach the metadata the assembler consumes, and drop foreign annotations."""

from __future__ import annotations

import re

from ..ir.analysis import backward_slice, definitions, uses
from ..ir.core import VOCABULARY, Function, MemRefType
from .common import const_of, def_op, set_attr

COORD = re.compile(r"_(\d+)_(\d+)(?:_?[A-Za-z]\w*)?$")


def coordinate(name: str):
    """Grid position encoded in a signal name, e.g. ``pe_3_5_acc`` -> (3, 5)."""
    m = COORD.search(name)
    return (int(m.group(1)), int(m.group(2))) if m else None


def port_class(name: str) -> str:
    low = name.lower()
    if "dram" in low:
        return "dram_addr"
    if "spad" in low or "acc" in low:
        return "spad_addr"
    return "data"


def arg_role(f: Function, name: str, use: dict) -> str:
    a = f.arg(name)
    if isinstance(a.type, MemRefType):
        loaded = any(op.opcode == "load" for op in use.get(name, []))
        stored = any(op.opcode == "store" and op.operands[1] == name for op in use.get(name, []))
        if stored:
            return "state" if loaded else "output"
        return "input"
    return "attribute"


def _is_relu(defs, op) -> bool:
    """``select(cmpi(sgt|sge, x, 0), x, 0)``."""
    if op.opcode != "select":
        return False
    cmp = def_op(defs, op.operands[0], "cmpi")
    if cmp is None or cmp.predicate not in ("sgt", "sge"):
        return False
    x, z = op.operands[1], op.operands[2]
    return cmp.operands[0] == x and const_of(defs, z) == 0 and const_of(defs, cmp.operands[1]) == 0


def compute_kind(core: list) -> str:
    """The linalg tag of a loop feeding the result, else ``dot_product`` for a
    lone MAC feeding it (a single-element dot), else ``opaque``."""
    for op in core:
        if op.opcode == "for" and op.attrs.get("linalg_op"):
            return op.attrs["linalg_op"]
    if any("atlaas.mac" in op.attrs and op.opcode == "addi" for op in core):
        return "dot_product"
    return "opaque"


def strip_foreign(f: Function) -> int:
    n = 0
    for holder in [f] + f.args + list(f.walk()):
        for key in [k for k in holder.attrs if k not in VOCABULARY]:
            del holder.attrs[key]
            n += 1
    return n


def emit_taidl_metadata(f: Function, descriptor=None):
    removed = strip_foreign(f)
    defs = definitions(f)
    use = uses(f)
    added = 0
    for a in f.args:
        added += set_attr(a, "taidl.role", arg_role(f, a.name, use))
        added += set_attr(a, "taidl.port_class", port_class(a.name))
    c = coordinate(f.target_asv)
    if c is not None:
        added += set_attr(f, "taidl.coord", c)
    core = backward_slice(f, [f.returned])
    added += set_attr(f, "taidl.compute", compute_kind(core))
    for op in core:
        if "atlaas.clamp" in op.attrs:
            added += set_attr(f, "taidl.clamp", tuple(op.attrs["atlaas.clamp"]))
            break
    if any(_is_relu(defs, op) for op in core):
        added += set_attr(f, "taidl.activation", "relu")
    return removed, added

