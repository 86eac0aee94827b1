from __future__ import annotations

import copy
from dataclasses import dataclass

from ..ir.core import Argument, Function, Operation


@dataclass
class PassReport:
    name: str
    function: str
    ops_before: int
    ops_after: int
    rewrites: int = 0
    annotations_added: int = 0
    error: str | None = None

    def to_line(self) -> str:
        line = (f"{self.function} {self.name} ops_before={self.ops_before} "
                f"ops_after={self.ops_after} rewrites={self.rewrites} "
                f"annotations_added={self.annotations_added}")
        if self.error:
            line += f" error={self.error!r}"
        return line


def clone(f: Function) -> Function:
    return copy.deepcopy(f)


def value_type(defs: dict, v: str):
    d = defs.get(v)
    if isinstance(d, Argument):
        return d.type
    if d is None:
        return None
    if d.opcode == "for":
        if v in d.results:
            return d.types[d.results.index(v)]
        if v in d.iter_args:
            return d.types[d.iter_args.index(v)]
        return None
    return d.types[d.results.index(v)]


def def_op(defs: dict, v: str, *opcodes) -> Operation | None:
    d = defs.get(v)
    if isinstance(d, Operation) and d.opcode in opcodes and v in d.results:
        return d
    return None


def const_of(defs: dict, v: str) -> int | None:
    d = def_op(defs, v, "const")
    return d.value if d is not None else None


def strip(defs: dict, v: str, opcodes) -> tuple:
    """Walk back through ops in ``opcodes``; returns (root value, ops passed)."""
    chain = []
    while True:
        d = def_op(defs, v, *opcodes)
        if d is None:
            return v, chain
        chain.append(d)
        v = d.operands[0]


def set_attr(op_or_fn, key: str, value) -> int:
    """Set an annotation; returns 1 if it was absent or different."""
    if op_or_fn.attrs.get(key) == value:
        return 0
    op_or_fn.attrs[key] = value
    return 1
