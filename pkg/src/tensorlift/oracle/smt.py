"""SMT-LIB2 (QF_ABV) emission of an equivalence query.

The script asserts that some environment makes the two functions disagree,
so ``unsat`` from a solver proves equivalence.  Loops are unrolled (trip counts
are static), memrefs become arrays indexed by a flattened 32-bit offset.
"""

from __future__ import annotations

import numpy as np

from ..ir.core import BINARY_OPS, Function, IntType, MemRefType
from .equiv import check_signature

INDEX_WIDTH = 32

_BV_BINARY = {
    "addi": "bvadd", "subi": "bvsub", "muli": "bvmul", "andi": "bvand", "ori": "bvor",
    "xori": "bvxor", "shli": "bvshl", "shrui": "bvlshr", "shrsi": "bvashr",
}
_BV_CMP = {
    "slt": "bvslt", "sle": "bvsle", "sgt": "bvsgt", "sge": "bvsge",
    "ult": "bvult", "ule": "bvule", "ugt": "bvugt", "uge": "bvuge",
}


def sort(t) -> str:
    if isinstance(t, IntType):
        return f"(_ BitVec {t.width})"
    if isinstance(t, MemRefType):
        return f"(Array (_ BitVec {INDEX_WIDTH}) (_ BitVec {t.element.width}))"
    raise TypeError(f"no SMT sort for {t}")


def bv(value: int, width: int) -> str:
    return f"(_ bv{value & ((1 << width) - 1)} {width})"


def sym(name: str) -> str:
    return "|" + name.replace("|", "_") + "|"


def _flat(shape, idx) -> int:
    return int(np.ravel_multi_index(tuple(idx), shape))


class _Emitter:
    def __init__(self, prefix: str, f: Function, lines: list):
        self.prefix = prefix
        self.lines = lines
        self.types = {a.name: a.type for a in f.args}
        self.terms = {a.name: sym(a.name) for a in f.args}
        self.counter = 0

    def define(self, name, t, expr) -> str:
        s = sym(f"{self.prefix}.{name}.{self.counter}")
        self.counter += 1
        self.lines.append(f"(define-fun {s} () {sort(t)} {expr})")
        self.terms[name] = s
        self.types[name] = t
        return s

    def block(self, ops, ivs):
        for op in ops:
            if op.opcode in ("yield", "return"):
                return [self.terms[v] for v in op.operands]
            self.op(op, ivs)
        return []

    def index(self, op, mt, ivs):
        idx = [i if isinstance(i, int) else ivs[i] for i in op.indices]
        return bv(_flat(mt.shape, idx), INDEX_WIDTH)

    def op(self, op, ivs):
        oc = op.opcode
        t = op.types[0] if op.types else None
        x = [self.terms.get(v) for v in op.operands]
        if oc == "const":
            self.define(op.result, t, bv(op.value, t.width))
        elif oc in BINARY_OPS:
            self.define(op.result, t, f"({_BV_BINARY[oc]} {x[0]} {x[1]})")
        elif oc in ("extsi", "extui"):
            k = t.width - self.types[op.operands[0]].width
            fn = "sign_extend" if oc == "extsi" else "zero_extend"
            self.define(op.result, t, f"((_ {fn} {k}) {x[0]})")
        elif oc == "trunci":
            self.define(op.result, t, f"((_ extract {t.width - 1} 0) {x[0]})")
        elif oc == "cmpi":
            if op.predicate == "eq":
                cond = f"(= {x[0]} {x[1]})"
            elif op.predicate == "ne":
                cond = f"(distinct {x[0]} {x[1]})"
            else:
                cond = f"({_BV_CMP[op.predicate]} {x[0]} {x[1]})"
            self.define(op.result, t, f"(ite {cond} #b1 #b0)")
        elif oc == "select":
            self.define(op.result, t, f"(ite (= {x[0]} #b1) {x[1]} {x[2]})")
        elif oc == "load":
            mt = self.types[op.operands[0]]
            self.define(op.result, t, f"(select {x[0]} {self.index(op, mt, ivs)})")
        elif oc == "store":
            mt = self.types[op.operands[1]]
            self.define(op.result, t, f"(store {x[1]} {self.index(op, mt, ivs)} {x[0]})")
        elif oc == "if":
            then = self.block(op.regions[0].ops, ivs)
            other = self.block(op.regions[1].ops, ivs)
            for r, rt, a, b in zip(op.results, op.types, then, other):
                self.define(r, rt, f"(ite (= {x[0]} #b1) {a} {b})")
        elif oc == "for":
            carried = list(x)
            for a, at in zip(op.iter_args, op.types):
                self.types[a] = at
            for k in range(op.lower, op.upper, op.step):
                for a, term in zip(op.iter_args, carried):
                    self.terms[a] = term
                carried = self.block(op.body.ops, {**ivs, op.iv: k})
            for r, term in zip(op.results, carried):
                self.terms[r] = term
        else:
            raise ValueError(f"cannot encode {oc}")


def emit_smt(f: Function, g: Function, pinned: dict | None = None) -> str:
    """SMT-LIB2 script whose satisfiability means ``f`` and ``g`` differ."""
    check_signature(f, g)
    lines = ["(set-logic QF_ABV)"]
    for a in f.args:
        lines.append(f"(declare-const {sym(a.name)} {sort(a.type)})")
    for name, value in sorted((pinned or {}).items()):
        t = f.arg(name).type
        if isinstance(t, MemRefType):
            flat = np.array(value, dtype=object).reshape(-1)
            for k, v in enumerate(flat):
                lines.append(f"(assert (= (select {sym(name)} {bv(k, INDEX_WIDTH)}) "
                             f"{bv(int(v), t.element.width)}))")
        else:
            lines.append(f"(assert (= {sym(name)} {bv(int(value), t.width)}))")
    outs = []
    for prefix, fn in (("f", f), ("g", g)):
        em = _Emitter(prefix, fn, lines)
        outs.append(em.block(fn.body.ops, {})[0])
    lines.append(f"(assert (not (= {outs[0]} {outs[1]})))")
    lines.append("(check-sat)")
    lines.append("(exit)")
    return "\n".join(lines) + "\n"
