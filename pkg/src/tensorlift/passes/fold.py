"""Constant propagation, select/if folding and DCE, iterated to fixpoint."""

from __future__ import annotations

from ..ir import semantics
from ..ir.analysis import definitions, parents, remove_dead, replace_uses
from ..ir.core import BINARY_OPS, CAST_OPS, Function, canonical_const
from .common import const_of, value_type

MAX_ITERATIONS = 100


def _unsigned(v: int, w: int) -> int:
    return v & ((1 << w) - 1)


def propagate_constants(f: Function) -> int:
    defs = definitions(f)
    n = 0
    for op in list(f.walk()):
        if op.opcode not in BINARY_OPS + CAST_OPS + ("cmpi",):
            continue
        vals = [const_of(defs, v) for v in op.operands]
        if any(v is None for v in vals):
            continue
        w_in = value_type(defs, op.operands[0]).width
        w_out = op.type.width
        u = [_unsigned(v, w_in) for v in vals]
        if op.opcode in BINARY_OPS:
            r = semantics.binary(op.opcode, u[0], u[1], w_out)
        elif op.opcode == "cmpi":
            r = semantics.compare(op.predicate, u[0], u[1], w_in)
        else:
            r = semantics.cast(op.opcode, u[0], w_in, w_out)
        op.opcode, op.operands, op.predicate, op.attrs = "const", [], None, {}
        op.value = canonical_const(r, w_out)
        n += 1
    return n


def fold_selects(f: Function) -> int:
    defs = definitions(f)
    n = 0
    for op in list(f.walk()):
        if op.opcode != "select":
            continue
        c, a, b = op.operands
        cv = const_of(defs, c)
        if cv is not None:
            pick = a if cv & 1 else b
        elif a == b:
            pick = a
        else:
            continue
        replace_uses(f, op.result, pick)
        n += 1
    return n


def fold_ifs(f: Function) -> int:
    """Inline the taken branch of every ``scf.if`` with a constant condition."""
    n = 0
    while True:
        defs = definitions(f)
        where = parents(f)
        target = None
        for op in f.walk():
            if op.opcode == "if" and const_of(defs, op.operands[0]) is not None:
                target = op
                break
        if target is None:
            return n
        block = where[id(target)][0]
        region = target.regions[0] if const_of(defs, target.operands[0]) & 1 else target.regions[1]
        body = list(region.ops)
        yielded = body.pop().operands if body and body[-1].opcode == "yield" else []
        pos = next(k for k, op in enumerate(block.ops) if op is target)
        block.ops[pos:pos + 1] = body
        for r, v in zip(target.results, yielded):
            replace_uses(f, r, v)
        n += 1


def fold_to_fixpoint(f: Function) -> tuple:
    """Returns (folds, branches eliminated, ops removed by DCE)."""
    folds = branches = removed = 0
    for _ in range(MAX_ITERATIONS):
        c = propagate_constants(f)
        s = fold_selects(f)
        i = fold_ifs(f)
        d = remove_dead(f)
        folds += c
        branches += s + i
        removed += d
        if not (c or s or i or d):
            break
    return folds, branches, removed
