"""Bit-manipulation canonicalization and type narrowing."""

from __future__ import annotations

from ..ir.analysis import NameGen, definitions, parents, remove_dead, replace_uses
from ..ir.core import EXT_OPS, Function, Operation
from .common import const_of, def_op, value_type


def _sign_bit_step(defs, v):
    """Match ``shli(extui(select(msb, 1, 0)), k)``; returns (x, k, ops) or None.

    ``msb`` must be ``trunci(shrui(x, W-1)) : i1`` with ``x : iW``.
    """
    shl = def_op(defs, v, "shli")
    if shl is None:
        return None
    k = const_of(defs, shl.operands[1])
    ext = def_op(defs, shl.operands[0], "extui")
    if k is None or ext is None:
        return None
    sel = def_op(defs, ext.operands[0], "select")
    if sel is None or sel.type.width != 1:
        return None
    if const_of(defs, sel.operands[1]) != 1 or const_of(defs, sel.operands[2]) != 0:
        return None
    tr = def_op(defs, sel.operands[0], "trunci")
    if tr is None or tr.type.width != 1:
        return None
    sh = def_op(defs, tr.operands[0], "shrui")
    if sh is None:
        return None
    x = sh.operands[0]
    W = value_type(defs, x).width
    if const_of(defs, sh.operands[1]) != W - 1:
        return None
    ops = [shl, ext, sel, tr, sh] + [defs[n] for n in (shl.operands[1], sel.operands[1],
                                                         sel.operands[2], sh.operands[1])]
    return x, k, ops


def _match_bitwise(defs, root: Operation):
    """Match the ori-chain spelling of sign extension ending at ``root``."""
    ops, ks, xs = [], [], []
    v = root.result
    while True:
        d = defs.get(v)
        if isinstance(d, Operation) and d.opcode == "extui" and v in d.results and ks:
            x = d.operands[0]
            ops.append(d)
            break
        o = def_op(defs, v, "ori")
        if o is None:
            return None
        for acc, other in ((o.operands[0], o.operands[1]), (o.operands[1], o.operands[0])):
            step = _sign_bit_step(defs, other)
            if step is not None:
                break
        else:
            return None
        xs.append(step[0])
        ks.append(step[1])
        ops.append(o)
        ops += step[2]
        v = acc
    W = value_type(defs, x).width
    V = root.type.width
    if any(s != x for s in xs) or sorted(ks) != list(range(W, V)):
        return None
    return x, ops


def _match_arith(defs, root: Operation):
    """Match ``shrsi(shli(extui x, V-W), V-W)``."""
    if root.opcode != "shrsi":
        return None
    shl = def_op(defs, root.operands[0], "shli")
    if shl is None:
        return None
    ext = def_op(defs, shl.operands[0], "extui")
    if ext is None:
        return None
    x = ext.operands[0]
    d = root.type.width - value_type(defs, x).width
    if d <= 0 or const_of(defs, shl.operands[1]) != d or const_of(defs, root.operands[1]) != d:
        return None
    return x, [shl, ext, defs[shl.operands[1]], defs[root.operands[1]]]


def canon_bitmanip(f: Function, descriptor=None):
    """Replace bit-by-bit and shift-pair sign extensions with ``extsi``."""
    defs = definitions(f)
    matches = []
    for op in f.walk():
        if op.opcode == "ori":
            m = _match_bitwise(defs, op)
        elif op.opcode == "shrsi":
            m = _match_arith(defs, op)
        else:
            continue
        if m is not None:
            matches.append((op, m))
    # an inner ori of a longer chain cannot match (its bit set is incomplete),
    # so matches never nest
    fresh = NameGen(f)
    where = parents(f)
    internal = set()
    for root, (x, ops) in matches:
        block = where[id(root)][0]
        name = fresh()
        ext = Operation("extsi", [x], [name], [root.type])
        pos = next(k for k, o in enumerate(block.ops) if o is root)
        block.ops.insert(pos, ext)
        replace_uses(f, root.result, name)
        internal.add(id(root))
        internal.update(id(o) for o in ops)
    if matches:
        remove_dead(f, only=internal)
    return len(matches), 0


def _narrow_once(f: Function) -> tuple:
    defs = definitions(f)
    for op in f.walk():
        if op.opcode == "trunci":
            inner = def_op(defs, op.operands[0], "extsi", "extui", "trunci")
            if inner is None:
                continue
            x = inner.operands[0]
            wx, wt = value_type(defs, x).width, op.type.width
            if inner.opcode == "trunci" or wt < wx:
                op.operands = [x]
            elif wt == wx:
                replace_uses(f, op.result, x)
            else:
                op.opcode, op.operands = inner.opcode, [x]
            return True, (inner, op)
        if op.opcode in EXT_OPS:
            inner = def_op(defs, op.operands[0], *EXT_OPS)
            if inner is None:
                continue
            # extsi of a zero-extended value is a zero extension
            if inner.opcode == op.opcode or inner.opcode == "extui":
                op.opcode, op.operands = inner.opcode, [inner.operands[0]]
                return True, (inner, op)
    return False, ()


def narrow_types(f: Function, descriptor=None):
    """Collapse cast round-trips.  ``ext(trunci x)`` is kept: it is a clamp."""
    rewrites = 0
    touched = set()
    while True:
        changed, ops = _narrow_once(f)
        if not changed:
            break
        rewrites += 1
        touched.update(id(o) for o in ops)
        remove_dead(f, only=touched)
    return rewrites, 0

