"""Idiom recognition: multiply-accumulate, control specialization, clamps."""

from __future__ import annotations

from ..ir.analysis import NameGen, definitions, replace_uses
from ..ir.core import (
    CAST_OPS, EXT_OPS, Function, InstructionDescriptor, IntType, MemRefType, Operation,
    canonical_const,
)
from .common import const_of, def_op, set_attr, strip, value_type
from .fold import fold_to_fixpoint

MAC_WIDTH_BOUND = 32


class PassError(Exception):
    """A pass cannot be applied to this function; the function is left as is."""


def format_mac(lhs: str, rhs: str, acc: str, lw: int, rw: int) -> str:
    return f"lhs=%{lhs} rhs=%{rhs} acc=%{acc} lhs_width={lw} rhs_width={rw}"


def parse_mac(text: str) -> dict:
    out = {}
    for item in text.split():
        key, _, val = item.partition("=")
        out[key] = int(val) if val.isdigit() else val.lstrip("%")
    return out


def mac_operands(defs, op: Operation):
    """For ``addi(acc, cast*(muli(ext* a, ext* b)))`` return (acc, mul, a, b)."""
    if op.opcode != "addi":
        return None
    for pos in (1, 0):
        root, _ = strip(defs, op.operands[pos], CAST_OPS)
        mul = def_op(defs, root, "muli")
        if mul is not None:
            a, _ = strip(defs, mul.operands[0], EXT_OPS)
            b, _ = strip(defs, mul.operands[1], EXT_OPS)
            return op.operands[1 - pos], mul, a, b
    return None


def detect_mac(f: Function, descriptor=None, refresh_only: bool = False):
    """Annotate multiply-accumulates.

    With ``refresh_only`` only ops already annotated are revisited, so their
    operand names follow rewrites; ones that no longer match lose the key.
    """
    defs = definitions(f)
    added = 0
    for op in f.walk():
        if refresh_only and "atlaas.mac" not in op.attrs:
            continue
        m = mac_operands(defs, op)
        if m is None and refresh_only:
            del op.attrs["atlaas.mac"]
        if m is None:
            continue
        acc, _, a, b = m
        wa, wb = value_type(defs, a).width, value_type(defs, b).width
        if max(wa, wb) > MAC_WIDTH_BOUND:
            continue
        added += set_attr(op, "atlaas.mac", format_mac(a, b, acc, wa, wb))
    return 0, added


def _flat_index(shape, indices) -> int:
    k = 0
    for d, i in zip(shape, indices):
        k = k * d + i
    return k


def specialize_control(f: Function, descriptor: InstructionDescriptor | None = None):
    """Substitute the instruction's fixed control values and fold the result.

    Scalar controls become constants; loads at constant indices from a
    control memref become constants.  A function none of whose arguments is
    a fixed control is returned unchanged.
    """
    if descriptor is None:
        return 0, 0
    fresh = NameGen(f)
    substituted = 0
    consts = []
    for signal, values in descriptor.fixed_controls.items():
        arg = f.arg(signal)
        if arg is None:
            continue
        t = arg.type
        if isinstance(t, IntType):
            if len(values) != 1:
                raise PassError(f"control {signal!r} of type {t} bound to {len(values)} values")
            name = fresh()
            consts.append(Operation("const", [], [name], [t],
                                    value=canonical_const(values[0], t.width)))
            substituted += replace_uses(f, signal, name)
            continue
        if not isinstance(t, MemRefType) or len(values) != t.size:
            raise PassError(f"control {signal!r} of type {t} bound to {len(values)} values")
        for op in f.walk():
            if op.opcode != "load" or op.operands[0] != signal:
                continue
            if not all(isinstance(i, int) for i in op.indices):
                continue
            k = _flat_index(t.shape, op.indices)
            op.opcode, op.operands, op.indices = "const", [], []
            op.value = canonical_const(values[k], t.element.width)
            substituted += 1
    if not substituted:
        return 0, 0
    f.body.ops[:0] = consts
    folds, branches, _ = fold_to_fixpoint(f)
    detect_mac(f, refresh_only=True)
    added = set_attr(f, "atlaas.dead_mode", branches) if branches else 0
    return substituted + folds + branches, added


def _bound_of(defs, sel: Operation):
    """For ``select(cmpi(p, v, C), C, other)`` return (p, C, v, other)."""
    if sel is None or sel.opcode != "select":
        return None
    cmp = def_op(defs, sel.operands[0], "cmpi")
    if cmp is None:
        return None
    c_sel = const_of(defs, sel.operands[1])
    c_cmp = const_of(defs, cmp.operands[1])
    if c_sel is None or c_sel != c_cmp:
        return None
    return cmp.predicate, c_sel, cmp.operands[0], sel.operands[2]


def _range_kind(lo: int, hi: int, width: int):
    """Classify [lo, hi] as a signed or unsigned w-bit range; (signed, w)."""
    for w in range(1, width):
        if lo == -(1 << (w - 1)) and hi == (1 << (w - 1)) - 1:
            return 1, w
        if lo == 0 and hi == (1 << w) - 1:
            return 0, w
    return None


_UPPER = ("sgt", "sge", "ugt", "uge")
_LOWER = ("slt", "sle", "ult", "ule")


def clamp_of(defs, op: Operation):
    """The (lo, hi, signed, w) range ``op`` clamps to, or None."""
    if op.opcode in EXT_OPS:
        tr = def_op(defs, op.operands[0], "trunci")
        if tr is None:
            return None
        w = tr.type.width
        if op.opcode == "extsi":
            return (-(1 << (w - 1)), (1 << (w - 1)) - 1, 1, w)
        return (0, (1 << w) - 1, 0, w)
    outer = _bound_of(defs, op)
    if outer is None:
        return None
    inner = _bound_of(defs, def_op(defs, outer[3], "select"))
    if inner is None or inner[2] != outer[2] or inner[3] != outer[2]:
        return None
    preds = {outer[0]: outer[1], inner[0]: inner[1]}
    hi = next((c for p, c in preds.items() if p in _UPPER), None)
    lo = next((c for p, c in preds.items() if p in _LOWER), None)
    if hi is None or lo is None:
        return None
    kind = _range_kind(lo, hi, op.type.width)
    if kind is None:
        return None
    return (lo, hi) + kind


def detect_clamp(f: Function, descriptor=None):
    defs = definitions(f)
    added = 0
    for op in f.walk():
        c = clamp_of(defs, op)
        if c is not None:
            added += set_attr(op, "atlaas.clamp", c)
    return 0, added
