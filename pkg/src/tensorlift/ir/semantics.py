"""Scalar two's-complement semantics on Python ints.

All values are unsigned bit patterns in ``[0, 2**width)``.  Used by constant
folding; the oracle has its own vectorised implementation.
"""

from __future__ import annotations


def _mask(w: int) -> int:
    return (1 << w) - 1


def signed(x: int, w: int) -> int:
    x &= _mask(w)
    return x - (1 << w) if x >> (w - 1) else x


def binary(opcode: str, a: int, b: int, w: int) -> int:
    m = _mask(w)
    if opcode == "addi":
        return (a + b) & m
    if opcode == "subi":
        return (a - b) & m
    if opcode == "muli":
        return (a * b) & m
    if opcode == "andi":
        return a & b
    if opcode == "ori":
        return a | b
    if opcode == "xori":
        return a ^ b
    if opcode == "shli":
        return 0 if b >= w else (a << b) & m
    if opcode == "shrui":
        return 0 if b >= w else a >> b
    if opcode == "shrsi":
        return (signed(a, w) >> min(b, w - 1)) & m
    raise ValueError(opcode)


def cast(opcode: str, x: int, w_from: int, w_to: int) -> int:
    if opcode == "extui":
        return x
    if opcode == "extsi":
        return signed(x, w_from) & _mask(w_to)
    if opcode == "trunci":
        return x & _mask(w_to)
    raise ValueError(opcode)


def compare(pred: str, a: int, b: int, w: int) -> int:
    if pred[0] == "s":
        a, b = signed(a, w), signed(b, w)
        pred = pred[1:]
    elif pred[0] == "u":
        pred = pred[1:]
    return int({
        "eq": a == b, "ne": a != b, "lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b,
    }[pred])
