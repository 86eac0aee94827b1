"""Helpers for constructing functions programmatically."""

from __future__ import annotations

from .core import (
    Argument, Block, Function, IntType, MemRefType, Operation, canonical_const,
)


class Builder:
    """Appends operations to a block, naming results ``%0``, ``%1``, ...

    Nested regions are built with :meth:`region`, which returns a child
    builder sharing the name counter.
    """

    def __init__(self, block: Block | None = None, counter: list | None = None):
        self.block = block if block is not None else Block([])
        self._counter = counter if counter is not None else [0]

    def fresh(self) -> str:
        name = str(self._counter[0])
        self._counter[0] += 1
        return name

    def region(self) -> "Builder":
        return Builder(Block([]), self._counter)

    def emit(self, op: Operation) -> Operation:
        self.block.ops.append(op)
        return op

    def _op(self, opcode, operands, type_, **kw) -> str:
        r = self.fresh()
        self.emit(Operation(opcode, list(operands), [r], [type_], **kw))
        return r

    def const(self, value: int, type_: IntType) -> str:
        return self._op("const", [], type_, value=canonical_const(value, type_.width))

    def binary(self, opcode: str, a: str, b: str, type_: IntType) -> str:
        return self._op(opcode, [a, b], type_)

    def cast(self, opcode: str, x: str, type_: IntType) -> str:
        return self._op(opcode, [x], type_)

    def cmpi(self, pred: str, a: str, b: str) -> str:
        return self._op("cmpi", [a, b], IntType(1), predicate=pred)

    def select(self, c: str, a: str, b: str, type_: IntType) -> str:
        return self._op("select", [c, a, b], type_)

    def load(self, ref: str, indices: list, type_: IntType) -> str:
        return self._op("load", [ref], type_, indices=list(indices))

    def store(self, value: str, ref: str, indices: list, type_: MemRefType) -> str:
        return self._op("store", [value, ref], type_, indices=list(indices))

    def yield_(self, *values: str) -> None:
        self.emit(Operation("yield", list(values)))

    def ret(self, value: str) -> None:
        self.emit(Operation("return", [value]))

    def if_(self, cond: str, then: "Builder", other: "Builder", types: list) -> list:
        results = [self.fresh() for _ in types]
        self.emit(Operation("if", [cond], results, list(types), regions=[then.block, other.block]))
        return results

    def for_(self, lower, upper, step, inits, body: "Builder", iv: str, iter_args: list,
             types: list) -> list:
        results = [self.fresh() for _ in types]
        self.emit(Operation("for", list(inits), results, list(types), regions=[body.block],
                            lower=lower, upper=upper, step=step, iv=iv,
                            iter_args=list(iter_args)))
        return results


def function(name: str, args: list, builder: Builder, attrs: dict | None = None) -> Function:
    """Wrap ``builder``'s block as a function; ``args`` is [(name, type), ...]."""
    return Function(name, [Argument(n, t) for n, t in args], builder.block, dict(attrs or {}))
