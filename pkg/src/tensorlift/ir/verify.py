"""Structural verifier.  Violations are returned, never raised (except by
:func:`verify_module`, which the parser uses)."""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    BINARY_OPS, EXT_OPS, Function, IndexType, IntType, IRError, MemRefType, Module,
    Operation,
)


@dataclass(frozen=True)
class Violation:
    rule: str
    where: str
    detail: str

    def __str__(self):
        return f"{self.where}: {self.rule}: {self.detail}"


class VerificationError(IRError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class _Verifier:
    def __init__(self, f: Function):
        self.f = f
        self.out = []
        self.defined = set()
        self.ivs = {}

    def fail(self, rule, where, detail):
        self.out.append(Violation(rule, where, detail))

    def define(self, name, where):
        if name in self.defined:
            self.fail("redefined value", where, f"%{name} defined more than once")
        self.defined.add(name)

    def run(self):
        f = self.f
        scope = {}
        for a in f.args:
            if not a.name:
                self.fail("signal name", f"@{f.name}", "argument without signal name")
            self.define(a.name, f"@{f.name}")
            scope[a.name] = a.type
        ops = f.body.ops
        if not ops or ops[-1].opcode != "return":
            self.fail("missing return", f"@{f.name}", "function must end in return")
        self.block(ops, scope, terminator="return")
        return self.out

    def block(self, ops, scope, terminator):
        scope = dict(scope)
        for k, op in enumerate(ops):
            is_last = k == len(ops) - 1
            if op.opcode in ("return", "yield"):
                if op.opcode != terminator or not is_last:
                    self.fail("terminator", self.where(op), f"misplaced {op.opcode}")
            self.operation(op, scope)
        if terminator == "yield" and (not ops or ops[-1].opcode != "yield"):
            self.fail("terminator", f"@{self.f.name}", "region must end in scf.yield")
        return scope

    def where(self, op: Operation) -> str:
        if op.results:
            return f"%{op.results[0]}"
        return f"{op.opcode} in @{self.f.name}"

    def use(self, name, scope, op):
        if name not in scope:
            self.fail("undefined value", self.where(op), f"use of undefined value %{name}")
            return None
        return scope[name]

    def int_operands(self, op, scope):
        ts = [self.use(v, scope, op) for v in op.operands]
        for t in ts:
            if t is not None and not isinstance(t, IntType):
                self.fail("operand type", self.where(op), f"{op.opcode} needs integer operands")
                return None
        if any(t is None for t in ts):
            return None
        return ts

    def operation(self, op: Operation, scope):
        w = self.where(op)
        oc = op.opcode
        if len(op.results) != len(op.types):
            self.fail("result arity", w, "result/type count mismatch")
        rt = op.types[0] if op.types else None

        if oc == "const":
            if not isinstance(rt, IntType) or op.value is None:
                self.fail("constant", w, "constant needs an integer type and value")
            elif not -(1 << (rt.width - 1)) <= op.value < (1 << rt.width):
                self.fail("constant", w, f"{op.value} does not fit {rt}")
        elif oc in EXT_OPS or oc == "trunci":
            ts = self.int_operands(op, scope)
            if ts and len(ts) == 1 and isinstance(rt, IntType):
                if oc in EXT_OPS and not rt.width > ts[0].width:
                    self.fail("bad extension", w, f"{oc} must widen ({ts[0]} -> {rt})")
                if oc == "trunci" and not rt.width < ts[0].width:
                    self.fail("bad truncation", w, f"trunci must narrow ({ts[0]} -> {rt})")
            elif ts is not None:
                self.fail("operand type", w, f"{oc} takes one integer operand")
        elif oc in BINARY_OPS:
            ts = self.int_operands(op, scope)
            if ts is not None:
                if len(ts) != 2:
                    self.fail("operand type", w, f"{oc} takes two operands")
                elif ts[0] != ts[1] or ts[0] != rt:
                    self.fail("width mismatch", w,
                              f"{oc} operands {ts[0]}, {ts[1]} -> {rt}")
        elif oc == "cmpi":
            ts = self.int_operands(op, scope)
            if ts is not None and (len(ts) != 2 or ts[0] != ts[1]):
                self.fail("width mismatch", w, "cmpi operands must share a width")
            if rt != IntType(1):
                self.fail("cmpi result", w, "cmpi produces i1")
        elif oc == "select":
            ts = [self.use(v, scope, op) for v in op.operands]
            if len(ts) != 3:
                self.fail("operand type", w, "select takes three operands")
            elif None not in ts:
                if ts[0] != IntType(1):
                    self.fail("select condition", w, "condition must be i1")
                if ts[1] != ts[2] or ts[1] != rt:
                    self.fail("select arms", w, "arms must share the result type")
        elif oc in ("load", "store"):
            self.memory(op, scope, rt)
        elif oc == "if":
            self.if_op(op, scope)
        elif oc == "for":
            self.for_op(op, scope)
        elif oc in ("yield", "return"):
            for v in op.operands:
                self.use(v, scope, op)
            if oc == "return" and len(op.operands) != 1:
                self.fail("missing return", w, "return takes exactly one value")
        else:
            self.fail("opcode", w, f"unknown opcode {oc}")

        for r, t in zip(op.results, op.types):
            self.define(r, w)
            scope[r] = t

    def memory(self, op, scope, rt):
        w = self.where(op)
        want = 1 if op.opcode == "load" else 2
        if len(op.operands) != want:
            self.fail("operand type", w, f"{op.opcode} takes {want} operands")
            return
        mt = self.use(op.operands[-1], scope, op)
        vt = self.use(op.operands[0], scope, op) if op.opcode == "store" else None
        if not isinstance(mt, MemRefType):
            if mt is not None:
                self.fail("operand type", w, f"{op.opcode} needs a memref")
            return
        if op.opcode == "load" and rt != mt.element:
            self.fail("width mismatch", w, f"load of {mt} yields {mt.element}")
        if op.opcode == "store":
            if vt is not None and vt != mt.element:
                self.fail("width mismatch", w, f"storing {vt} into {mt}")
            if rt != mt:
                self.fail("operand type", w, "store yields the updated memref")
        if len(op.indices) != len(mt.shape):
            self.fail("index", w, f"{len(op.indices)} indices for rank {len(mt.shape)}")
            return
        for idx, extent in zip(op.indices, mt.shape):
            if isinstance(idx, int):
                if not 0 <= idx < extent:
                    self.fail("index", w, f"index {idx} out of bounds for extent {extent}")
                continue
            t = self.use(idx, scope, op)
            loop = self.ivs.get(idx)
            if t is not None and not isinstance(t, IndexType):
                self.fail("index", w, f"%{idx} is not an induction variable")
            elif loop is not None:
                lo, hi = loop
                if lo < 0 or hi >= extent:
                    self.fail("index", w, f"%{idx} ranges over [{lo}, {hi}] beyond extent {extent}")

    def if_op(self, op, scope):
        w = self.where(op)
        if len(op.operands) != 1:
            self.fail("operand type", w, "scf.if takes one condition")
            return
        ct = self.use(op.operands[0], scope, op)
        if ct is not None and ct != IntType(1):
            self.fail("select condition", w, "scf.if condition must be i1")
        if len(op.regions) != 2:
            self.fail("region", w, "scf.if carries then/else regions")
            return
        for region in op.regions:
            if not region.ops and not op.types:
                continue
            local = self.block(region.ops, scope, "yield")
            if region.ops and region.ops[-1].opcode == "yield":
                self.check_yield(region.ops[-1], op.types, local, "if arity")

    def for_op(self, op, scope):
        w = self.where(op)
        if op.step < 1:
            self.fail("for bounds", w, "step must be positive")
        if len(op.iter_args) != len(op.operands) or len(op.iter_args) != len(op.types):
            self.fail("loop-carried arity", w, "iter_args, inits and results must match")
        inner = dict(scope)
        self.define(op.iv, w)
        inner[op.iv] = IndexType()
        trip = range(op.lower, op.upper, max(op.step, 1))
        self.ivs[op.iv] = (trip[0], trip[-1]) if len(trip) else (0, -1)
        for a, init, t in zip(op.iter_args, op.operands, op.types):
            it = self.use(init, scope, op)
            if it is not None and it != t:
                self.fail("loop-carried arity", w, f"init %{init} has type {it}, expected {t}")
            self.define(a, w)
            inner[a] = t
        if len(op.regions) != 1:
            self.fail("region", w, "scf.for carries one region")
            return
        body = op.body.ops
        local = self.block(body, inner, "yield")
        if body and body[-1].opcode == "yield":
            self.check_yield(body[-1], op.types, local, "loop-carried arity")

    def check_yield(self, y, types, local, rule):
        if len(y.operands) != len(types):
            self.fail(rule, self.where(y), f"yields {len(y.operands)} values, expected {len(types)}")
            return
        for v, t in zip(y.operands, types):
            if v in local and local[v] != t:
                self.fail(rule, self.where(y), f"%{v} has type {local[v]}, expected {t}")


def verify(f: Function) -> list:
    """Return the list of violations in ``f`` (empty means ok)."""
    return _Verifier(f).run()


def verify_module(m: Module) -> None:
    violations = []
    names = set()
    for f in m.functions:
        if f.name in names:
            violations.append(Violation("duplicate function", f"@{f.name}", "name reused"))
        names.add(f.name)
        violations += verify(f)
    if violations:
        raise VerificationError(violations)
