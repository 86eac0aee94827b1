"""Textual IR: tokenizer, recursive-descent parser and canonical printer.

Example::

    descriptor "pe_mac" {
      controls: "in_control_dataflow" = [1]
      asvs: "pe_acc"
    }
    func @pe_mac__pe_acc(%in_a : memref<1xi8>, %pe_acc : memref<1xi32>) {
      %0 = memref.load %in_a[0] : i8
      %1 = arith.extsi %0 : i32
      %2 = memref.store %1, %pe_acc[0] : memref<1xi32>
      return %2
    }
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .core import (
    BINARY_OPS, CAST_OPS, CMP_PREDICATES, Argument, Block, EncodingField, Function,
    IndexType, InstructionDescriptor, IntType, IRError, Macro, MemRefType, Module,
    Operation, canonical_const,
)

HEADER = "// tensorlift IR v1"


class ParseError(IRError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<type>memref<[0-9x]+i[0-9]+>)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<value>%[A-Za-z0-9_.$]+)
  | (?P<symbol>@[A-Za-z0-9_.$]+)
  | (?P<int>-?[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<arrow>->)
  | (?P<punct>[{}()\[\],:=])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def parse_type(text: str):
    if text == "index":
        return IndexType()
    m = re.fullmatch(r"i([0-9]+)", text)
    if m:
        return IntType(int(m.group(1)))
    m = re.fullmatch(r"memref<([0-9x]+)xi([0-9]+)>", text)
    if m:
        dims = tuple(int(d) for d in m.group(1).split("x"))
        return MemRefType(dims, IntType(int(m.group(2))))
    raise IRError(f"bad type {text!r}")


_ARITH = {f"arith.{op}": op for op in BINARY_OPS + CAST_OPS + ("cmpi", "select")}
_ARITH["arith.constant"] = "const"
_ARITH["memref.load"] = "load"
_ARITH["memref.store"] = "store"


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.pos = 0

    # -- token helpers -----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def next(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "str"

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def expect_kind(self, kind: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {kind}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def int_(self) -> int:
        return int(self.expect_kind("int").text)

    def str_(self) -> str:
        return self.expect_kind("str").text[1:-1].replace('\\"', '"')

    def value(self) -> str:
        return self.expect_kind("value").text[1:]

    def type_(self):
        t = self.tok
        if t.kind not in ("type", "ident"):
            raise self.error(f"expected type, found {t.text!r}")
        self.next()
        try:
            return parse_type(t.text)
        except IRError as e:
            raise self.error(str(e), t) from None

    # -- module ------------------------------------------------------------
    def module(self) -> Module:
        m = Module()
        while self.at("descriptor"):
            m.descriptors.append(self.descriptor())
        while self.at("func"):
            m.functions.append(self.function())
        if self.tok.kind != "eof":
            raise self.error(f"expected 'descriptor' or 'func', found {self.tok.text!r}")
        return m

    def descriptor(self) -> InstructionDescriptor:
        self.expect("descriptor")
        d = InstructionDescriptor(self.str_())
        self.expect("{")
        if self.accept("controls"):
            self.expect(":")
            while self.tok.kind == "str":
                key = self.str_()
                self.expect("=")
                d.fixed_controls[key] = self.int_list()
        if self.accept("asvs"):
            self.expect(":")
            while self.tok.kind == "str":
                d.asvs.append(self.str_())
        if self.accept("encoding"):
            self.expect(":")
            while self.tok.kind == "str":
                key = self.str_()
                self.expect("=")
                src = self.str_()
                self.expect("[")
                hi = self.int_()
                self.expect(":")
                lo = self.int_()
                self.expect("]")
                if hi < lo:
                    raise self.error(f"encoding field {key} has hi < lo")
                d.encoding[key] = EncodingField(src, hi, lo)
        if self.accept("macro"):
            self.expect(":")
            prim = self.str_()
            self.expect("bounds")
            bounds = [self.str_()]
            while self.tok.kind == "str":
                bounds.append(self.str_())
            d.macro = Macro(prim, tuple(bounds))
        self.expect("}")
        return d

    def int_list(self) -> list:
        self.expect("[")
        vals = [self.int_()]
        while self.accept(","):
            vals.append(self.int_())
        self.expect("]")
        return vals

    def attr_dict(self) -> dict:
        attrs = {}
        self.expect("{")
        while not self.at("}"):
            key_tok = self.expect_kind("ident")
            self.expect("=")
            if self.tok.kind == "int":
                val = self.int_()
            elif self.tok.kind == "str":
                val = self.str_()
            elif self.at("["):
                val = tuple(self.int_list())
            else:
                raise self.error("expected annotation value")
            if key_tok.text in attrs:
                raise self.error(f"duplicate annotation {key_tok.text}", key_tok)
            attrs[key_tok.text] = val
            self.accept(",")
        self.expect("}")
        return attrs

    def at_attr_dict(self) -> bool:
        if not self.at("{"):
            return False
        nxt = self.peek()
        return nxt.text == "}" or (nxt.kind == "ident" and self.peek(2).text == "=")

    def function(self) -> Function:
        self.expect("func")
        name = self.expect_kind("symbol").text[1:]
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.argument())
            while self.accept(","):
                args.append(self.argument())
        self.expect(")")
        attrs = self.attr_dict() if self.at_attr_dict() else {}
        body = self.block()
        return Function(name, args, body, attrs)

    def argument(self) -> Argument:
        name = self.value()
        self.expect(":")
        t = self.type_()
        attrs = self.attr_dict() if self.at("{") else {}
        return Argument(name, t, attrs)

    def block(self) -> Block:
        self.expect("{")
        ops = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated region")
            ops.append(self.operation())
        self.expect("}")
        return Block(ops)

    def index_list(self) -> list:
        self.expect("[")
        idx = [self.index()]
        while self.accept(","):
            idx.append(self.index())
        self.expect("]")
        return idx

    def index(self):
        if self.tok.kind == "int":
            return self.int_()
        return self.value()

    def type_list(self) -> list:
        if self.accept("("):
            ts = [self.type_()]
            while self.accept(","):
                ts.append(self.type_())
            self.expect(")")
            return ts
        return [self.type_()]

    def operation(self) -> Operation:
        start = self.tok
        results = []
        if self.tok.kind == "value":
            results.append(self.value())
            while self.accept(","):
                results.append(self.value())
            self.expect("=")
        head = self.expect_kind("ident")
        mnemonic = head.text
        if mnemonic == "return":
            return Operation("return", [self.value()])
        if mnemonic == "scf.yield":
            vals = []
            if self.tok.kind == "value":
                vals.append(self.value())
                while self.accept(","):
                    vals.append(self.value())
            return Operation("yield", vals)
        if mnemonic == "scf.if":
            cond = self.value()
            types = self.type_list() if self.accept("->") else []
            attrs = self.attr_dict() if self.at_attr_dict() else {}
            then = self.block()
            other = self.block() if self.accept("else") else Block([])
            op = Operation("if", [cond], results, types, attrs, [then, other])
            return self._check_arity(op, start)
        if mnemonic == "scf.for":
            iv = self.value()
            self.expect("=")
            lower = self.int_()
            self.expect("to")
            upper = self.int_()
            self.expect("step")
            step = self.int_()
            iter_args, inits = [], []
            if self.accept("iter_args"):
                self.expect("(")
                while not self.at(")"):
                    iter_args.append(self.value())
                    self.expect("=")
                    inits.append(self.value())
                    self.accept(",")
                self.expect(")")
            types = self.type_list() if self.accept("->") else []
            attrs = self.attr_dict() if self.at_attr_dict() else {}
            body = self.block()
            op = Operation("for", inits, results, types, attrs, [body], lower=lower,
                           upper=upper, step=step, iv=iv, iter_args=iter_args)
            return self._check_arity(op, start)
        if mnemonic not in _ARITH:
            raise self.error(f"unknown opcode {mnemonic!r}", head)
        opcode = _ARITH[mnemonic]
        op = Operation(opcode, [], results)
        if opcode == "const":
            op.value = self.int_()
        elif opcode == "cmpi":
            pred = self.expect_kind("ident")
            if pred.text not in CMP_PREDICATES:
                raise self.error(f"unknown cmpi predicate {pred.text!r}", pred)
            op.predicate = pred.text
            self.accept(",")
            op.operands = [self.value()]
            self.expect(",")
            op.operands.append(self.value())
        elif opcode == "load":
            op.operands = [self.value()]
            op.indices = self.index_list()
        elif opcode == "store":
            op.operands = [self.value()]
            self.expect(",")
            op.operands.append(self.value())
            op.indices = self.index_list()
        else:
            op.operands = [self.value()]
            while self.accept(","):
                op.operands.append(self.value())
        self.expect(":")
        op.types = [self.type_()]
        if opcode == "const" and isinstance(op.types[0], IntType):
            op.value = canonical_const(op.value, op.types[0].width)
        if self.at("{"):
            op.attrs = self.attr_dict()
        return self._check_arity(op, start)

    def _check_arity(self, op: Operation, tok: Token) -> Operation:
        if len(op.results) != len(op.types):
            raise self.error(
                f"{op.opcode}: {len(op.results)} results but {len(op.types)} types", tok)
        return op


def parse_module(text: str, verify: bool = True) -> Module:
    """Parse IR text into a :class:`Module`; verifies it unless told otherwise."""
    m = Parser(text).module()
    if verify:
        from .verify import verify_module

        verify_module(m)
    return m


# -- printing ----------------------------------------------------------------

def format_attr_value(v) -> str:
    if isinstance(v, str):
        return '"' + v.replace('"', '\\"') + '"'
    if isinstance(v, (tuple, list)):
        return "[" + ", ".join(str(x) for x in v) + "]"
    return str(int(v))


def format_attrs(attrs: dict) -> str:
    items = ", ".join(f"{k} = {format_attr_value(attrs[k])}" for k in sorted(attrs))
    return "{" + items + "}"


def _idx(indices) -> str:
    return "[" + ", ".join(str(x) if isinstance(x, int) else f"%{x}" for x in indices) + "]"


def _types(types) -> str:
    if len(types) == 1:
        return str(types[0])
    return "(" + ", ".join(str(t) for t in types) + ")"


def print_op(op: Operation, indent: int = 1) -> list:
    pad = "  " * indent
    lhs = ", ".join(f"%{r}" for r in op.results)
    lhs = lhs + " = " if lhs else ""
    attrs = " " + format_attrs(op.attrs) if op.attrs else ""
    ops = ", ".join(f"%{v}" for v in op.operands)
    if op.opcode == "return":
        return [f"{pad}return %{op.operands[0]}"]
    if op.opcode == "yield":
        return [f"{pad}scf.yield" + (f" {ops}" if ops else "")]
    if op.opcode == "if":
        head = f"{pad}{lhs}scf.if %{op.operands[0]}"
        if op.types:
            head += f" -> {_types(op.types)}"
        lines = [head + attrs + " {"]
        lines += _print_block(op.regions[0], indent + 1)
        if op.regions[1].ops:
            lines.append(pad + "} else {")
            lines += _print_block(op.regions[1], indent + 1)
        lines.append(pad + "}")
        return lines
    if op.opcode == "for":
        head = f"{pad}{lhs}scf.for %{op.iv} = {op.lower} to {op.upper} step {op.step}"
        if op.iter_args:
            binds = ", ".join(f"%{a} = %{v}" for a, v in zip(op.iter_args, op.operands))
            head += f" iter_args({binds})"
        if op.types:
            head += f" -> {_types(op.types)}"
        lines = [head + attrs + " {"]
        lines += _print_block(op.body, indent + 1)
        lines.append(pad + "}")
        return lines
    if op.opcode == "const":
        body = f"arith.constant {op.value}"
    elif op.opcode == "cmpi":
        body = f"arith.cmpi {op.predicate}, {ops}"
    elif op.opcode == "load":
        body = f"memref.load %{op.operands[0]}{_idx(op.indices)}"
    elif op.opcode == "store":
        body = f"memref.store %{op.operands[0]}, %{op.operands[1]}{_idx(op.indices)}"
    else:
        body = f"arith.{op.opcode} {ops}"
    return [f"{pad}{lhs}{body} : {op.types[0]}{attrs}"]


def _print_block(block: Block, indent: int) -> list:
    lines = []
    for op in block.ops:
        lines += print_op(op, indent)
    return lines


def print_descriptor(d: InstructionDescriptor) -> list:
    lines = [f'descriptor "{d.name}" {{']
    if d.fixed_controls:
        binds = " ".join(
            f'"{k}" = [' + ", ".join(str(v) for v in vals) + "]"
            for k, vals in d.fixed_controls.items())
        lines.append(f"  controls: {binds}")
    if d.asvs:
        lines.append("  asvs: " + " ".join(f'"{a}"' for a in d.asvs))
    if d.encoding:
        fields = " ".join(f'"{k}" = "{e.source}"[{e.hi}:{e.lo}]' for k, e in d.encoding.items())
        lines.append(f"  encoding: {fields}")
    if d.macro:
        bounds = " ".join(f'"{b}"' for b in d.macro.bounds)
        lines.append(f'  macro: "{d.macro.primitive}" bounds {bounds}')
    lines.append("}")
    return lines


def print_function(f: Function) -> list:
    args = []
    for a in f.args:
        s = f"%{a.name} : {a.type}"
        if a.attrs:
            s += " " + format_attrs(a.attrs)
        args.append(s)
    head = f"func @{f.name}(" + ", ".join(args) + ")"
    if f.attrs:
        head += " " + format_attrs(f.attrs)
    return [head + " {"] + _print_block(f.body, 1) + ["}"]


def print_module(m: Module) -> str:
    lines = [HEADER]
    for d in m.descriptors:
        lines += print_descriptor(d)
    for f in m.functions:
        lines += print_function(f)
    return "\n".join(lines) + "\n"


def print_function_text(f: Function) -> str:
    return "\n".join(print_function(f)) + "\n"
