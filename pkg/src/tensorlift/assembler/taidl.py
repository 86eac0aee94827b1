"""TAIDL specification model, text serializer and a self-check parser.

Text layout, one statement per line::

    acc.add_data_model("NAME", "DIMS", "SHAPExTYPE")
    # banked: NAME x COUNT select FIELD
    instr = acc.add_instruction("NAME", ["REG", ...])
    instr.add_semantics(\"\"\"
    %0 = OPNAME(ARGS)
    store(ARGS)
    \"\"\")
    # order: NAME before NAME via STATE

An opaque instruction has no ``add_semantics`` call; its ASVs follow on a
``# opaque asvs: ...`` line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

OPNAMES = ("convert", "dot", "add", "clamp", "maximum", "reduce", "reshape", "load", "store")


class TaidlSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


@dataclass
class DataModel:
    name: str
    dims: str
    shape: str


@dataclass
class Statement:
    """``target = opname(args)``, or a bare ``opname(args)`` when target is None."""

    opname: str
    args: list
    target: str | None = None

    def to_text(self) -> str:
        call = f"{self.opname}({', '.join(str(a) for a in self.args)})"
        return f"{self.target} = {call}" if self.target else call


@dataclass
class Instruction:
    name: str
    operands: list
    body: list | None  # list of Statement; None for an opaque stub
    asvs: list = field(default_factory=list)
    route: str = "opaque"

    @property
    def opaque(self) -> bool:
        return self.body is None


@dataclass
class BankedRegister:
    base: str
    count: int
    select: str

    def to_text(self) -> str:
        return f"{self.base} x {self.count} select {self.select}"


@dataclass
class Ordering:
    before: str
    after: str
    via: str

    def to_text(self) -> str:
        return f"{self.before} before {self.after} via {self.via}"


@dataclass
class TaidlSpec:
    data_models: list = field(default_factory=list)
    instructions: list = field(default_factory=list)
    ordering: list = field(default_factory=list)
    banked: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def instruction(self, name: str) -> Instruction | None:
        for ins in self.instructions:
            if ins.name == name:
                return ins
        return None

    def to_text(self) -> str:
        out = []
        for d in self.data_models:
            out.append(f'acc.add_data_model("{d.name}", "{d.dims}", "{d.shape}")')
        for b in self.banked:
            out.append(f"# banked: {b.to_text()}")
        for ins in self.instructions:
            regs = ", ".join(f'"{r}"' for r in ins.operands)
            out.append(f'instr = acc.add_instruction("{ins.name}", [{regs}])')
            if ins.opaque:
                out.append(f"# opaque asvs: {' '.join(ins.asvs)}")
                continue
            out.append('instr.add_semantics("""')
            out += [s.to_text() for s in ins.body]
            out.append('""")')
        for o in self.ordering:
            out.append(f"# order: {o.to_text()}")
        return "".join(line + "\n" for line in out)


_DATA_MODEL = re.compile(r'acc\.add_data_model\("(\w+)", "([\w*+]+)", "(\w+)"\)')
_BANK = re.compile(r"# banked: (\w+) x (\d+) select (\S+)")
_INSTR = re.compile(r'instr = acc\.add_instruction\("(\w+)", \[((?:"\w+"(?:, "\w+")*)?)\]\)')
_OPAQUE = re.compile(r"# opaque asvs:((?: \w+)*)")
_ORDER = re.compile(r"# order: (\w+) before (\w+) via (\w+)")
_STMT = re.compile(r"(?:(%\w+) = )?(\w+)\((.*)\)")
_ARG_ATOM = re.compile(
    r"(?P<kw>\w+=\{[\d, ]*\})|(?P<tmp>%\w+)|(?P<model>@\w+)|(?P<int>-?\d+)"
    r"|(?P<type>[su]\d+)|(?P<op>max|min|sum)|(?P<bank>\w+\[\w+\[\d+:\d+\]\])|(?P<name>\w+)")


def split_args(text: str) -> list:
    """Split on top-level commas (braces and brackets nest)."""
    out, depth, cur = [], 0, ""
    for ch in text:
        if ch in "{[(":
            depth += 1
        elif ch in "}])":
            depth -= 1
        if ch == "," and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    if cur.strip():
        out.append(cur.strip())
    return out


def _check_arg(arg, lineno, temps, models, operands, banks):
    m = _ARG_ATOM.fullmatch(arg)
    if m is None:
        raise TaidlSyntaxError(f"malformed argument {arg!r}", lineno)
    kind = m.lastgroup
    if kind == "tmp" and arg not in temps:
        raise TaidlSyntaxError(f"temporary {arg} used before definition", lineno)
    if kind == "model" and arg[1:] not in models:
        raise TaidlSyntaxError(f"undeclared data model {arg}", lineno)
    if kind == "name" and arg not in operands:
        raise TaidlSyntaxError(f"{arg!r} is not an operand of the instruction", lineno)
    if kind == "bank":
        base, field_ = arg.split("[", 1)
        if base not in banks or field_[:-1].split("[")[0] not in operands:
            raise TaidlSyntaxError(f"bad banked reference {arg!r}", lineno)


def parse_taidl(text: str) -> TaidlSpec:
    """Parse (and validate) TAIDL text produced by :meth:`TaidlSpec.to_text`."""
    spec = TaidlSpec()
    lines = text.splitlines()
    section = 0  # data models, banks, instructions, orderings must come in this order
    k = 0

    def advance(to: int, lineno: int):
        nonlocal section
        if to < section:
            raise TaidlSyntaxError("statement out of order", lineno)
        section = to

    while k < len(lines):
        line, lineno = lines[k], k + 1
        k += 1
        if not line.strip():
            continue
        if m := _DATA_MODEL.fullmatch(line):
            advance(0, lineno)
            spec.data_models.append(DataModel(*m.groups()))
        elif m := _BANK.fullmatch(line):
            advance(1, lineno)
            spec.banked.append(BankedRegister(m.group(1), int(m.group(2)), m.group(3)))
        elif m := _INSTR.fullmatch(line):
            advance(2, lineno)
            regs = re.findall(r'"(\w+)"', m.group(2) or "")
            if k < len(lines) and (o := _OPAQUE.fullmatch(lines[k])):
                k += 1
                spec.instructions.append(Instruction(m.group(1), regs, None, o.group(1).split()))
                continue
            if k >= len(lines) or lines[k] != 'instr.add_semantics("""':
                raise TaidlSyntaxError("instruction without semantics", lineno)
            k += 1
            body = []
            models = {d.name for d in spec.data_models}
            banks = {b.base for b in spec.banked}
            temps = set()
            while k < len(lines) and lines[k] != '""")':
                sm = _STMT.fullmatch(lines[k])
                if sm is None or sm.group(2) not in OPNAMES:
                    raise TaidlSyntaxError(f"malformed statement {lines[k]!r}", k + 1)
                target, opname, args = sm.groups()
                if target in temps:
                    raise TaidlSyntaxError(f"temporary {target} redefined", k + 1)
                args = split_args(args)
                for a in args:
                    _check_arg(a, k + 1, temps, models, regs, banks)
                if target:
                    temps.add(target)
                body.append(Statement(opname, args, target))
                k += 1
            if k >= len(lines):
                raise TaidlSyntaxError("unterminated semantics body", lineno)
            k += 1
            if not body:
                raise TaidlSyntaxError("empty semantics body", lineno)
            finals = [s for s in body if s.target is None]
            if len(finals) != 1 or body[-1].target is not None or body[-1].opname != "store":
                raise TaidlSyntaxError("body must end in exactly one store", lineno)
            spec.instructions.append(Instruction(m.group(1), regs, body))
        elif m := _ORDER.fullmatch(line):
            advance(3, lineno)
            spec.ordering.append(Ordering(*m.groups()))
        else:
            raise TaidlSyntaxError(f"unrecognized line {line!r}", lineno)
    names = {ins.name for ins in spec.instructions}
    for o in spec.ordering:
        if o.before not in names or o.after not in names:
            raise TaidlSyntaxError(f"ordering names an undeclared instruction: {o.to_text()}")
    return spec
