"""Data structures for the bit-level SSA IR.

Values are referred to by name (without the leading ``%``).  Every value in a
function, including block arguments of ``scf.for`` regions and induction
variables, is defined exactly once, so names are unique function-wide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

AttrValue = Union[int, str, tuple]

MAX_WIDTH = 128

BINARY_OPS = ("addi", "subi", "muli", "andi", "ori", "xori", "shli", "shrsi", "shrui")
EXT_OPS = ("extsi", "extui")
CAST_OPS = ("extsi", "extui", "trunci")
CMP_PREDICATES = ("eq", "ne", "slt", "sle", "sgt", "sge", "ult", "ule", "ugt", "uge")
OPCODES = (
    ("const",) + CAST_OPS + BINARY_OPS
    + ("cmpi", "select", "load", "store", "if", "for", "yield", "return")
)

# closed annotation vocabulary; taidl.clamp carries the recovered clamp range
# onto the function for the assembler
VOCABULARY = frozenset({
    "atlaas.mac", "atlaas.clamp", "atlaas.dead_mode", "linalg_op",
    "taidl.role", "taidl.coord", "taidl.grid", "taidl.compute",
    "taidl.activation", "taidl.port_class", "taidl.clamp",
})


class IRError(Exception):
    pass


@dataclass(frozen=True)
class IntType:
    width: int

    def __post_init__(self):
        if not 1 <= self.width <= MAX_WIDTH:
            raise IRError(f"integer width {self.width} outside [1, {MAX_WIDTH}]")

    def __str__(self):
        return f"i{self.width}"

    @property
    def mask(self) -> int:
        return (1 << self.width) - 1


@dataclass(frozen=True)
class IndexType:
    def __str__(self):
        return "index"


@dataclass(frozen=True)
class MemRefType:
    shape: tuple
    element: IntType

    def __post_init__(self):
        if not self.shape or any(d < 1 for d in self.shape):
            raise IRError(f"memref shape {self.shape} must be non-empty with extents >= 1")

    def __str__(self):
        dims = "x".join(str(d) for d in self.shape)
        return f"memref<{dims}x{self.element}>"

    @property
    def size(self) -> int:
        n = 1
        for d in self.shape:
            n *= d
        return n


IrType = Union[IntType, IndexType, MemRefType]


def i(width: int) -> IntType:
    return IntType(width)


def type_bits(t: IrType) -> int:
    """Number of free input bits a value of type ``t`` carries."""
    if isinstance(t, IntType):
        return t.width
    if isinstance(t, MemRefType):
        return t.size * t.element.width
    return 0


def to_signed(value: int, width: int) -> int:
    value &= (1 << width) - 1
    if width > 1 and value >> (width - 1):
        return value - (1 << width)
    return value


def canonical_const(value: int, width: int) -> int:
    """Constants are stored signed, except i1 which is stored as 0/1."""
    if width == 1:
        return value & 1
    return to_signed(value, width)


@dataclass
class Block:
    ops: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.ops)

    def __len__(self):
        return len(self.ops)


@dataclass
class Operation:
    opcode: str
    operands: list = field(default_factory=list)
    results: list = field(default_factory=list)
    types: list = field(default_factory=list)
    attrs: dict = field(default_factory=dict)
    regions: list = field(default_factory=list)
    # const
    value: int | None = None
    # cmpi
    predicate: str | None = None
    # load / store: each index is an int or an induction-variable name
    indices: list = field(default_factory=list)
    # for
    lower: int = 0
    upper: int = 0
    step: int = 1
    iv: str | None = None
    iter_args: list = field(default_factory=list)

    @property
    def result(self) -> str:
        return self.results[0]

    @property
    def type(self) -> IrType:
        return self.types[0]

    @property
    def body(self) -> Block:
        return self.regions[0]

    @property
    def trip_count(self) -> int:
        return len(range(self.lower, self.upper, self.step))

    def walk(self) -> Iterator["Operation"]:
        yield self
        for region in self.regions:
            for op in region.ops:
                yield from op.walk()


@dataclass
class Argument:
    name: str
    type: IrType
    attrs: dict = field(default_factory=dict)

    @property
    def signal_name(self) -> str:
        return self.name


@dataclass
class Function:
    name: str
    args: list
    body: Block
    attrs: dict = field(default_factory=dict)

    @property
    def instruction(self) -> str:
        return self.name.split("__", 1)[0]

    @property
    def target_asv(self) -> str:
        parts = self.name.split("__", 1)
        return parts[1] if len(parts) == 2 else parts[0]

    def walk(self) -> Iterator[Operation]:
        for op in self.body.ops:
            yield from op.walk()

    def arg(self, name: str) -> Argument | None:
        for a in self.args:
            if a.name == name:
                return a
        return None

    def arg_names(self) -> list:
        return [a.name for a in self.args]

    @property
    def returned(self) -> str:
        last = self.body.ops[-1]
        return last.operands[0]

    def op_count(self) -> int:
        return sum(1 for _ in self.walk())


@dataclass(frozen=True)
class EncodingField:
    source: str
    hi: int
    lo: int

    def __str__(self):
        return f"{self.source}[{self.hi}:{self.lo}]"

    def extract(self, value: int) -> int:
        return (value >> self.lo) & ((1 << (self.hi - self.lo + 1)) - 1)


@dataclass(frozen=True)
class Macro:
    primitive: str
    bounds: tuple


@dataclass
class InstructionDescriptor:
    name: str
    fixed_controls: dict = field(default_factory=dict)
    asvs: list = field(default_factory=list)
    encoding: dict = field(default_factory=dict)
    macro: Macro | None = None


@dataclass
class Module:
    descriptors: list = field(default_factory=list)
    functions: list = field(default_factory=list)

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def descriptor(self, name: str) -> InstructionDescriptor | None:
        for d in self.descriptors:
            if d.name == name:
                return d
        return None

    def descriptor_map(self) -> dict:
        return {d.name: d for d in self.descriptors}


def strip_annotations(f: Function) -> Function:
    """Copy of ``f`` with every annotation removed (function, args, ops)."""
    import copy

    g = copy.deepcopy(f)
    g.attrs = {}
    for a in g.args:
        a.attrs = {}
    for op in g.walk():
        op.attrs = {}
    return g
