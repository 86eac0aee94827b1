"""Semantics-body emission: compute, DMA, config, macro and opaque routes."""

from __future__ import annotations

from ..ir.analysis import backward_slice, definitions, uses
from ..ir.core import CAST_OPS, Argument, MemRefType
from ..passes.common import def_op, strip, value_type
from ..passes.idioms import parse_mac
from ..passes.metadata import port_class
from .group import AssemblyError, InstructionGroup
from .taidl import DataModel, Statement

DIM = 16


class Body:
    """Accumulates statements with fresh ``%N`` temporaries."""

    def __init__(self):
        self.stmts = []

    def add(self, opname: str, *args) -> str:
        t = f"%{len(self.stmts)}"
        self.stmts.append(Statement(opname, list(args), t))
        return t

    def store(self, *args) -> list:
        self.stmts.append(Statement("store", list(args)))
        return self.stmts


def shape_of(t) -> str:
    """``16xs8`` style row shape for a memref (or scalar) element type."""
    elem = t.element if isinstance(t, MemRefType) else t
    return f"{DIM}xs{elem.width}"


class Refs:
    """Resolves signal names to ``@model`` or bare operand references."""

    def __init__(self, models: dict):
        self.models = models

    def __call__(self, name: str) -> str:
        return f"@{name}" if name in self.models else name


def _source(defs, v: str) -> str:
    """The argument a value is read from, through casts, loads and loop inits."""
    v, _ = strip(defs, v, CAST_OPS)
    d = defs.get(v)
    if isinstance(d, Argument):
        return v
    if d is not None and d.opcode == "for" and v in d.iter_args:
        return _source(defs, d.operands[d.iter_args.index(v)])
    if d is not None and d.opcode == "load" and isinstance(defs.get(d.operands[0]), Argument):
        return d.operands[0]
    raise AssemblyError(f"cannot trace %{v} to an argument")


def _convert_type(defs, v: str) -> str:
    _, casts = strip(defs, v, CAST_OPS)
    sign = "u" if casts and casts[-1].opcode == "extui" else "s"
    return f"{sign}{value_type(defs, v).width}"


def _epilogue(body: Body, f, x: str) -> str:
    if "taidl.clamp" in f.attrs:
        lo, hi = f.attrs["taidl.clamp"][:2]
        x = body.add("clamp", lo, x, hi)
    if f.attrs.get("taidl.activation") == "relu":
        x = body.add("maximum", x, 0)
    return x


def compute_member(g: InstructionGroup):
    for f in g.members:
        if f.attrs.get("taidl.compute") in ("dot_product", "max_reduce"):
            return f
    return None


def emit_compute(g: InstructionGroup, ref: Refs) -> list:
    f = compute_member(g)
    if f is None:
        raise AssemblyError(f"instruction {g.name!r} has no compute-tagged member")
    defs = definitions(f)
    core = backward_slice(f, [f.returned])
    body = Body()
    if f.attrs["taidl.compute"] == "dot_product":
        macs = [op for op in core if op.opcode == "addi" and "atlaas.mac" in op.attrs]
        if not macs:
            raise AssemblyError(f"{f.name}: dot_product without a multiply-accumulate")
        mac = macs[-1]
        info = parse_mac(mac.attrs["atlaas.mac"])
        mul_side = mac.operands[1] if mac.operands[0] == info["acc"] else mac.operands[0]
        root, _ = strip(defs, mul_side, CAST_OPS)
        mul = def_op(defs, root, "muli")
        if mul is None:
            raise AssemblyError(f"{f.name}: malformed multiply-accumulate")
        a = body.add("convert", ref(_source(defs, mul.operands[0])), _convert_type(defs, mul.operands[0]))
        b = body.add("convert", ref(_source(defs, mul.operands[1])), _convert_type(defs, mul.operands[1]))
        x = body.add("dot", a, b, "lhs_contracting_dims={1}", "rhs_contracting_dims={0}")
        x = body.add("add", x, ref(_source(defs, info["acc"])))
    else:
        loops = [op for op in core if op.opcode == "for" and op.attrs.get("linalg_op") == "max_reduce"]
        loop = loops[-1]
        sel = def_op(defs, loop.body.ops[-1].operands[0], "select")
        x = body.add("reduce", ref(_source(defs, sel.operands[1])), "max", "dims={0}")
    x = _epilogue(body, f, x)
    return body.store(ref(f.target_asv), x)


def _referenced_scalars(f) -> list:
    use = uses(f)
    return [a.name for a in f.args if not isinstance(a.type, MemRefType) and use.get(a.name)]


def dma_direction(g: InstructionGroup):
    """(direction, source, destination) of the group's copy member, or None."""
    found = []
    for f in g.members:
        ins = [a for a in f.args if isinstance(a.type, MemRefType)
               and a.attrs.get("taidl.role") == "input"]
        outs = [a for a in f.args if isinstance(a.type, MemRefType)
                and a.attrs.get("taidl.role") in ("output", "state")]
        for s in ins:
            for d in outs:
                pair = (s.attrs.get("taidl.port_class"), d.attrs.get("taidl.port_class"))
                if pair == ("dram_addr", "spad_addr"):
                    found.append(("load", s.name, d.name))
                elif pair == ("spad_addr", "dram_addr"):
                    found.append(("store", s.name, d.name))
    if not found:
        return None
    if len({d for d, _, _ in found}) > 1:
        raise AssemblyError(f"instruction {g.name!r} moves data in both directions")
    return found[0]


def emit_dma(g: InstructionGroup, ref: Refs) -> list:
    route = dma_direction(g)
    if route is None:
        raise AssemblyError(f"instruction {g.name!r} has no classified memory ports")
    direction, src, dst = route
    params = []
    for f in g.members:
        # the address computation: a scalar ASV named as a DRAM port
        if port_class(f.target_asv) == "dram_addr" and f.arg(f.target_asv) is None:
            params += [n for n in _referenced_scalars(f) if n not in params]
    body = Body()
    if direction == "load":
        x = body.add("load", ref(src), *params)
        return body.store(ref(dst), x)
    x = body.add("load", ref(src))
    return body.store(ref(dst), x, *params)


def emit_config(g: InstructionGroup, banked: list) -> list:
    """Bank-selected register update: ``store(base[field], sources)``."""
    for b in banked:
        family = [a for a in g.asvs if a.startswith(b.base + "_")]
        if len(family) != len(g.asvs):
            continue
        field_src = b.select.split("[", 1)[0]
        sources = []
        for f in g.members:
            for n in _referenced_scalars(f):
                if n not in family and n != field_src and n not in sources:
                    sources.append(n)
        if not sources:
            break
        return Body().store(f"{b.base}[{b.select}]", *sources)
    raise AssemblyError(f"instruction {g.name!r} is not a banked config update")


def macro_models(g: InstructionGroup, primitive_group: InstructionGroup) -> dict:
    """Data models the composed kernel reads and writes, keyed by role."""
    bounds = list(g.descriptor.macro.bounds)
    if len(bounds) == 1:
        (k,) = bounds
        dims = {"lhs": k, "rhs": k, "out": "1"}
    elif len(bounds) == 2:
        i, k = bounds
        dims = {"lhs": f"{i}*{k}", "rhs": k, "out": i}
    elif len(bounds) == 3:
        i, j, k = bounds
        dims = {"lhs": f"{i}*{k}", "rhs": f"{k}*{j}", "out": f"{i}*{j}"}
    else:
        raise AssemblyError(f"macro {g.name!r} has {len(bounds)} bounds; at most 3 supported")
    f = compute_member(primitive_group)
    if f is None or f.attrs["taidl.compute"] != "dot_product":
        raise AssemblyError(f"macro {g.name!r}: primitive is not a dot product")
    types = {}
    defs = definitions(f)
    info = [op for op in backward_slice(f, [f.returned]) if "atlaas.mac" in op.attrs]
    mac = parse_mac(info[-1].attrs["atlaas.mac"])
    types["lhs"] = shape_of(value_type(defs, mac["lhs"]))
    types["rhs"] = shape_of(value_type(defs, mac["rhs"]))
    types["out"] = shape_of(f.arg(f.target_asv).type) if f.arg(f.target_asv) else f"{DIM}xs32"
    return {role: DataModel(f"{g.name}_{role}", dims[role], types[role]) for role in dims}


def compose_macro(g: InstructionGroup, primitive: list, models: dict) -> list:
    """Re-target the primitive body at whole-kernel operands."""
    converts = [s for s in primitive if s.opname == "convert"]
    adds = [s for s in primitive if s.opname == "add"]
    if len(converts) != 2 or len(adds) != 1:
        raise AssemblyError(f"macro {g.name!r}: unsupported primitive body")
    rename = {converts[0].args[0]: f"@{models['lhs'].name}",
              converts[1].args[0]: f"@{models['rhs'].name}",
              adds[0].args[1]: f"@{models['out'].name}",
              primitive[-1].args[0]: f"@{models['out'].name}"}
    out = []
    for s in primitive:
        out.append(Statement(s.opname, [rename.get(a, a) if isinstance(a, str) else a
                                        for a in s.args], s.target))
    return out
