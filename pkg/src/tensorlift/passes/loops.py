"""Loop reconstruction from unrolled reduction chains, and linalg tagging."""

from __future__ import annotations

from dataclasses import dataclass

from ..ir.analysis import NameGen, definitions, parents, remove_dead, replace_uses, uses
from ..ir.core import CAST_OPS, Block, Function, Operation
from .common import def_op, set_attr, strip
from .idioms import format_mac, mac_operands, parse_mac

MAX_PREDICATES = ("sgt", "sge", "ugt", "uge")


@dataclass
class _Element:
    """One step of a reduction chain: ``acc' = step(acc, inputs...)``.

    ``core`` is the muli (MAC) or cmpi (max); ``outer`` the casts between the
    muli and the addi, outermost first.
    """

    op: Operation
    acc: str
    core: Operation
    outer: list
    inputs: list  # [(load op, cast ops outermost first)]

    @property
    def ops(self) -> list:
        out = [self.op, self.core] + self.outer
        for load, casts in self.inputs:
            out += [load] + casts
        return out

    def signature(self) -> tuple:
        def casts_of(cs):
            return tuple((c.opcode, tuple(c.types)) for c in cs)

        return (self.op.opcode, tuple(self.op.types), self.core.opcode, self.core.predicate,
                tuple(self.core.types), casts_of(self.outer),
                tuple((load.operands[0], tuple(load.types), casts_of(cs))
                      for load, cs in self.inputs))


def _load_path(defs, v):
    root, casts = strip(defs, v, CAST_OPS)
    load = def_op(defs, root, "load")
    if load is None or len(load.indices) != 1 or not isinstance(load.indices[0], int):
        return None
    return load, casts


def _mac_element(defs, op):
    if "atlaas.mac" not in op.attrs:
        return None
    m = mac_operands(defs, op)
    if m is None:
        return None
    acc, mul, _, _ = m
    mul_side = op.operands[1] if op.operands[0] == acc else op.operands[0]
    _, outer = strip(defs, mul_side, CAST_OPS)
    inputs = [_load_path(defs, v) for v in mul.operands]
    if any(p is None for p in inputs):
        return None
    return _Element(op, acc, mul, outer, inputs)


def _max_element(defs, op):
    if op.opcode != "select":
        return None
    cmp = def_op(defs, op.operands[0], "cmpi")
    if cmp is None or cmp.predicate not in MAX_PREDICATES:
        return None
    x, m = op.operands[1], op.operands[2]
    if cmp.operands != [x, m]:
        return None
    path = _load_path(defs, x)
    if path is None:
        return None
    return _Element(op, m, cmp, [], [path])


def _chains(f: Function, matcher):
    """Maximal chains of matching elements.

    Each intermediate accumulator may only be used inside the next element.
    """
    defs = definitions(f)
    use = uses(f)
    where = parents(f)
    elems = {}
    for op in f.walk():
        e = matcher(defs, op)
        if e is not None:
            elems[op.result] = e

    def private(prev, nxt):
        inside = {id(o) for o in nxt.ops}
        return (all(id(u) in inside for u in use.get(prev.op.result, []))
                and where[id(prev.op)][0] is where[id(nxt.op)][0])

    linked = set()
    for e in elems.values():
        prev = elems.get(e.acc)
        if prev is not None and private(prev, e):
            linked.add(prev.op.result)
    chains = []
    for tail in elems.values():
        if tail.op.result in linked:
            continue
        chain = [tail]
        while True:
            prev = elems.get(chain[-1].acc)
            if prev is None or not private(prev, chain[-1]):
                break
            chain.append(prev)
        chain.reverse()
        chains.append(chain)
    return chains


def _rollable(chain) -> bool:
    if len(chain) < 2:
        return False
    sig = chain[0].signature()
    for k, e in enumerate(chain):
        if e.signature() != sig:
            return False
        if any(load.indices[0] != k for load, _ in e.inputs):
            return False
    return True


def _clone_path(load, casts, iv, fresh, body):
    v = fresh()
    body.append(Operation("load", [load.operands[0]], [v], list(load.types), indices=[iv]))
    for c in reversed(casts):
        nv = fresh()
        body.append(Operation(c.opcode, [v], [nv], list(c.types)))
        v = nv
    return v


def _build_body(chain, kind, iv, carried, fresh):
    first = chain[0]
    body = []
    vals = [_clone_path(load, casts, iv, fresh, body) for load, casts in first.inputs]
    if kind == "mac":
        p = fresh()
        body.append(Operation("muli", vals, [p], list(first.core.types)))
        for c in reversed(first.outer):
            nv = fresh()
            body.append(Operation(c.opcode, [p], [nv], list(c.types)))
            p = nv
        s = fresh()
        info = parse_mac(first.op.attrs["atlaas.mac"])
        # the annotation names the pre-extension inputs: the loaded elements
        lhs = body[0].results[0]
        rhs = body[1 + len(first.inputs[0][1])].results[0]
        attrs = {"atlaas.mac": format_mac(lhs, rhs, carried, info["lhs_width"], info["rhs_width"])}
        body.append(Operation("addi", [carried, p], [s], list(first.op.types), attrs))
    else:
        c = fresh()
        body.append(Operation("cmpi", [vals[0], carried], [c], list(first.core.types),
                              predicate=first.core.predicate))
        s = fresh()
        body.append(Operation("select", [c, vals[0], carried], [s], list(first.op.types)))
    body.append(Operation("yield", [s]))
    return body


def reconstruct_loops(f: Function, descriptor=None):
    """Reroll unrolled MAC and max-reduction chains into ``scf.for`` loops."""
    rewrites = 0
    for kind, matcher in (("mac", _mac_element), ("max", _max_element)):
        for chain in _chains(f, matcher):
            if not _rollable(chain):
                continue
            fresh = NameGen(f)
            iv, carried, res = fresh(), fresh(), fresh()
            body = _build_body(chain, kind, iv, carried, fresh)
            last = chain[-1].op
            loop = Operation("for", [chain[0].acc], [res], list(last.types),
                             regions=[Block(body)], lower=0, upper=len(chain), step=1,
                             iv=iv, iter_args=[carried])
            block = parents(f)[id(last)][0]
            pos = next(k for k, o in enumerate(block.ops) if o is last)
            block.ops.insert(pos, loop)
            replace_uses(f, last.result, res)
            remove_dead(f, only={id(o) for e in chain for o in e.ops})
            rewrites += 1
    return rewrites, 0


def _indexed_by(defs, v, iv) -> bool:
    root, _ = strip(defs, v, CAST_OPS)
    load = def_op(defs, root, "load")
    return load is not None and load.indices == [iv]


def linalg_kind(f: Function, loop: Operation, defs=None) -> str | None:
    if loop.opcode != "for" or len(loop.iter_args) != 1:
        return None
    defs = defs or definitions(f)
    carried = loop.iter_args[0]
    y = loop.body.ops[-1]
    if y.opcode != "yield" or len(y.operands) != 1:
        return None
    last = def_op(defs, y.operands[0], "addi", "select")
    if last is None:
        return None
    if last.opcode == "addi" and "atlaas.mac" in last.attrs:
        m = mac_operands(defs, last)
        if m and m[0] == carried and all(_indexed_by(defs, v, loop.iv) for v in m[1].operands):
            return "dot_product"
    if last.opcode == "select":
        cmp = def_op(defs, last.operands[0], "cmpi")
        x, m = last.operands[1], last.operands[2]
        if (cmp is not None and cmp.predicate in MAX_PREDICATES and cmp.operands == [x, m]
                and m == carried and _indexed_by(defs, x, loop.iv)):
            return "max_reduce"
    return None


def lift_to_linalg(f: Function, descriptor=None):
    defs = definitions(f)
    added = 0
    for op in f.walk():
        kind = linalg_kind(f, op, defs)
        if kind is not None:
            added += set_attr(op, "linalg_op", kind)
    return 0, added
