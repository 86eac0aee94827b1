"""Use-def queries and in-place rewriting utilities shared by the passes."""

from __future__ import annotations

import re
from collections import defaultdict

from .core import Argument, Block, Function, Operation

PURE_TERMINATORS = ("return", "yield")


def definitions(f: Function) -> dict:
    """Map value name -> defining Operation or Argument.

    Induction variables and iter_args map to their ``for`` op.
    """
    defs = {a.name: a for a in f.args}
    for op in f.walk():
        for r in op.results:
            defs[r] = op
        if op.opcode == "for":
            defs[op.iv] = op
            for a in op.iter_args:
                defs[a] = op
    return defs


def uses(f: Function) -> dict:
    """Map value name -> list of using operations (with multiplicity)."""
    out = defaultdict(list)
    for op in f.walk():
        for v in op.operands:
            out[v].append(op)
        for idx in op.indices:
            if isinstance(idx, str):
                out[idx].append(op)
    return out


def parents(f: Function) -> dict:
    """Map id(op) -> (block, containing op or None)."""
    out = {}

    def visit(block, owner):
        for op in block.ops:
            out[id(op)] = (block, owner)
            for region in op.regions:
                visit(region, op)

    visit(f.body, None)
    return out


def all_names(f: Function) -> set:
    names = set(a.name for a in f.args)
    for op in f.walk():
        names.update(op.results)
        if op.opcode == "for":
            names.add(op.iv)
            names.update(op.iter_args)
    return names


class NameGen:
    """Fresh numeric value names above any numeric name already in use."""

    def __init__(self, f: Function):
        taken = all_names(f)
        nums = [int(n) for n in taken if re.fullmatch(r"[0-9]+", n)]
        self.next = max(nums, default=-1) + 1
        self.taken = taken

    def __call__(self) -> str:
        while str(self.next) in self.taken:
            self.next += 1
        name = str(self.next)
        self.next += 1
        self.taken.add(name)
        return name


def replace_uses(f: Function, old: str, new: str) -> int:
    n = 0
    for op in f.walk():
        for k, v in enumerate(op.operands):
            if v == old:
                op.operands[k] = new
                n += 1
    return n


def remove_dead(f: Function, only: set | None = None) -> int:
    """Delete operations whose results are all unused, to fixpoint.

    ``only`` restricts deletion to ops whose id is in the set.  Returns the
    number of ops removed (nested ops of removed regions included).
    """
    removed = 0
    while True:
        used = uses(f)
        victims = set()
        for op in f.walk():
            if op.opcode in PURE_TERMINATORS or not op.results:
                if op.opcode in ("if", "for") and not op.results and (only is None or id(op) in only):
                    victims.add(id(op))
                continue
            if only is not None and id(op) not in only:
                continue
            if all(not used.get(r) for r in op.results):
                victims.add(id(op))
        if not victims:
            return removed

        def prune(block):
            nonlocal removed
            kept = []
            for op in block.ops:
                if id(op) in victims:
                    removed += sum(1 for _ in op.walk())
                    continue
                for region in op.regions:
                    prune(region)
                kept.append(op)
            block.ops[:] = kept

        prune(f.body)


def backward_slice(f: Function, roots) -> list:
    """Operations reachable backward from ``roots`` (value names).

    Region ops pull in their whole region bodies.  Returned in program order.
    """
    defs = definitions(f)
    seen = set()
    stack = list(roots)
    while stack:
        v = stack.pop()
        d = defs.get(v)
        if d is None or isinstance(d, Argument) or id(d) in seen:
            continue
        for op in d.walk():
            if id(op) in seen:
                continue
            seen.add(id(op))
            stack.extend(op.operands)
            stack.extend(i for i in op.indices if isinstance(i, str))
    return [op for op in f.walk() if id(op) in seen]


def compute_core_size(f: Function) -> int:
    """Ops reachable backward from the returned value (return excluded)."""
    return len(backward_slice(f, [f.returned]))


def block_of(f: Function, target: Operation) -> Block:
    return parents(f)[id(target)][0]
