"""Recover instruction ordering from FSM state-register updates."""

from __future__ import annotations

from ..ir.analysis import definitions
from ..ir.core import Argument, Operation
from ..passes.common import const_of, def_op
from .taidl import Ordering

MAX_STATES = 8


def _sets_to(f) -> int | None:
    """Constant ``f`` unconditionally assigns, or None."""
    return const_of(definitions(f), f.returned)


def _guard(f, state: str):
    """Constant ``c`` when f's update is guarded on ``state == c``."""
    defs = definitions(f)
    d = defs.get(f.returned)
    if not isinstance(d, Operation) or d.opcode not in ("if", "select"):
        return None
    cmp = def_op(defs, d.operands[0], "cmpi")
    if cmp is None or cmp.predicate != "eq":
        return None
    a, b = cmp.operands
    if a == state and isinstance(defs.get(a), Argument):
        return const_of(defs, b)
    if b == state and isinstance(defs.get(b), Argument):
        return const_of(defs, a)
    return None


def _state_values(groups, state) -> set:
    values = set()
    for g in groups:
        for f in g.members:
            c = _sets_to(f) if f.target_asv == state else None
            if c is not None:
                values.add(c)
            c = _guard(f, state) if f.arg(state) else None
            if c is not None:
                values.add(c)
    return values


def recover_fsm_order(groups) -> list:
    owners = {}
    for g in groups:
        for asv in g.asvs:
            owners.setdefault(asv, []).append(g)
    out = []
    for state, gs in sorted(owners.items()):
        if len(gs) < 2 or len(_state_values(gs, state)) > MAX_STATES:
            continue
        for a in gs:
            s = _sets_to(a.member(state))
            if s is None:
                continue
            for b in gs:
                if b is a:
                    continue
                if any(_guard(f, state) == s for f in b.members if f.arg(state)):
                    out.append(Ordering(a.name, b.name, state))
    return out
