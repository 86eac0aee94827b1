"""Partition lifted functions into per-instruction groups."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..ir.core import Function, InstructionDescriptor, Module
from .taidl import BankedRegister


class AssemblyError(Exception):
    pass


@dataclass
class InstructionGroup:
    name: str
    members: list = field(default_factory=list)
    descriptor: InstructionDescriptor | None = None

    @property
    def grid(self):
        coords = [f.attrs["taidl.coord"] for f in self.members if "taidl.coord" in f.attrs]
        if not coords:
            return None
        return [max(c[0] for c in coords) + 1, max(c[1] for c in coords) + 1]

    @property
    def asvs(self) -> list:
        return [f.target_asv for f in self.members]

    def member(self, asv: str) -> Function | None:
        for f in self.members:
            if f.target_asv == asv:
                return f
        return None


_INDEXED = re.compile(r"(\w+?)_(\d+)$")


def select_field(d: InstructionDescriptor | None) -> str:
    if d is None or not d.encoding:
        return "none"
    key = "bank" if "bank" in d.encoding else sorted(d.encoding)[0]
    return str(d.encoding[key])


def banked_registers(groups) -> list:
    """Indexed ASVs of one group sharing a base name, e.g. strides_0..2."""
    out, seen = [], set()
    for g in groups:
        families = {}
        for asv in g.asvs:
            m = _INDEXED.fullmatch(asv)
            if m:
                families.setdefault(m.group(1), set()).add(int(m.group(2)))
        for base, idx in sorted(families.items()):
            if len(idx) >= 2 and base not in seen:
                seen.add(base)
                out.append(BankedRegister(base, len(idx), select_field(g.descriptor)))
    return out


def group(m: Module, descriptors=None, strict: bool = True) -> list:
    """Group functions by instruction, ordered by instruction name.

    With ``strict`` a function whose instruction has no descriptor is an
    error; otherwise its group simply has no descriptor.
    """
    dmap = {d.name: d for d in (descriptors if descriptors is not None else m.descriptors)}
    groups = {}
    for f in m.functions:
        name = f.instruction
        if strict and name not in dmap:
            raise AssemblyError(f"function {f.name!r} names instruction {name!r} "
                                "absent from all descriptors")
        g = groups.setdefault(name, InstructionGroup(name, [], dmap.get(name)))
        g.members.append(f)
    return [groups[k] for k in sorted(groups)]
