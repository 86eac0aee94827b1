"""Turn a lifted module into a :class:`TaidlSpec`."""

from __future__ import annotations

from dataclasses import dataclass

from ..ir.core import MemRefType, Module
from .emit import Refs, compose_macro, compute_member, dma_direction, emit_compute, emit_config
from .emit import emit_dma, macro_models, shape_of
from .fsm import recover_fsm_order
from .group import AssemblyError, banked_registers, group
from .taidl import DataModel, Instruction, TaidlSpec, parse_taidl


@dataclass
class Assembly:
    spec: TaidlSpec
    text: str
    groups: list


def data_models(groups) -> list:
    """Scratchpad/accumulator memrefs, in group order, first declaration wins."""
    out, seen = [], set()
    for g in groups:
        for f in g.members:
            for a in f.args:
                if (isinstance(a.type, MemRefType) and a.name not in seen
                        and a.attrs.get("taidl.port_class") == "spad_addr"):
                    seen.add(a.name)
                    out.append(DataModel(a.name, str(a.type.size), shape_of(a.type)))
    return out


def operands(g, models: set) -> list:
    fixed = set(g.descriptor.fixed_controls) if g.descriptor else set()
    out = []
    for f in g.members:
        for a in f.args:
            if a.name not in models and a.name not in fixed and a.name not in out:
                out.append(a.name)
    return out


def _route(g, ref, banked, bodies, models, spec):
    """(route, body) for one group; raises AssemblyError on failure."""
    if g.descriptor is None:
        raise AssemblyError(f"instruction {g.name!r} is absent from all descriptors")
    if compute_member(g) is not None:
        return "compute", emit_compute(g, ref)
    if g.descriptor.macro is not None:
        prim = g.descriptor.macro.primitive
        if prim not in bodies or bodies[prim][1] is None:
            raise AssemblyError(f"macro {g.name!r}: primitive {prim!r} was not emitted")
        mm = macro_models(g, bodies[prim][0])
        for dm in mm.values():
            if dm.name not in models:
                spec.data_models.append(dm)
                models.add(dm.name)
        return "macro", compose_macro(g, bodies[prim][1], mm)
    if dma_direction(g) is not None:
        return "dma", emit_dma(g, ref)
    return "config", emit_config(g, banked)


def assemble(m: Module, descriptors=None) -> Assembly:
    """Assemble a lifted module.  Failures downgrade single instructions to
    opaque stubs; they never abort the spec."""
    descs = descriptors if descriptors is not None else m.descriptors
    groups = group(m, descs, strict=False)
    spec = TaidlSpec()
    spec.data_models = data_models(groups)
    models = {d.name for d in spec.data_models}
    spec.banked = banked_registers(groups)
    ref = Refs(models)
    bodies = {}
    # macros compose emitted primitives, so they go last
    order = sorted(groups, key=lambda g: (bool(g.descriptor and g.descriptor.macro), g.name))
    for g in order:
        try:
            route, body = _route(g, ref, spec.banked, bodies, models, spec)
        except AssemblyError as exc:
            spec.warnings.append(f"{g.name}: {exc}")
            route, body = "opaque", None
        bodies[g.name] = (g, body, route)
    for g in groups:
        _, body, route = bodies[g.name]
        spec.instructions.append(Instruction(g.name, operands(g, models), body, g.asvs, route))
    spec.ordering = recover_fsm_order(groups)
    text = spec.to_text()
    parse_taidl(text)
    return Assembly(spec, text, groups)


def spec_facts(spec: TaidlSpec) -> dict:
    """Assemble-stage metrics checked against corpus expectations."""
    return {
        "banked": "; ".join(b.to_text() for b in spec.banked) or "none",
        "orders": "; ".join(o.to_text() for o in spec.ordering) or "none",
    }
