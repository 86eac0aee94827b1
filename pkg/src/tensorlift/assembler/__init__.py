"""Assemble lifted functions into a TAIDL specification."""

from .assemble import Assembly, assemble, data_models, spec_facts
from .emit import compose_macro, emit_compute, emit_config, emit_dma
from .fsm import recover_fsm_order
from .group import AssemblyError, InstructionGroup, banked_registers, group
from .taidl import (
    BankedRegister, DataModel, Instruction, Ordering, Statement, TaidlSpec, TaidlSyntaxError,
    parse_taidl,
)

__all__ = [
    "Assembly", "AssemblyError", "BankedRegister", "DataModel", "Instruction",
    "InstructionGroup", "Ordering", "Statement", "TaidlSpec", "TaidlSyntaxError", "assemble",
    "banked_registers", "compose_macro", "data_models", "emit_compute", "emit_config",
    "emit_dma", "group", "parse_taidl", "recover_fsm_order", "spec_facts",
]
