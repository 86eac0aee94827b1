from .core import (
    VOCABULARY, Argument, Block, EncodingField, Function, IndexType, InstructionDescriptor,
    IntType, IRError, Macro, MemRefType, Module, Operation, canonical_const, i,
    strip_annotations, to_signed, type_bits,
)
from .text import ParseError, parse_module, print_function_text, print_module
from .verify import VerificationError, Violation, verify, verify_module

__all__ = [
    "VOCABULARY", "Argument", "Block", "EncodingField", "Function", "IndexType",
    "InstructionDescriptor", "IntType", "IRError", "Macro", "MemRefType", "Module",
    "Operation", "ParseError", "VerificationError", "Violation", "canonical_const", "i",
    "parse_module", "print_function_text", "print_module", "strip_annotations",
    "to_signed", "type_bits", "verify", "verify_module",
]
