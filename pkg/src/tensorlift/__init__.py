"""Lift bit-level accelerator instruction semantics to tensor-level TAIDL specifications."""

__version__ = "0.1.0"
