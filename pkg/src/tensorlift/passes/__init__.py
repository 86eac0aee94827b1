"""The eight lifting passes and the pipeline that runs them."""

from .canon import canon_bitmanip, narrow_types
from .common import PassReport
from .fold import fold_to_fixpoint
from .idioms import (
    PassError, clamp_of, detect_clamp, detect_mac, format_mac, parse_mac, specialize_control,
)
from .loops import lift_to_linalg, reconstruct_loops
from .manager import (
    CODE_OF, FLAGS, PASSES, DescriptorError, PipelineResult, UnknownPassError,
    check_descriptors, resolve, run_pass, run_pipeline,
)
from .metadata import coordinate, emit_taidl_metadata, port_class

__all__ = [
    "CODE_OF", "FLAGS", "PASSES", "DescriptorError", "PassError", "PassReport",
    "PipelineResult", "UnknownPassError", "canon_bitmanip", "check_descriptors", "clamp_of",
    "coordinate", "detect_clamp", "detect_mac", "emit_taidl_metadata", "fold_to_fixpoint",
    "format_mac", "lift_to_linalg", "narrow_types", "parse_mac", "port_class",
    "reconstruct_loops", "resolve", "run_pass", "run_pipeline", "specialize_control",
]
