from .evaluate import evaluate, run
from .equiv import Budget, EquivalenceReport, SignatureMismatch, check_equivalence
from .smt import emit_smt

__all__ = [
    "Budget", "EquivalenceReport", "SignatureMismatch", "check_equivalence", "emit_smt",
    "evaluate", "run",
]
