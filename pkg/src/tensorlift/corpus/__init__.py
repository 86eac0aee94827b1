from .designs import (
    DEFAULTS, KINDS, DesignError, DesignSpec, full_corpus, generate, merge, standard_suite,
)
from .expect import Expectations, check, metric
from .fuzz import random_function, random_module
from .mutate import mutation_corpus

__all__ = [
    "DEFAULTS", "KINDS", "DesignError", "DesignSpec", "Expectations", "check",
    "full_corpus", "generate", "merge", "metric", "mutation_corpus", "random_function",
    "random_module", "standard_suite",
]
