"""Single-op mutations, for checking that the oracle is not vacuous."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass

from ..ir.analysis import backward_slice
from ..ir.core import Function, canonical_const

KINDS = ("addi-subi", "swap-shrsi", "const")


@dataclass(frozen=True)
class Site:
    function: str
    index: int  # position in walk order
    kind: str

    def describe(self) -> str:
        return f"{self.function}#{self.index}:{self.kind}"


def sites(f: Function) -> list:
    """Mutable ops that feed the returned value."""
    live = {id(op) for op in backward_slice(f, [f.returned])}
    out = []
    for k, op in enumerate(f.walk()):
        if id(op) not in live:
            continue
        if op.opcode in ("addi", "subi"):
            out.append(Site(f.name, k, "addi-subi"))
        elif op.opcode == "shrsi" and op.operands[0] != op.operands[1]:
            out.append(Site(f.name, k, "swap-shrsi"))
        elif op.opcode == "const" and op.type.width > 1:
            out.append(Site(f.name, k, "const"))
    return out


def apply(f: Function, site: Site) -> Function:
    g = copy.deepcopy(f)
    op = list(g.walk())[site.index]
    if site.kind == "addi-subi":
        op.opcode = "subi" if op.opcode == "addi" else "addi"
        op.attrs.pop("atlaas.mac", None)
    elif site.kind == "swap-shrsi":
        op.operands = op.operands[::-1]
    else:
        op.value = canonical_const(op.value + 1, op.type.width)
    return g


def choose(functions, count: int, seed: int) -> list:
    """``count`` distinct sites, round-robin over mutation kinds, seeded."""
    rng = random.Random(seed)
    by_kind = {k: [] for k in KINDS}
    for f in functions:
        for s in sites(f):
            by_kind[s.kind].append(s)
    for k in KINDS:
        rng.shuffle(by_kind[k])
    picked = []
    while len(picked) < count and any(by_kind.values()):
        for k in KINDS:
            if by_kind[k] and len(picked) < count:
                picked.append(by_kind[k].pop())
    return picked


def mutation_corpus() -> list:
    """Lifted functions offering every mutation kind.

    The standard suite fully lifted, plus the shift-pair sign-extension pe
    variants lifted without ``canon-bitmanip`` (full lifting removes every
    ``shrsi``).
    """
    from ..passes import FLAGS, run_pipeline
    from .designs import DesignSpec, generate, standard_suite

    out = []
    keep_shifts = [p for p in FLAGS if p != "canon-bitmanip"]
    runs = [(spec, None) for spec in standard_suite()]
    runs += [(DesignSpec("pe", seed=seed), keep_shifts) for seed in (1, 3)]
    for spec, passes in runs:
        m, _ = generate(spec)
        tag = spec.label + ("_nocanon" if passes else "")
        for f in run_pipeline(m, passes).module.functions:
            # names must stay unique across design points
            f.name = f"{f.instruction}_{tag}__{f.target_asv}"
            out.append(f)
    return out
