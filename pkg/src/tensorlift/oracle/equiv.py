"""Equivalence checking by exhaustive or seeded random evaluation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..ir.core import Function, InstructionDescriptor, IntType, MemRefType, type_bits
from .evaluate import dtype_for, result_type, run, to_python

EQUIVALENT = "equivalent"
COUNTEREXAMPLE = "counterexample"
SAMPLED = "domain_too_large_sampled"


class SignatureMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Budget:
    exhaustive_bits: int = 20
    samples: int = 10_000
    seed: int = 0
    chunk: int = 1 << 14


@dataclass
class EquivalenceReport:
    left: str
    right: str
    verdict: str
    strategy: str
    seed: int | None = None
    samples: int = 0
    mismatches: int = 0
    env: dict = field(default_factory=dict)
    out_left: object = None
    out_right: object = None
    pinned: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.verdict != COUNTEREXAMPLE

    def to_text(self) -> str:
        lines = [
            f"left = {self.left}",
            f"right = {self.right}",
            f"verdict = {self.verdict}",
            f"strategy = {self.strategy}",
        ]
        if self.seed is not None:
            lines.append(f"seed = {self.seed}")
        lines.append(f"samples = {self.samples}")
        lines.append(f"mismatches = {self.mismatches}")
        for k in sorted(self.pinned):
            lines.append(f"pinned.{k} = {self.pinned[k]}")
        if self.verdict == COUNTEREXAMPLE:
            for k in sorted(self.env):
                lines.append(f"env.{k} = {self.env[k]}")
            lines.append(f"out_left = {self.out_left}")
            lines.append(f"out_right = {self.out_right}")
        return "\n".join(lines) + "\n"


def check_signature(f: Function, g: Function) -> None:
    fs = [(a.name, a.type) for a in f.args]
    gs = [(a.name, a.type) for a in g.args]
    if fs != gs:
        raise SignatureMismatch(f"argument signatures differ: @{f.name} vs @{g.name}")
    if result_type(f) != result_type(g):
        raise SignatureMismatch(f"result types differ: @{f.name} vs @{g.name}")


def pins_from_descriptor(f: Function, d: InstructionDescriptor | None) -> dict:
    """Arguments of ``f`` pinned by ``d``'s fixed controls (name -> value)."""
    pins = {}
    if d is None:
        return pins
    for key, vals in d.fixed_controls.items():
        a = f.arg(key)
        if a is None:
            continue
        if isinstance(a.type, MemRefType):
            if len(vals) != a.type.size:
                raise ValueError(f"control {key} binds {len(vals)} values to {a.type}")
            pins[key] = np.array(vals, dtype=object).reshape(a.type.shape).tolist()
        else:
            if len(vals) != 1:
                raise ValueError(f"scalar control {key} binds {len(vals)} values")
            pins[key] = vals[0]
    return pins


def _elem_type(t):
    return t.element if isinstance(t, MemRefType) else t


def _shape(t):
    return t.shape if isinstance(t, MemRefType) else ()


def _pinned_lanes(t, value, n):
    w = _elem_type(t).width
    m = (1 << w) - 1
    arr = np.array(value, dtype=object).reshape(_shape(t))
    flat = [int(x) & m for x in arr.reshape(-1)]
    one = np.array(flat, dtype=object).reshape(_shape(t)).astype(dtype_for(w))
    return np.broadcast_to(one, (n,) + _shape(t)).copy()


def _enumerated_lanes(free, start, stop):
    idx = np.arange(start, stop, dtype=np.uint64)
    out = {}
    offset = 0
    for a in free:
        et = _elem_type(a.type)
        w = et.width
        count = a.type.size if isinstance(a.type, MemRefType) else 1
        cols = []
        for _ in range(count):
            cols.append((idx >> np.uint64(offset)) & np.uint64((1 << w) - 1))
            offset += w
        arr = np.stack(cols, axis=1).reshape((len(idx),) + _shape(a.type))
        out[a.name] = arr.astype(dtype_for(w))
    return out


def _random_values(rng, w, size):
    m = (1 << w) - 1
    if w <= 32:
        vals = rng.integers(0, 1 << w, size=size, dtype=np.uint64)
    elif w <= 64:
        hi = rng.integers(0, 1 << 32, size=size, dtype=np.uint64)
        lo = rng.integers(0, 1 << 32, size=size, dtype=np.uint64)
        vals = ((hi << np.uint64(32)) | lo) & np.uint64(m)
    else:
        parts = [rng.integers(0, 1 << 32, size=size, dtype=np.uint64) for _ in range((w + 31) // 32)]
        vals = np.zeros(size, dtype=object)
        for k, p in enumerate(parts):
            vals = vals | (p.astype(object) << (32 * k))
        vals = vals & m
    # one lane in eight takes a boundary value instead; in half of those
    # lanes every element of a memref shares the same boundary value, so
    # all-extreme inputs (e.g. a max over all-minimum elements) get exercised
    edges = [0, 1, m, 1 << (w - 1), m >> 1]
    lanes = size[:1] + (1,) * (len(size) - 1)
    pick = rng.integers(0, 8, size=size) == 0
    choice = rng.integers(0, len(edges), size=size)
    if len(size) > 1:
        joint = rng.integers(0, 16, size=lanes) == 0
        pick = pick | joint
        choice = np.where(joint, rng.integers(0, len(edges), size=lanes), choice)
    edge_vals = np.array([edges[c] for c in choice.reshape(-1)], dtype=object).reshape(size)
    if w <= 64:
        edge_vals = edge_vals.astype(np.uint64)
        return np.where(pick, edge_vals, vals).astype(np.uint64)
    return np.where(pick, edge_vals, vals)


def _random_lanes(free, rng, n):
    out = {}
    for a in free:
        w = _elem_type(a.type).width
        out[a.name] = _random_values(rng, w, (n,) + _shape(a.type))
    return out


def _differs(a, b):
    if a.ndim == 1:
        return a != b
    return np.any((a != b).reshape(a.shape[0], -1), axis=1)


def check_equivalence(f: Function, g: Function, pinned: dict | None = None,
                      budget: Budget = Budget()) -> EquivalenceReport:
    """Compare ``f`` and ``g`` over all inputs, or a seeded random sample.

    ``pinned`` fixes some arguments (restricted domain), e.g. the output of
    :func:`pins_from_descriptor`.
    """
    check_signature(f, g)
    pinned = dict(pinned or {})
    free = [a for a in f.args if a.name not in pinned]
    bits = sum(type_bits(a.type) for a in free)
    rtype = result_type(f)
    exhaustive = bits <= budget.exhaustive_bits
    report = EquivalenceReport(
        f.name, g.name, EQUIVALENT if exhaustive else SAMPLED,
        "exhaustive" if exhaustive else "random",
        None if exhaustive else budget.seed, pinned=pinned)

    if exhaustive:
        total = 1 << bits
        batches = ((s, min(s + budget.chunk, total)) for s in range(0, total, budget.chunk))
        make = lambda s, e: _enumerated_lanes(free, s, e)  # noqa: E731
    else:
        rng = np.random.default_rng(budget.seed)
        total = budget.samples
        batches = ((s, min(s + budget.chunk, total)) for s in range(0, total, budget.chunk))
        make = lambda s, e: _random_lanes(free, rng, e - s)  # noqa: E731

    for start, stop in batches:
        n = stop - start
        inputs = make(start, stop)
        for a in f.args:
            if a.name in pinned:
                inputs[a.name] = _pinned_lanes(a.type, pinned[a.name], n)
        left = run(f, inputs, n)
        right = run(g, inputs, n)
        bad = np.nonzero(_differs(left, right))[0]
        report.samples += n
        if len(bad):
            k = int(bad[0])
            report.verdict = COUNTEREXAMPLE
            report.mismatches += len(bad)
            report.env = {a.name: to_python(a.type, inputs[a.name][k]) for a in f.args}
            report.out_left = to_python(rtype, left[k])
            report.out_right = to_python(rtype, right[k])
            break
    return report
