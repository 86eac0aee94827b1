"""Bit-exact, lane-parallel interpreter.

A function is evaluated over ``n`` environments at once.  Integers of width
<= 64 are held in ``uint64`` arrays, wider ones in ``object`` arrays of Python
ints; memrefs carry a leading lane axis.  Both arms of ``scf.if`` are computed
and merged per lane, which is sound because every operation is total and
side-effect free.
"""

from __future__ import annotations

import numpy as np

from ..ir.core import BINARY_OPS, Function, IntType, MemRefType, to_signed


def dtype_for(width: int):
    return np.uint64 if width <= 64 else object


def mask_for(width: int):
    m = (1 << width) - 1
    return np.uint64(m) if width <= 64 else m


def _convert(x: np.ndarray, width: int) -> np.ndarray:
    dt = dtype_for(width)
    if x.dtype == dt:
        return x
    if dt is object:
        return x.astype(object)
    return (x & ((1 << width) - 1)).astype(np.uint64)


def _shift_amount(b: np.ndarray, cap: int) -> np.ndarray:
    return np.minimum(b, np.uint64(cap)) if b.dtype == np.uint64 else np.minimum(b, cap)


def binary(opcode: str, a: np.ndarray, b: np.ndarray, w: int) -> np.ndarray:
    m = mask_for(w)
    if opcode == "addi":
        return (a + b) & m
    if opcode == "subi":
        return (a - b) & m
    if opcode == "muli":
        return (a * b) & m
    if opcode == "andi":
        return a & b
    if opcode == "ori":
        return a | b
    if opcode == "xori":
        return a ^ b
    zero = np.zeros_like(a)
    big = b >= w
    if opcode == "shli":
        s = _shift_amount(b, min(w, 63) if a.dtype != object else w)
        return np.where(big, zero, (a << s) & m)
    if opcode == "shrui":
        s = _shift_amount(b, min(w, 63) if a.dtype != object else w)
        return np.where(big, zero, a >> s)
    if opcode == "shrsi":
        s = _shift_amount(b, w - 1)
        neg = (a >> (w - 1)) & 1
        fill = m ^ (m >> s)
        return (a >> s) | (neg * fill)
    raise ValueError(opcode)


def cast(opcode: str, x: np.ndarray, w_from: int, w_to: int) -> np.ndarray:
    if opcode == "trunci":
        if x.dtype == object and w_to <= 64:
            return (x & ((1 << w_to) - 1)).astype(np.uint64)
        return x & mask_for(w_to)
    y = _convert(x, w_to)
    if opcode == "extui":
        return y
    neg = (y >> (w_from - 1)) & 1
    m_to, m_from = (1 << w_to) - 1, (1 << w_from) - 1
    fill = m_to ^ m_from
    fill = np.uint64(fill) if y.dtype == np.uint64 else fill
    return y | (neg * fill)


def compare(pred: str, a: np.ndarray, b: np.ndarray, w: int) -> np.ndarray:
    if pred[0] == "s":
        bias = np.uint64(1 << (w - 1)) if a.dtype == np.uint64 else 1 << (w - 1)
        a, b = a ^ bias, b ^ bias
    kind = pred[1:] if pred[0] in "su" else pred
    r = {
        "eq": lambda: a == b, "ne": lambda: a != b, "lt": lambda: a < b,
        "le": lambda: a <= b, "gt": lambda: a > b, "ge": lambda: a >= b,
    }[kind]()
    return np.asarray(r, dtype=bool).astype(np.uint64)


def _merge(cond: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    c = cond.astype(bool).reshape(cond.shape + (1,) * (a.ndim - 1))
    return np.where(c, a, b)


class _Interp:
    def __init__(self, n: int):
        self.n = n

    def block(self, ops, env: dict):
        for op in ops:
            if op.opcode in ("yield", "return"):
                return [env[v] for v in op.operands]
            self.op(op, env)
        return []

    def op(self, op, env):
        oc = op.opcode
        t = op.types[0] if op.types else None
        if oc == "const":
            v = op.value & ((1 << t.width) - 1)
            env[op.result] = np.full(self.n, v, dtype=dtype_for(t.width))
        elif oc in BINARY_OPS:
            env[op.result] = binary(oc, env[op.operands[0]], env[op.operands[1]], t.width)
        elif oc in ("extsi", "extui", "trunci"):
            x = env[op.operands[0]]
            env[op.result] = cast(oc, x, self.width_of(op.operands[0]), t.width)
        elif oc == "cmpi":
            a, b = env[op.operands[0]], env[op.operands[1]]
            env[op.result] = compare(op.predicate, a, b, self.width_of(op.operands[0]))
        elif oc == "select":
            c, a, b = (env[v] for v in op.operands)
            env[op.result] = _merge(c, a, b)
        elif oc == "load":
            m = env[op.operands[0]]
            env[op.result] = m[self.index(op, env)]
        elif oc == "store":
            v, m = env[op.operands[0]], env[op.operands[1]]
            m = m.copy()
            m[self.index(op, env)] = v
            env[op.result] = m
        elif oc == "if":
            then = self.block(op.regions[0].ops, dict(env))
            other = self.block(op.regions[1].ops, dict(env))
            cond = env[op.operands[0]]
            for r, a, b in zip(op.results, then, other):
                env[r] = _merge(cond, a, b)
        elif oc == "for":
            carried = [env[v] for v in op.operands]
            self.types.update(zip(op.iter_args, op.types))
            for k in range(op.lower, op.upper, op.step):
                inner = dict(env)
                inner[op.iv] = k
                inner.update(zip(op.iter_args, carried))
                carried = self.block(op.body.ops, inner)
            env.update(zip(op.results, carried))
        else:
            raise ValueError(f"cannot evaluate {oc}")
        for r, rt in zip(op.results, op.types):
            self.types[r] = rt

    def width_of(self, v):
        return self.types[v].width

    @staticmethod
    def index(op, env):
        return (slice(None),) + tuple(i if isinstance(i, int) else env[i] for i in op.indices)


def run(f: Function, inputs: dict, n: int):
    """Evaluate ``f`` on ``n`` lanes; ``inputs`` maps arg name -> lane array."""
    interp = _Interp(n)
    interp.types = {a.name: a.type for a in f.args}
    env = {a.name: inputs[a.name] for a in f.args}
    return interp.block(f.body.ops, env)[0]


def lane_array(t, values) -> np.ndarray:
    """Lane arrays for a list of per-environment values of type ``t``."""
    if isinstance(t, IntType):
        m = (1 << t.width) - 1
        return np.array([int(v) & m for v in values], dtype=dtype_for(t.width))
    if isinstance(t, MemRefType):
        m = (1 << t.element.width) - 1
        rows = []
        for v in values:
            flat = np.asarray(v, dtype=object).reshape(-1)
            if flat.size != t.size:
                raise ValueError(f"expected {t.size} elements for {t}, got {flat.size}")
            rows.append([int(x) & m for x in flat])
        arr = np.array(rows, dtype=object).reshape((len(values),) + t.shape)
        return arr.astype(dtype_for(t.element.width))
    raise TypeError(f"cannot build inputs of type {t}")


def to_python(t, lane_value, signed: bool = True):
    """Convert one lane of a result back to Python ints (signed by default)."""
    if isinstance(t, MemRefType):
        w = t.element.width
        conv = (lambda x: to_signed(int(x), w)) if signed and w > 1 else int
        return np.vectorize(conv, otypes=[object])(lane_value).tolist()
    w = t.width
    return to_signed(int(lane_value), w) if signed and w > 1 else int(lane_value)


def result_type(f: Function):
    from ..ir.analysis import definitions

    d = definitions(f).get(f.returned)
    if d is None:
        raise ValueError("function has no return value")
    if hasattr(d, "opcode"):
        if d.opcode == "for" and f.returned in d.iter_args:
            return d.types[d.iter_args.index(f.returned)]
        return d.types[d.results.index(f.returned)]
    return d.type


def evaluate(f: Function, env: dict, signed: bool = True):
    """Evaluate ``f`` on a single environment.

    ``env`` maps every argument name to an int (scalars) or a nested list /
    array (memrefs).  Integers are returned as signed two's-complement values
    (``i1`` as 0/1); memrefs as nested lists.
    """
    missing = [a.name for a in f.args if a.name not in env]
    if missing:
        raise ValueError(f"environment misses arguments: {', '.join(missing)}")
    inputs = {a.name: lane_array(a.type, [env[a.name]]) for a in f.args}
    out = run(f, inputs, 1)
    return to_python(result_type(f), out[0], signed)
