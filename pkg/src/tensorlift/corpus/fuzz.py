"""Random generator of verifying functions, for fallback-totality testing."""

from __future__ import annotations

import random

from ..ir.builder import Builder, function
from ..ir.core import BINARY_OPS, CMP_PREDICATES, IntType, MemRefType, Module

WIDTHS = (1, 2, 4, 8, 16, 32)


class _Gen:
    def __init__(self, rng: random.Random):
        self.rng = rng

    def pick(self, pool, t=None):
        cands = [v for v, vt in pool if t is None or vt == t]
        return self.rng.choice(cands) if cands else None

    def ints(self, pool):
        return [(v, t) for v, t in pool if isinstance(t, IntType)]

    def const(self, b, t):
        if t.width == 1:
            return b.const(self.rng.randrange(2), t)
        half = 1 << (t.width - 1)
        return b.const(self.rng.randrange(-half, half), t)

    def value_of(self, b, pool, t):
        v = self.pick(pool, t)
        if v is None:
            v = self.const(b, t)
            pool.append((v, t))
        return v

    def step(self, b: Builder, pool, depth):
        r = self.rng
        ints = self.ints(pool)
        choice = r.random()
        if choice < 0.12 or not ints:
            t = IntType(r.choice(WIDTHS))
            pool.append((self.const(b, t), t))
        elif choice < 0.42:
            x, t = r.choice(ints)
            y = self.value_of(b, pool, t)
            op = r.choice(BINARY_OPS)
            pool.append((b.binary(op, x, y, t), t))
        elif choice < 0.55:
            x, t = r.choice(ints)
            wider = [w for w in WIDTHS if w > t.width]
            narrower = [w for w in WIDTHS if w < t.width]
            if wider and (not narrower or r.random() < 0.5):
                nt = IntType(r.choice(wider))
                pool.append((b.cast(r.choice(("extsi", "extui")), x, nt), nt))
            elif narrower:
                nt = IntType(r.choice(narrower))
                pool.append((b.cast("trunci", x, nt), nt))
        elif choice < 0.63:
            x, t = r.choice(ints)
            y = self.value_of(b, pool, t)
            pool.append((b.cmpi(r.choice(CMP_PREDICATES), x, y), IntType(1)))
        elif choice < 0.73:
            x, t = r.choice(ints)
            c = self.value_of(b, pool, IntType(1))
            y = self.value_of(b, pool, t)
            pool.append((b.select(c, x, y, t), t))
        elif choice < 0.83:
            mems = [(v, t) for v, t in pool if isinstance(t, MemRefType)]
            if mems:
                m, mt = r.choice(mems)
                idx = [r.randrange(d) for d in mt.shape]
                if r.random() < 0.5:
                    pool.append((b.load(m, idx, mt.element), mt.element))
                else:
                    v = self.value_of(b, pool, mt.element)
                    pool.append((b.store(v, m, idx, mt), mt))
        elif choice < 0.90 and depth < 2:
            x, t = r.choice(ints)
            c = self.value_of(b, pool, IntType(1))
            arms = []
            for _ in range(2):
                sub = b.region()
                inner = list(pool)
                for _ in range(r.randrange(0, 3)):
                    self.step(sub, inner, depth + 1)
                sub.yield_(self.pick(inner, t))
                arms.append(sub)
            (res,) = b.if_(c, arms[0], arms[1], [t])
            pool.append((res, t))
        elif depth < 2:
            mems = [(v, t) for v, t in pool if isinstance(t, MemRefType) and len(t.shape) == 1]
            x, t = r.choice(ints)
            sub = b.region()
            iv, carried = b.fresh(), b.fresh()
            inner = list(pool) + [(carried, t)]
            if mems:
                m, mt = r.choice(mems)
                e = sub.load(m, [iv], mt.element)
                inner.append((e, mt.element))
            for _ in range(r.randrange(1, 4)):
                self.step(sub, inner, depth + 1)
            sub.yield_(self.pick(inner, t))
            upper = mt.shape[0] if mems else r.randrange(1, 4)
            (res,) = b.for_(0, upper, 1, [x], sub, iv, [carried], [t])
            pool.append((res, t))


def random_function(seed: int, name: str | None = None, n_ops: int = 12):
    """A random function that passes ``verify``; deterministic in ``seed``."""
    rng = random.Random(seed)
    g = _Gen(rng)
    args = []
    for k in range(rng.randrange(1, 5)):
        if rng.random() < 0.3:
            t = MemRefType((rng.randrange(1, 5),), IntType(rng.choice((4, 8))))
        else:
            t = IntType(rng.choice(WIDTHS))
        args.append((f"arg{k}", t))
    b = Builder()
    pool = list(args)
    for _ in range(n_ops):
        g.step(b, pool, 0)
    out, _ = rng.choice(pool[len(args):] or pool)
    b.ret(out)
    return function(name or f"fuzz{seed}__out", args, b)


def random_module(count: int, seed: int = 0) -> Module:
    return Module([], [random_function(seed * 100_003 + k, f"fuzz{k}__out") for k in range(count)])
