"""Synthetic stand-ins for per-(instruction, ASV) extraction output.

Each generator returns a verified :class:`Module` (descriptors + functions)
and the :class:`Expectations` the lifting pipeline must meet on it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..ir.builder import Builder, function
from ..ir.core import InstructionDescriptor, IntType, Macro, EncodingField, MemRefType, Module
from ..ir.verify import verify_module
from .expect import Expectations

KINDS = ("pe", "mac_chain", "dma_copy", "pool", "fsm_pair")

DEFAULTS = {
    "pe": {"W": 8, "V": 32, "w": 8, "activation": 0, "macro": 0},
    "mac_chain": {"n": 16, "W": 8, "V": 32, "stride": 1},
    "dma_copy": {"banks": 3, "W": 8, "rows": 4, "addr_width": 16},
    "pool": {"window": 4, "W": 8},
    "fsm_pair": {"W": 8},
}


class DesignError(ValueError):
    pass


@dataclass(frozen=True)
class DesignSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def resolved(self) -> dict:
        if self.kind not in DEFAULTS:
            raise DesignError(f"unknown design kind {self.kind!r}")
        unknown = set(self.params) - set(DEFAULTS[self.kind]) - {"ext_variant", "clamp_variant"}
        if unknown:
            raise DesignError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        p = dict(DEFAULTS[self.kind])
        if self.kind == "pe":
            p["ext_variant"] = self.seed & 1
            p["clamp_variant"] = (self.seed >> 1) & 1
        p.update(self.params)
        return p

    def validate(self) -> dict:
        p = self.resolved()
        k = self.kind
        if k == "pe" and not (1 <= p["W"] < p["V"] and 1 <= p["w"] < p["V"]):
            raise DesignError("pe requires W < V and w < V")
        if k == "mac_chain" and (p["n"] < 1 or p["stride"] < 1):
            raise DesignError("mac_chain requires n >= 1 and stride >= 1")
        if k == "dma_copy" and p["banks"] not in (1, 2, 3):
            raise DesignError("dma_copy requires banks in {1, 2, 3}")
        if k == "pool" and p["window"] < 2:
            raise DesignError("pool requires window >= 2")
        for name in ("W", "V", "w"):
            if name in p and not 1 <= p[name] <= 128:
                raise DesignError(f"{name} must be in [1, 128]")
        return p

    @property
    def label(self) -> str:
        """File-name stem: kind, non-default parameters, then a non-zero seed."""
        p = self.resolved()
        extra = {k: v for k, v in self.params.items() if DEFAULTS[self.kind].get(k) != v}
        parts = [self.kind] + [f"{k}{p[k]}" for k in sorted(extra)]
        if self.seed:
            parts.append(f"seed{self.seed}")
        return "_".join(parts)


def _ext_chain(b: Builder, x: str, W: int, V: int, variant: int) -> str:
    """Sign-extend ``x`` from iW to iV the way a netlist spells it out."""
    tV = IntType(V)
    if variant == 1:
        e = b.cast("extui", x, tV)
        s = b.const(V - W, tV)
        return b.binary("shrsi", b.binary("shli", e, s, tV), s, tV)
    acc = b.cast("extui", x, tV)
    msb = b.cast("trunci", b.binary("shrui", x, b.const(W - 1, IntType(W)), IntType(W)), IntType(1))
    one, zero = b.const(1, IntType(1)), b.const(0, IntType(1))
    for k in range(W, V):
        bit = b.select(msb, one, zero, IntType(1))
        shifted = b.binary("shli", b.cast("extui", bit, tV), b.const(k, tV), tV)
        acc = b.binary("ori", acc, shifted, tV)
    return acc


def _clamp(b: Builder, v: str, w: int, V: int, variant: int) -> str:
    tV = IntType(V)
    if variant == 0:
        return b.cast("extsi", b.cast("trunci", v, IntType(w)), tV)
    hi = b.const((1 << (w - 1)) - 1, tV)
    lo = b.const(-(1 << (w - 1)), tV)
    inner = b.select(b.cmpi("slt", v, lo), lo, v, tV)
    return b.select(b.cmpi("sgt", v, hi), hi, inner, tV)


def gen_pe(p: dict):
    W, V, w = p["W"], p["V"], p["w"]
    tW, tV = IntType(W), IntType(V)
    m1 = lambda t: MemRefType((1,), t)  # noqa: E731
    b = Builder()
    a = b.load("in_a", [0], tW)
    bb = b.load("in_b", [0], tW)
    ea = _ext_chain(b, a, W, V, p["ext_variant"])
    eb = _ext_chain(b, bb, W, V, p["ext_variant"])
    prod = b.binary("muli", ea, eb, tV)
    d = b.load("in_d", [0], tV)
    old = b.load("pe_acc", [0], tV)
    df = b.load("in_control_dataflow", [0], IntType(1))
    acc = b.select(df, d, old, tV)
    s = b.binary("addi", prod, acc, tV)
    out = _clamp(b, s, w, V, p["clamp_variant"])
    args = [("in_a", m1(tW)), ("in_b", m1(tW)), ("in_d", m1(tV)),
            ("in_control_dataflow", m1(IntType(1)))]
    controls = {"in_control_dataflow": [1]}
    if p["activation"]:
        relu = b.load("in_control_relu", [0], IntType(1))
        zero = b.const(0, tV)
        pos = b.select(b.cmpi("sgt", out, zero), out, zero, tV)
        out = b.select(relu, pos, out, tV)
        args.append(("in_control_relu", m1(IntType(1))))
        controls["in_control_relu"] = [1]
    args.append(("pe_acc", m1(tV)))
    b.ret(b.store(out, "pe_acc", [0], m1(tV)))
    f = function("pe_mac__pe_acc", args, b)
    descs = [InstructionDescriptor("pe_mac", controls, ["pe_acc"])]
    funcs = [f]

    ex = Expectations()
    fn = f.name
    ex.add(fn, "input", "ops", f.op_count())
    ex.add(fn, "input", "bitext_steps", 2 * (V - W) if p["ext_variant"] == 0 else 0)
    n_extsi = 2 + (1 if p["clamp_variant"] == 0 else 0)
    ex.add(fn, "A1", "bitext_steps", 0)
    ex.add(fn, "A1", "arith_ext", 0)
    ex.add(fn, "A1", "extsi", n_extsi)
    ex.add(fn, "A2", "extsi", n_extsi)
    ex.add(fn, "B3", "mac", 1)
    ex.add(fn, "B3", "mac_widths", f"{W}x{W}")
    ex.add(fn, "B4", "selects_on:in_control_dataflow", 0)
    ex.add(fn, "B5", "clamp", f"{-(1 << (w - 1))},{(1 << (w - 1)) - 1},signed")
    ex.add(fn, "C6", "loops", 0)
    ex.add(fn, "D8", "compute", "dot_product")
    ex.add(fn, "D8", "role:in_a", "input")
    ex.add(fn, "D8", "role:in_b", "input")
    ex.add(fn, "D8", "role:pe_acc", "output")
    ex.add(fn, "D8", "activation", "relu" if p["activation"] else "none")

    if p["macro"]:
        t8 = IntType(8)
        c = Builder()
        one = c.const(1, t8)
        nxt = c.binary("addi", "loop_cnt", one, t8)
        done = c.cmpi("uge", nxt, "loop_k")
        c.ret(c.select(done, c.const(0, t8), nxt, t8))
        ctrl = function("loop_ws__loop_cnt", [("loop_i", t8), ("loop_j", t8), ("loop_k", t8),
                                               ("loop_cnt", t8)], c)
        funcs.append(ctrl)
        descs.append(InstructionDescriptor(
            "loop_ws", {}, ["loop_cnt"], {},
            Macro("pe_mac", ("loop_i", "loop_j", "loop_k"))))
        ex.add(ctrl.name, "D8", "compute", "opaque")
    return descs, funcs, ex


def gen_mac_chain(p: dict):
    n, W, V, stride = p["n"], p["W"], p["V"], p["stride"]
    tW, tV = IntType(W), IntType(V)
    ext = (n - 1) * stride + 1
    b = Builder()
    acc = b.load("acc_out", [0], tV)
    for k in range(n):
        a = b.cast("extsi", b.load("in_a", [k * stride], tW), tV)
        c = b.cast("extsi", b.load("in_b", [k * stride], tW), tV)
        acc = b.binary("addi", acc, b.binary("muli", a, c, tV), tV)
    b.ret(b.store(acc, "acc_out", [0], MemRefType((1,), tV)))
    f = function("matmul_vec__acc_out", [
        ("in_a", MemRefType((ext,), tW)), ("in_b", MemRefType((ext,), tW)),
        ("acc_out", MemRefType((1,), tV))], b)
    descs = [InstructionDescriptor("matmul_vec", {}, ["acc_out"])]

    ex = Expectations()
    fn = f.name
    rolls = n >= 2 and stride == 1
    ex.add(fn, "input", "ops", f.op_count())
    ex.add(fn, "B3", "mac", n)
    ex.add(fn, "C6", "loops", 1 if rolls else 0)
    if rolls:
        ex.add(fn, "C6", "iter_args", 1)
        ex.add(fn, "C6", "trip", n)
        ex.add(fn, "C7", "linalg_op", "dot_product")
    else:
        ex.add(fn, "C7", "linalg_op", "none")
    ex.add(fn, "D8", "compute", "dot_product")
    ex.add(fn, "D8", "role:acc_out", "state")
    return descs, [f], ex


def _bank_of(b: Builder, rs1: str) -> str:
    t8 = IntType(8)
    return b.cast("trunci", b.binary("shrui", rs1, b.const(3, t8), t8), IntType(2))


def gen_dma_copy(p: dict):
    banks, W, rows, AW = p["banks"], p["W"], p["rows"], p["addr_width"]
    t8, tA, tW = IntType(8), IntType(AW), IntType(W)
    row_t = MemRefType((rows,), tW)
    field_ = {"bank": EncodingField("rs1", 4, 3)}
    descs, funcs = [], []
    ex = Expectations()

    strides = [f"strides_{k}" for k in range(banks)]
    for k, s in enumerate(strides):
        b = Builder()
        hit = b.cmpi("eq", _bank_of(b, "rs1"), b.const(k, IntType(2)))
        b.ret(b.select(hit, "rs2", s, tA))
        f = function(f"config_ld__{s}", [("rs1", t8), ("rs2", tA), (s, tA)], b)
        funcs.append(f)
        ex.add(f.name, "D8", "compute", "opaque")
    descs.append(InstructionDescriptor("config_ld", {}, list(strides), dict(field_)))

    for k in range(banks):
        name = "mvin" if k == 0 else f"mvin{k + 1}"
        b = Builder()
        spad = "spad"
        for r in range(rows):
            spad = b.store(b.load("dram_rdata", [r], tW), spad, [r], row_t)
        b.ret(spad)
        copy = function(f"{name}__spad", [("dram_rdata", row_t), ("spad", row_t)], b)

        b = Builder()
        bank = _bank_of(b, "rs1")
        stride = strides[-1]
        for j in range(banks - 2, -1, -1):
            hit = b.cmpi("eq", bank, b.const(j, IntType(2)))
            stride = b.select(hit, strides[j], stride, tA)
        b.ret(b.binary("addi", "rs2", stride, tA))
        addr = function(f"{name}__dram_addr", [("rs1", t8), ("rs2", tA)]
                        + [(s, tA) for s in strides], b)
        funcs += [copy, addr]
        descs.append(InstructionDescriptor(name, {"rs1": [k << 3]}, ["spad", "dram_addr"],
                                           dict(field_)))
        for j, s in enumerate(strides):
            ex.add(addr.name, "B4", f"refs:{s}", 1 if j == k else 0)
        ex.add(copy.name, "D8", "role:dram_rdata", "input")
        ex.add(copy.name, "D8", "role:spad", "output")
        ex.add(copy.name, "D8", "port_class:dram_rdata", "dram_addr")
        ex.add(copy.name, "D8", "port_class:spad", "spad_addr")

    b = Builder()
    out = "dram_wdata"
    for r in range(rows):
        out = b.store(b.load("spad", [r], tW), out, [r], row_t)
    b.ret(out)
    st = function("mvout__dram_wdata", [("spad", row_t), ("dram_wdata", row_t)], b)
    funcs.append(st)
    descs.append(InstructionDescriptor("mvout", {}, ["dram_wdata"]))
    ex.add(st.name, "D8", "role:spad", "input")
    ex.add(st.name, "D8", "role:dram_wdata", "output")
    ex.add("module", "assemble", "banked",
           f"strides x {banks} select rs1[4:3]" if banks > 1 else "none")
    return descs, funcs, ex


def gen_pool(p: dict):
    window, W = p["window"], p["W"]
    tW = IntType(W)
    b = Builder()
    m = b.const(-(1 << (W - 1)), tW)
    for k in range(window):
        x = b.load("spad_in", [k], tW)
        m = b.select(b.cmpi("sgt", x, m), x, m, tW)
    b.ret(b.store(m, "pool_out", [0], MemRefType((1,), tW)))
    f = function("pool__pool_out", [("spad_in", MemRefType((window,), tW)),
                                    ("pool_out", MemRefType((1,), tW))], b)
    ex = Expectations()
    ex.add(f.name, "input", "ops", f.op_count())
    ex.add(f.name, "C6", "loops", 1)
    ex.add(f.name, "C6", "trip", window)
    ex.add(f.name, "C7", "linalg_op", "max_reduce")
    ex.add(f.name, "D8", "compute", "max_reduce")
    return [InstructionDescriptor("pool", {}, ["pool_out"])], [f], ex


def gen_fsm_pair(p: dict):
    W = p["W"]
    t2, tW, t32 = IntType(2), IntType(W), IntType(32)
    funcs = []

    b = Builder()
    b.ret(b.const(1, t2))
    funcs.append(function("preload__state", [("state", t2)], b))

    b = Builder()
    b.ret("in_d")
    funcs.append(function("preload__preload_reg", [("in_d", tW), ("preload_reg", tW)], b))

    b = Builder()
    ready = b.cmpi("eq", "state", b.const(1, t2))
    then, other = b.region(), b.region()
    then.yield_(then.const(0, t2))
    other.yield_("state")
    (r,) = b.if_(ready, then, other, [t2])
    b.ret(r)
    funcs.append(function("compute__state", [("state", t2)], b))

    b = Builder()
    ready = b.cmpi("eq", "state", b.const(1, t2))
    then, other = b.region(), b.region()
    s = then.binary("addi", then.cast("extsi", "in_a", t32), then.cast("extsi", "preload_reg", t32), t32)
    then.yield_(then.binary("addi", "acc_out", s, t32))
    other.yield_("acc_out")
    (r,) = b.if_(ready, then, other, [t32])
    b.ret(r)
    funcs.append(function("compute__acc_out", [("in_a", tW), ("preload_reg", tW), ("state", t2),
                                               ("acc_out", t32)], b))
    descs = [InstructionDescriptor("preload", {}, ["state", "preload_reg"]),
             InstructionDescriptor("compute", {}, ["state", "acc_out"])]
    ex = Expectations()
    for f in funcs:
        ex.add(f.name, "D8", "compute", "opaque")
    ex.add("module", "assemble", "orders", "preload before compute via state")
    return descs, funcs, ex


_GENERATORS = {
    "pe": gen_pe, "mac_chain": gen_mac_chain, "dma_copy": gen_dma_copy,
    "pool": gen_pool, "fsm_pair": gen_fsm_pair,
}


def generate(spec: DesignSpec):
    """Build ``(module, expectations)`` for ``spec``; a pure function of it."""
    p = spec.validate()
    descs, funcs, ex = _GENERATORS[spec.kind](p)
    m = Module(descs, funcs)
    verify_module(m)
    return m, ex


def merge(modules) -> Module:
    """Concatenate modules; instruction names must not collide."""
    out = Module()
    for m in modules:
        seen = {d.name for d in out.descriptors}
        clash = seen & {d.name for d in m.descriptors}
        if clash:
            raise DesignError(f"instruction names collide: {sorted(clash)}")
        out.descriptors += m.descriptors
        out.functions += m.functions
    return out


def standard_suite():
    """The design points the preservation suite covers."""
    return [
        DesignSpec("pe", seed=0),
        DesignSpec("pe", seed=3),
        DesignSpec("mac_chain", {"n": 1}),
        DesignSpec("mac_chain", {"n": 2}),
        DesignSpec("mac_chain", {"n": 16}),
        DesignSpec("dma_copy", {"banks": 1}),
        DesignSpec("dma_copy", {"banks": 3}),
        DesignSpec("pool", {"window": 2}),
        DesignSpec("pool", {"window": 4}),
        DesignSpec("fsm_pair"),
    ]


def full_corpus():
    """One design of every kind merged into a single module."""
    specs = [DesignSpec("pe", {"macro": 1}), DesignSpec("mac_chain"), DesignSpec("dma_copy"),
             DesignSpec("pool"), DesignSpec("fsm_pair")]
    parts = [generate(s) for s in specs]
    ex = Expectations()
    for _, e in parts:
        ex.records.update(e.records)
    return merge(m for m, _ in parts), ex
