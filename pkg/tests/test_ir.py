import pytest
from hypothesis import given, strategies as st

from tensorlift.corpus import random_function, standard_suite, generate
from tensorlift.ir import (
    IntType, IRError, MemRefType, Module, ParseError, VerificationError, canonical_const,
    parse_module, print_function_text, print_module, strip_annotations, to_signed, type_bits,
    verify,
)
from tensorlift.ir.builder import Builder, function
from tensorlift.ir.core import EncodingField
from tensorlift.ir.analysis import NameGen, backward_slice, compute_core_size, remove_dead


def _single(text):
    return parse_module(text).functions[0]


MAC_TEXT = """// tensorlift IR v1
func @mac__acc(%a : i8, %b : i8, %acc : i32) {
  %0 = arith.extsi %a : i32
  %1 = arith.extsi %b : i32
  %2 = arith.muli %0, %1 : i32
  %3 = arith.addi %acc, %2 : i32 {atlaas.mac = "lhs=%a rhs=%b acc=%acc lhs_width=8 rhs_width=8"}
  return %3
}
"""


class TestTypes:
    def test_width_bounds(self):
        assert IntType(1).mask == 1
        assert IntType(128).mask == (1 << 128) - 1
        with pytest.raises(IRError):
            IntType(0)
        with pytest.raises(IRError):
            IntType(129)

    def test_memref(self):
        t = MemRefType((2, 3), IntType(8))
        assert t.size == 6
        assert str(t) == "memref<2x3xi8>"
        assert type_bits(t) == 48
        with pytest.raises(IRError):
            MemRefType((0,), IntType(8))

    def test_signed_conversion(self):
        assert to_signed(255, 8) == -1
        assert to_signed(127, 8) == 127
        assert to_signed(1 << 127, 128) == -(1 << 127)
        assert canonical_const(1, 1) == 1
        assert canonical_const(-1, 1) == 1
        assert canonical_const(200, 8) == -56

    def test_encoding_field(self):
        f = EncodingField("rs1", 4, 3)
        assert str(f) == "rs1[4:3]"
        assert f.extract(0b10000) == 2
        assert f.extract(0b11000) == 3


class TestText:
    def test_round_trip_exact(self):
        m = parse_module(MAC_TEXT)
        assert print_module(m) == MAC_TEXT

    def test_function_properties(self):
        f = _single(MAC_TEXT)
        assert f.instruction == "mac"
        assert f.target_asv == "acc"
        assert f.returned == "3"
        assert f.op_count() == 5
        assert f.arg("a").signal_name == "a"

    @pytest.mark.parametrize("spec", standard_suite(), ids=lambda s: s.label)
    def test_corpus_round_trip(self, spec):
        m, _ = generate(spec)
        text = print_module(m)
        assert print_module(parse_module(text)) == text

    def test_regions_and_attrs(self):
        text = """// tensorlift IR v1
func @k__s(%m : memref<4xi8>, %c : i1) {
  %0 = arith.constant 0 : i8
  %1 = scf.for %2 = 0 to 4 step 1 iter_args(%3 = %0) -> i8 {linalg_op = "x"} {
    %4 = memref.load %m[%2] : i8
    %5 = arith.addi %3, %4 : i8
    scf.yield %5
  }
  %6 = scf.if %c -> i8 {
    scf.yield %1
  } else {
    scf.yield %0
  }
  return %6
}
"""
        m = parse_module(text)
        assert print_module(m) == text
        loop = m.functions[0].body.ops[1]
        assert loop.attrs == {"linalg_op": "x"}
        assert loop.trip_count == 4

    def test_parse_error_position(self):
        bad = MAC_TEXT.replace("arith.muli %0, %1", "arith.muli %0 %1")
        with pytest.raises(ParseError) as e:
            parse_module(bad)
        assert e.value.line == 5

    def test_unknown_op(self):
        with pytest.raises(ParseError):
            parse_module(MAC_TEXT.replace("arith.muli", "arith.frob"))

    def test_verify_runs_on_parse(self):
        bad = MAC_TEXT.replace("%3 = arith.addi %acc, %2 : i32", "%3 = arith.addi %acc, %a : i32")
        with pytest.raises(VerificationError):
            parse_module(bad)
        assert parse_module(bad, verify=False).functions

    @given(st.integers(0, 10_000))
    def test_fuzz_round_trip(self, seed):
        f = random_function(seed)
        text = print_function_text(f)
        g = parse_module(text).functions[0]
        assert print_function_text(g) == text


def _rules(f):
    return {v.rule for v in verify(f)}


class TestVerify:
    def build(self, body, args=(("x", IntType(8)),)):
        b = Builder()
        body(b)
        return function("t__x", list(args), b)

    def test_clean(self):
        assert verify(_single(MAC_TEXT)) == []

    def test_width_mismatch(self):
        f = self.build(lambda b: b.ret(b.binary("addi", "x", b.const(1, IntType(4)), IntType(8))))
        assert "width mismatch" in _rules(f)

    def test_undefined_value(self):
        f = self.build(lambda b: b.ret(b.binary("addi", "x", "nope", IntType(8))))
        assert "undefined value" in _rules(f)

    def test_bad_extension(self):
        f = self.build(lambda b: b.ret(b.cast("extsi", "x", IntType(4))))
        assert "bad extension" in _rules(f)

    def test_bad_truncation(self):
        f = self.build(lambda b: b.ret(b.cast("trunci", "x", IntType(16))))
        assert "bad truncation" in _rules(f)

    def test_cmpi_and_select(self):
        def body(b):
            c = b.binary("addi", "x", "x", IntType(8))
            b.ret(b.select(c, "x", "x", IntType(8)))
        assert "select condition" in _rules(self.build(body))

    def test_missing_return(self):
        f = self.build(lambda b: b.const(1, IntType(8)))
        assert "missing return" in _rules(f)

    def test_redefined(self):
        f = self.build(lambda b: b.ret(b.const(1, IntType(8))))
        f.body.ops.insert(0, f.body.ops[0].__class__("const", [], ["0"], [IntType(8)], value=2))
        assert "redefined value" in _rules(f)

    def test_index_out_of_bounds(self):
        f = self.build(lambda b: b.ret(b.load("m", [4], IntType(8))),
                       args=(("m", MemRefType((4,), IntType(8))),))
        assert "index" in _rules(f)

    def test_loop_iv_beyond_extent(self):
        def body(b):
            sub = b.region()
            iv, acc = b.fresh(), b.fresh()
            e = sub.load("m", [iv], IntType(8))
            sub.yield_(sub.binary("addi", acc, e, IntType(8)))
            (r,) = b.for_(0, 5, 1, [b.const(0, IntType(8))], sub, iv, [acc], [IntType(8)])
            b.ret(r)
        f = self.build(body, args=(("m", MemRefType((4,), IntType(8))),))
        assert "index" in _rules(f)

    def test_loop_carried_arity(self):
        def body(b):
            sub = b.region()
            iv, acc = b.fresh(), b.fresh()
            sub.yield_(acc)
            (r,) = b.for_(0, 2, 1, [b.const(0, IntType(4))], sub, iv, [acc], [IntType(8)])
            b.ret(r)
        assert "loop-carried arity" in _rules(self.build(body))

    def test_terminator(self):
        def body(b):
            then, other = b.region(), b.region()
            then.const(1, IntType(8))
            other.yield_("x")
            c = b.cmpi("eq", "x", "x")
            (r,) = b.if_(c, then, other, [IntType(8)])
            b.ret(r)
        assert "terminator" in _rules(self.build(body))


class TestAnalysis:
    def test_namegen_is_fresh(self):
        f = _single(MAC_TEXT)
        gen = NameGen(f)
        assert [gen(), gen()] == ["4", "5"]

    def test_remove_dead_targeted(self):
        b = Builder()
        dead1 = b.const(1, IntType(8))
        b.const(2, IntType(8))
        b.ret("x")
        f = function("t__x", [("x", IntType(8))], b)
        only = {id(op) for op in f.walk() if op.results == [dead1]}
        assert remove_dead(f, only=only) == 1
        assert remove_dead(f) == 1
        assert f.op_count() == 1

    def test_slice_and_core(self):
        f = _single(MAC_TEXT)
        assert len(backward_slice(f, [f.returned])) == 4
        assert compute_core_size(f) == 4

    def test_strip_annotations(self):
        f = _single(MAC_TEXT)
        g = strip_annotations(f)
        assert all(not op.attrs for op in g.walk())
        assert any(op.attrs for op in f.walk())

    def test_empty_module_prints(self):
        assert parse_module(print_module(Module())).functions == []
