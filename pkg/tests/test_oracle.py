import numpy as np
import pytest
from hypothesis import given, strategies as st

from tensorlift.corpus import DesignSpec, generate, random_function
from tensorlift.ir import parse_module
from tensorlift.ir import semantics
from tensorlift.ir.core import BINARY_OPS, CMP_PREDICATES
from tensorlift.oracle import Budget, SignatureMismatch, check_equivalence, emit_smt, evaluate
from tensorlift.oracle.equiv import pins_from_descriptor
from tensorlift.oracle.evaluate import binary, cast, compare, dtype_for


def _fn(text):
    return parse_module("// tensorlift IR v1\n" + text).functions[0]


ADD = _fn("""func @k__r(%a : i8, %b : i8) {
  %0 = arith.addi %a, %b : i8
  return %0
}
""")
ADD_SWAPPED = _fn("""func @k__r(%a : i8, %b : i8) {
  %0 = arith.addi %b, %a : i8
  return %0
}
""")
SUB = _fn("""func @k__r(%a : i8, %b : i8) {
  %0 = arith.subi %a, %b : i8
  return %0
}
""")
WIDE = _fn("""func @k__r(%a : i32, %b : i32) {
  %0 = arith.addi %a, %b : i32
  return %0
}
""")
WIDE_SWAPPED = _fn("""func @k__r(%a : i32, %b : i32) {
  %0 = arith.addi %b, %a : i32
  return %0
}
""")

widths = st.sampled_from([1, 2, 7, 8, 16, 31, 32, 33, 63, 64, 65, 96, 128])


def _lane(w, x):
    return np.array([x], dtype=dtype_for(w))


class TestSemantics:
    """The scalar folding semantics and the vectorised oracle must agree."""

    @given(widths, st.sampled_from(BINARY_OPS), st.data())
    def test_binary(self, w, op, data):
        a = data.draw(st.integers(0, (1 << w) - 1))
        b = data.draw(st.one_of(st.integers(0, (1 << w) - 1), st.integers(0, w + 2)))
        b &= (1 << w) - 1
        got = int(binary(op, _lane(w, a), _lane(w, b), w)[0])
        assert got == semantics.binary(op, a, b, w)

    @given(widths, widths, st.sampled_from(["extsi", "extui", "trunci"]), st.data())
    def test_cast(self, w1, w2, op, data):
        lo, hi = sorted((w1, w2))
        if op == "trunci":
            w_from, w_to = hi, lo
        else:
            w_from, w_to = lo, hi
        x = data.draw(st.integers(0, (1 << w_from) - 1))
        got = int(cast(op, _lane(w_from, x), w_from, w_to)[0])
        assert got == semantics.cast(op, x, w_from, w_to)

    @given(widths, st.sampled_from(CMP_PREDICATES), st.data())
    def test_compare(self, w, pred, data):
        a = data.draw(st.integers(0, (1 << w) - 1))
        b = data.draw(st.integers(0, (1 << w) - 1))
        assert int(compare(pred, _lane(w, a), _lane(w, b), w)[0]) == semantics.compare(pred, a, b, w)

    def test_shift_edge_cases(self):
        assert semantics.binary("shli", 1, 8, 8) == 0
        assert semantics.binary("shrui", 0x80, 9, 8) == 0
        assert semantics.binary("shrsi", 0x80, 200, 8) == 0xFF
        assert semantics.cast("extsi", 0x80, 8, 16) == 0xFF80

    def test_evaluate_signed_results(self):
        assert evaluate(ADD, {"a": 100, "b": 100}) == -56
        assert evaluate(ADD, {"a": 100, "b": 100}, signed=False) == 200

    def test_evaluate_missing_arg(self):
        with pytest.raises(ValueError):
            evaluate(ADD, {"a": 1})

    def test_evaluate_memref_and_loop(self):
        f = _fn("""func @k__r(%m : memref<4xi8>) {
  %0 = arith.constant 0 : i8
  %1 = scf.for %2 = 0 to 4 step 1 iter_args(%3 = %0) -> i8 {
    %4 = memref.load %m[%2] : i8
    %5 = arith.addi %3, %4 : i8
    scf.yield %5
  }
  return %1
}
""")
        assert evaluate(f, {"m": [1, 2, 3, -4]}) == 2

    def test_evaluate_store_returns_memref(self):
        f = _fn("""func @k__r(%m : memref<2xi8>, %x : i8) {
  %0 = memref.store %x, %m[1] : memref<2xi8>
  return %0
}
""")
        assert evaluate(f, {"m": [5, 6], "x": -1}) == [5, -1]

    def test_wide_values(self):
        f = _fn("""func @k__r(%a : i128) {
  %0 = arith.constant 1 : i128
  %1 = arith.addi %a, %0 : i128
  return %1
}
""")
        assert evaluate(f, {"a": (1 << 127) - 1}) == -(1 << 127)


class TestEquivalence:
    def test_exhaustive_equivalent(self):
        r = check_equivalence(ADD, ADD_SWAPPED)
        assert (r.verdict, r.strategy, r.samples) == ("equivalent", "exhaustive", 1 << 16)
        assert r.ok

    def test_exhaustive_counterexample(self):
        r = check_equivalence(ADD, SUB)
        assert r.verdict == "counterexample" and not r.ok
        env = r.env
        assert r.out_left == evaluate(ADD, env)
        assert r.out_right == evaluate(SUB, env)
        assert r.out_left != r.out_right

    def test_sampled(self):
        r = check_equivalence(WIDE, WIDE_SWAPPED)
        assert r.verdict == "domain_too_large_sampled" and r.ok
        assert r.samples == 10_000 and r.seed == 0

    def test_budget(self):
        r = check_equivalence(ADD, ADD_SWAPPED, budget=Budget(exhaustive_bits=8, samples=500))
        assert r.strategy == "random" and r.samples == 500

    def test_pinned_domain(self):
        r = check_equivalence(WIDE, WIDE_SWAPPED, pinned={"a": 3, "b": 4})
        assert r.strategy == "exhaustive" and r.samples == 1
        assert "pinned.a = 3" in r.to_text()

    def test_pins_hide_difference(self):
        r = check_equivalence(ADD, SUB, pinned={"b": 0})
        assert r.verdict == "equivalent"

    def test_signature_mismatch(self):
        with pytest.raises(SignatureMismatch):
            check_equivalence(ADD, WIDE)

    def test_seed_determinism(self):
        f = random_function(7)
        g = random_function(8)
        if [(a.name, a.type) for a in f.args] != [(a.name, a.type) for a in g.args]:
            g = f
        a = check_equivalence(f, g, budget=Budget(exhaustive_bits=0, seed=5))
        b = check_equivalence(f, g, budget=Budget(exhaustive_bits=0, seed=5))
        assert a.to_text() == b.to_text()

    def test_report_text(self):
        text = check_equivalence(ADD, SUB).to_text()
        assert "verdict = counterexample" in text
        assert "env.a = " in text and "out_left = " in text

    @given(st.integers(0, 5000))
    def test_self_equivalence(self, seed):
        f = random_function(seed)
        assert check_equivalence(f, f, budget=Budget(samples=256)).ok

    def test_boundary_sampling_finds_all_zero_memref(self):
        # differs only when every element is zero, which needs joint boundary lanes
        f = _fn("""func @k__r(%m : memref<4xi32>) {
  %0 = memref.load %m[0] : i32
  %1 = memref.load %m[1] : i32
  %2 = memref.load %m[2] : i32
  %3 = memref.load %m[3] : i32
  %4 = arith.ori %0, %1 : i32
  %5 = arith.ori %4, %2 : i32
  %6 = arith.ori %5, %3 : i32
  return %6
}
""")
        g = _fn("""func @k__r(%m : memref<4xi32>) {
  %0 = memref.load %m[0] : i32
  %1 = memref.load %m[1] : i32
  %2 = memref.load %m[2] : i32
  %3 = memref.load %m[3] : i32
  %4 = arith.ori %0, %1 : i32
  %5 = arith.ori %4, %2 : i32
  %6 = arith.ori %5, %3 : i32
  %7 = arith.constant 1 : i32
  %8 = arith.constant 0 : i32
  %9 = arith.cmpi eq, %6, %8 : i1
  %10 = arith.select %9, %7, %6 : i32
  return %10
}
""")
        assert check_equivalence(f, g).verdict == "counterexample"


class TestDescriptorPins:
    def test_pe_pins(self):
        m, _ = generate(DesignSpec("pe"))
        f = m.functions[0]
        pins = pins_from_descriptor(f, m.descriptor(f.instruction))
        assert pins
        assert all(f.arg(k) is not None for k in pins)

    def test_no_descriptor(self):
        assert pins_from_descriptor(ADD, None) == {}


class TestSmt:
    def test_text_shape(self):
        text = emit_smt(ADD, SUB)
        lines = text.splitlines()
        assert lines[0] == "(set-logic QF_ABV)"
        assert lines[-2:] == ["(check-sat)", "(exit)"]
        assert "(declare-const a (_ BitVec 8))" in text or "(declare-const |a| (_ BitVec 8))" in text

    def test_memref_pins(self):
        f = _fn("""func @k__r(%m : memref<2xi8>) {
  %0 = memref.load %m[1] : i8
  return %0
}
""")
        assert "(select" in emit_smt(f, f, pinned={"m": [1, 2]})

    @pytest.mark.parametrize("left,right,expect", [
        (ADD, ADD_SWAPPED, "unsat"), (ADD, SUB, "sat"), (WIDE, WIDE_SWAPPED, "unsat")])
    def test_solver_agrees(self, left, right, expect):
        z3 = pytest.importorskip("z3")
        s = z3.Solver()
        s.from_string(emit_smt(left, right))
        assert str(s.check()) == expect

    def test_solver_on_corpus_pair(self):
        z3 = pytest.importorskip("z3")
        from tensorlift.passes import run_pipeline

        m, _ = generate(DesignSpec("mac_chain", {"n": 2}))
        f = m.functions[0]
        g = run_pipeline(m, ["canon-bitmanip"]).module.functions[0]
        s = z3.Solver()
        s.from_string(emit_smt(f, g))
        assert str(s.check()) == "unsat"
