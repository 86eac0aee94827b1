import copy

import pytest
from hypothesis import given, strategies as st

from tensorlift.corpus import (
    DesignSpec, check, generate, metric, random_function, standard_suite,
)
from tensorlift.ir import Module, parse_module, print_module, verify
from tensorlift.oracle import Budget, check_equivalence
from tensorlift.oracle.equiv import pins_from_descriptor
from tensorlift.passes import (
    FLAGS, PASSES, DescriptorError, PassError, UnknownPassError, canon_bitmanip, coordinate,
    detect_clamp, detect_mac, emit_taidl_metadata, fold_to_fixpoint, format_mac,
    lift_to_linalg, narrow_types, parse_mac, port_class, reconstruct_loops, resolve,
    run_pass, run_pipeline, specialize_control,
)


def _module(body):
    return parse_module("// tensorlift IR v1\n" + body)


def _fn(body):
    return _module(body).functions[0]


def _same(f, g, **kw):
    return check_equivalence(f, g, **kw).ok


def _entry(flag):
    return next(e for e in PASSES if e[1] == flag)


class TestCanonBitmanip:
    @pytest.mark.parametrize("seed", [0, 1])
    def test_pe_sign_extension(self, seed):
        f = generate(DesignSpec("pe", seed=seed))[0].functions[0]
        g, rep = run_pass(_entry("canon-bitmanip"), f, None)
        assert metric(g, "bitext_steps") == 0 and metric(g, "arith_ext") == 0
        assert metric(g, "extsi") >= 2
        assert rep.rewrites >= 2 and rep.ops_after < rep.ops_before
        assert _same(f, g)

    def test_partial_chain_left_alone(self):
        f = _fn("""func @k__r(%x : i4) {
  %0 = arith.extui %x : i8
  %1 = arith.constant 3 : i4
  %2 = arith.shrui %x, %1 : i4
  %3 = arith.trunci %2 : i1
  %4 = arith.constant 1 : i1
  %5 = arith.constant 0 : i1
  %6 = arith.select %3, %4, %5 : i1
  %7 = arith.extui %6 : i8
  %8 = arith.constant 4 : i8
  %9 = arith.shli %7, %8 : i8
  %10 = arith.ori %0, %9 : i8
  return %10
}
""")
        before = print_module(Module([], [f]))
        assert canon_bitmanip(f) == (0, 0)
        assert print_module(Module([], [f])) == before


class TestNarrowTypes:
    @pytest.mark.parametrize("body,expect_ops", [
        # trunci(extsi x) back to the width of x is x
        ("%0 = arith.extsi %x : i32\n  %1 = arith.trunci %0 : i8\n  return %1", 1),
        # to a narrower width truncates x directly
        ("%0 = arith.extsi %x : i32\n  %1 = arith.trunci %0 : i4\n  return %1", 2),
        # to a wider width re-extends x
        ("%0 = arith.extsi %x : i32\n  %1 = arith.trunci %0 : i16\n  return %1", 2),
        ("%0 = arith.trunci %x : i4\n  %1 = arith.trunci %0 : i2\n  return %1", 2),
        ("%0 = arith.extui %x : i16\n  %1 = arith.extsi %0 : i32\n  return %1", 2),
        ("%0 = arith.extsi %x : i16\n  %1 = arith.extsi %0 : i32\n  return %1", 2),
    ])
    def test_rewrites(self, body, expect_ops):
        f = _fn("func @k__r(%x : i8) {\n  " + body + "\n}\n")
        g, rep = run_pass(_entry("narrow-types"), f, None)
        assert rep.error is None and rep.rewrites == 1
        assert g.op_count() == expect_ops
        assert _same(f, g)

    @pytest.mark.parametrize("body", [
        "%0 = arith.trunci %x : i4\n  %1 = arith.extsi %0 : i8\n  return %1",
        "%0 = arith.extsi %x : i16\n  %1 = arith.extui %0 : i32\n  return %1",
    ])
    def test_kept(self, body):
        f = _fn("func @k__r(%x : i8) {\n  " + body + "\n}\n")
        assert narrow_types(f) == (0, 0)


MAC = """func @k__acc(%a : i8, %b : i8, %acc : i32) {
  %0 = arith.extsi %a : i32
  %1 = arith.extsi %b : i32
  %2 = arith.muli %0, %1 : i32
  %3 = arith.addi %acc, %2 : i32
  return %3
}
"""


class TestDetectMac:
    def test_annotates(self):
        f = _fn(MAC)
        assert detect_mac(f) == (0, 1)
        ann = parse_mac(f.body.ops[3].attrs["atlaas.mac"])
        assert ann == {"lhs": "a", "rhs": "b", "acc": "acc", "lhs_width": 8, "rhs_width": 8}

    def test_commuted_add(self):
        f = _fn(MAC.replace("arith.addi %acc, %2", "arith.addi %2, %acc"))
        detect_mac(f)
        assert parse_mac(f.body.ops[3].attrs["atlaas.mac"])["acc"] == "acc"

    def test_width_bound(self):
        f = _fn(MAC.replace("i8", "i48").replace("i32", "i128"))
        assert detect_mac(f) == (0, 0)

    def test_plain_add_is_not_mac(self):
        f = _fn(MAC.replace("arith.muli", "arith.addi"))
        assert detect_mac(f) == (0, 0)

    def test_format_round_trip(self):
        text = format_mac("x", "y", "z", 4, 8)
        assert text == "lhs=%x rhs=%y acc=%z lhs_width=4 rhs_width=8"
        assert parse_mac(text)["rhs_width"] == 8

    def test_idempotent(self):
        f = _fn(MAC)
        detect_mac(f)
        assert detect_mac(f) == (0, 0)


MODE = """descriptor "k" {
  controls: "mode" = [1]
}
func @k__r(%a : i8, %b : i8, %mode : i1) {
  %0 = arith.addi %a, %b : i8
  %1 = arith.subi %a, %b : i8
  %2 = arith.select %mode, %0, %1 : i8
  return %2
}
"""


class TestFold:
    def test_fixpoint(self):
        f = _fn("""func @k__r(%a : i8) {
  %0 = arith.constant 3 : i8
  %1 = arith.constant 4 : i8
  %2 = arith.muli %0, %1 : i8
  %3 = arith.constant 12 : i8
  %4 = arith.cmpi eq, %2, %3 : i1
  %5 = arith.select %4, %a, %0 : i8
  return %5
}
""")
        folds, branches, removed = fold_to_fixpoint(f)
        assert branches == 1 and folds >= 2
        assert f.op_count() == 1

    def test_if_inlined(self):
        f = _fn("""func @k__r(%a : i8) {
  %0 = arith.constant 0 : i1
  %1 = scf.if %0 -> i8 {
    %2 = arith.addi %a, %a : i8
    scf.yield %2
  } else {
    %3 = arith.subi %a, %a : i8
    scf.yield %3
  }
  return %1
}
""")
        g = copy.deepcopy(f)
        _, branches, _ = fold_to_fixpoint(g)
        assert branches == 1
        assert [op.opcode for op in g.body.ops] == ["subi", "return"]
        assert _same(f, g)

    def test_identical_arms(self):
        f = _fn("""func @k__r(%a : i8, %c : i1) {
  %0 = arith.select %c, %a, %a : i8
  return %0
}
""")
        assert fold_to_fixpoint(f)[1] == 1


class TestSpecializeControl:
    def test_scalar_control(self):
        m = _module(MODE)
        f, d = m.functions[0], m.descriptors[0]
        g, rep = run_pass(_entry("specialize-control"), f, d)
        assert rep.error is None
        assert metric(g, "selects_on:mode") == 0 and metric(g, "refs:mode") == 0
        assert g.attrs["atlaas.dead_mode"] == 1
        assert _same(f, g, pinned=pins_from_descriptor(f, d))

    def test_no_descriptor(self):
        f = _fn(MODE.split("}\n", 1)[1])
        assert specialize_control(f, None) == (0, 0)

    def test_binding_mismatch_is_recorded(self):
        m = _module(MODE.replace("[1]", "[1, 0]"))
        f, d = m.functions[0], m.descriptors[0]
        with pytest.raises(PassError):
            specialize_control(f, d)
        g, rep = run_pass(_entry("specialize-control"), f, d)
        assert g is f and rep.error and rep.ops_after == rep.ops_before

    def test_unknown_control_rejected(self):
        m = _module(MODE.replace('"mode" = [1]', '"nosuch" = [1]'))
        with pytest.raises(DescriptorError):
            run_pipeline(m)

    def test_pe_dataflow(self, pe_module):
        f, d = pe_module.functions[0], pe_module.descriptors[0]
        out = run_pipeline(pe_module, ["canon-bitmanip", "narrow-types", "detect-mac",
                                       "specialize-control"]).module.functions[0]
        assert metric(out, "selects_on:in_control_dataflow") == 0
        assert metric(out, "mac") == 1
        assert _same(f, out, pinned=pins_from_descriptor(f, d))


class TestDetectClamp:
    @pytest.mark.parametrize("lo,hi,expect", [
        (-128, 127, [-128, 127, 1, 8]), (0, 255, [0, 255, 0, 8]), (0, 15, [0, 15, 0, 4])])
    def test_select_clamp(self, lo, hi, expect):
        f = _fn(f"""func @k__r(%x : i32) {{
  %0 = arith.constant {hi} : i32
  %1 = arith.constant {lo} : i32
  %2 = arith.cmpi sgt, %x, %0 : i1
  %3 = arith.select %2, %0, %x : i32
  %4 = arith.cmpi slt, %x, %1 : i1
  %5 = arith.select %4, %1, %3 : i32
  return %5
}}
""")
        assert detect_clamp(f) == (0, 1)
        assert list(f.body.ops[5].attrs["atlaas.clamp"]) == expect

    def test_irregular_range(self):
        f = _fn("""func @k__r(%x : i32) {
  %0 = arith.constant 100 : i32
  %1 = arith.constant -3 : i32
  %2 = arith.cmpi sgt, %x, %0 : i1
  %3 = arith.select %2, %0, %x : i32
  %4 = arith.cmpi slt, %x, %1 : i1
  %5 = arith.select %4, %1, %3 : i32
  return %5
}
""")
        assert detect_clamp(f) == (0, 0)

    @pytest.mark.parametrize("ext,expect", [
        ("extsi", [-128, 127, 1, 8]), ("extui", [0, 255, 0, 8])])
    def test_wrap_clamp(self, ext, expect):
        f = _fn(f"""func @k__r(%x : i32) {{
  %0 = arith.trunci %x : i8
  %1 = arith.{ext} %0 : i32
  return %1
}}
""")
        detect_clamp(f)
        assert list(f.body.ops[1].attrs["atlaas.clamp"]) == expect


class TestLoops:
    @pytest.mark.parametrize("n", [2, 5, 16])
    def test_mac_chain_rolls(self, n):
        m, _ = generate(DesignSpec("mac_chain", {"n": n}))
        f = m.functions[0]
        out = run_pipeline(m).module.functions[0]
        assert (metric(out, "loops"), metric(out, "trip"), metric(out, "iter_args")) == (1, n, 1)
        assert metric(out, "linalg_op") == "dot_product"
        assert metric(out, "mac") == 1
        assert _same(f, out)

    def test_single_mac_does_not_roll(self):
        m, _ = generate(DesignSpec("mac_chain", {"n": 1}))
        out = run_pipeline(m).module.functions[0]
        assert metric(out, "loops") == 0 and metric(out, "mac") == 1

    def test_strided_chain_stays_unrolled(self):
        m, _ = generate(DesignSpec("mac_chain", {"n": 4, "stride": 2}))
        out = run_pipeline(m).module.functions[0]
        assert metric(out, "loops") == 0
        assert _same(m.functions[0], out)

    @pytest.mark.parametrize("window", [2, 4])
    def test_pool_rolls_to_max_reduce(self, window):
        m, _ = generate(DesignSpec("pool", {"window": window}))
        out = run_pipeline(m).module.functions[0]
        assert metric(out, "trip") == window
        assert metric(out, "linalg_op") == "max_reduce"
        assert _same(m.functions[0], out)

    def test_without_loops_linalg_is_noop(self):
        f = _fn(MAC)
        assert reconstruct_loops(f) == (0, 0)
        assert lift_to_linalg(f) == (0, 0)


class TestMetadata:
    def test_coordinate(self):
        assert coordinate("pe_3_5_acc") == (3, 5)
        assert coordinate("pe_3_5") == (3, 5)
        assert coordinate("acc") is None

    @pytest.mark.parametrize("name,cls", [
        ("dram_src", "dram_addr"), ("spad_in", "spad_addr"), ("pe_acc", "spad_addr"),
        ("in_a", "data")])
    def test_port_class(self, name, cls):
        assert port_class(name) == cls

    def test_roles_and_compute(self, lifted_pe):
        f = lifted_pe.functions[0]
        assert metric(f, "role:in_a") == "input"
        # dataflow mode overwrites the accumulator without reading it
        assert metric(f, "role:pe_acc") == "output"
        assert metric(f, "compute") == "dot_product"
        assert f.attrs["taidl.clamp"] == (-128, 127, 1, 8)

    def test_scalar_is_attribute(self):
        f = _fn(MAC)
        emit_taidl_metadata(f)
        assert f.arg("a").attrs["taidl.role"] == "attribute"
        assert f.attrs["taidl.compute"] == "opaque"

    def test_foreign_keys_dropped(self):
        f = _fn(MAC.replace(
            "%3 = arith.addi %acc, %2 : i32", '%3 = arith.addi %acc, %2 : i32 {vendor.note = "x"}'))
        removed, _ = emit_taidl_metadata(f)
        assert removed == 1
        assert not any("vendor.note" in op.attrs for op in f.walk())

    def test_relu(self):
        m, _ = generate(DesignSpec("pe", {"activation": 1}))
        out = run_pipeline(m).module.functions[0]
        assert out.attrs.get("taidl.activation") == "relu"

    def test_grid_coordinate_from_target(self):
        f = _fn(MAC.replace("@k__acc", "@k__pe_3_5_acc"))
        emit_taidl_metadata(f)
        assert f.attrs["taidl.coord"] == (3, 5)


class TestManager:
    def test_resolve(self):
        assert [c for c, _, _ in resolve(["D8", "canon-bitmanip", "B4"])] == ["A1", "B4", "D8"]
        assert len(resolve(None)) == 8 and len(FLAGS) == 8
        with pytest.raises(UnknownPassError):
            resolve(["nope"])

    def test_reports(self, lifted_corpus, corpus):
        m, _ = corpus
        assert len(lifted_corpus.reports) == 8 * len(m.functions)
        assert all(r.error is None for r in lifted_corpus.reports)
        line = lifted_corpus.reports[0].to_line()
        assert lifted_corpus.reports[0].name in line

    def test_corpus_expectations(self, lifted_corpus, corpus):
        from tensorlift.assembler import assemble, spec_facts

        _, ex = corpus
        facts = spec_facts(assemble(lifted_corpus.module).spec)
        assert check(ex, lifted_corpus.snapshots, facts) == []

    @pytest.mark.parametrize("spec", standard_suite(), ids=lambda s: s.label)
    def test_standard_expectations(self, spec):
        m, ex = generate(spec)
        res = run_pipeline(m, snapshots=True)
        non_assembly = type(ex)({k: v for k, v in ex.records.items() if k[1] != "assemble"})
        assert check(non_assembly, res.snapshots) == []

    def test_idempotent(self, lifted_corpus):
        once = print_module(lifted_corpus.module)
        twice = print_module(run_pipeline(lifted_corpus.module).module)
        assert once == twice

    def test_workers_match(self, corpus):
        m, _ = corpus
        assert print_module(run_pipeline(m, workers=2).module) == print_module(run_pipeline(m).module)

    def test_input_untouched(self, corpus):
        m, _ = corpus
        before = print_module(m)
        run_pipeline(m)
        assert print_module(m) == before

    @given(st.integers(0, 50_000))
    def test_fuzz_lifting_preserves_semantics(self, seed):
        f = random_function(seed)
        res = run_pipeline(Module([], [f]))
        g = res.module.functions[0]
        assert all(r.error is None for r in res.reports)
        assert verify(g) == []
        assert check_equivalence(f, g, budget=Budget(samples=512, seed=seed)).ok
