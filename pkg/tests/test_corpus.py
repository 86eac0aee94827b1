import pytest
from hypothesis import given, strategies as st

from tensorlift.corpus import (
    DEFAULTS, DesignError, DesignSpec, Expectations, generate, merge, metric, random_function,
    random_module, standard_suite,
)
from tensorlift.corpus.mutate import KINDS, Site, apply, choose, sites
from tensorlift.ir import print_module, verify
from tensorlift.oracle import check_equivalence


class TestDesigns:
    @pytest.mark.parametrize("kind", sorted(DEFAULTS))
    def test_every_kind_generates(self, kind):
        m, ex = generate(DesignSpec(kind))
        assert m.functions and ex.records
        assert all(verify(f) == [] for f in m.functions)

    def test_generation_is_pure(self):
        spec = DesignSpec("pe", {"W": 4}, seed=2)
        assert print_module(generate(spec)[0]) == print_module(generate(spec)[0])

    @pytest.mark.parametrize("spec,label", [
        (DesignSpec("pe"), "pe"),
        (DesignSpec("pe", seed=3), "pe_seed3"),
        (DesignSpec("mac_chain", {"n": 2}), "mac_chain_n2"),
        (DesignSpec("mac_chain", {"n": 16}), "mac_chain"),
        (DesignSpec("dma_copy", {"banks": 1}), "dma_copy_banks1"),
    ])
    def test_labels(self, spec, label):
        assert spec.label == label

    @pytest.mark.parametrize("spec", [
        DesignSpec("pe", {"W": 32, "V": 32}),
        DesignSpec("mac_chain", {"n": 0}),
        DesignSpec("dma_copy", {"banks": 4}),
        DesignSpec("pool", {"window": 1}),
        DesignSpec("pe", {"bogus": 1}),
        DesignSpec("nope"),
    ])
    def test_invalid(self, spec):
        with pytest.raises(DesignError):
            generate(spec)

    def test_pe_size_scales_with_width(self):
        small = generate(DesignSpec("pe", {"W": 4, "V": 16, "w": 4}))[0].functions[0]
        big = generate(DesignSpec("pe"))[0].functions[0]
        assert small.op_count() < big.op_count()

    def test_sign_extension_variants_agree(self):
        # seed bit 0 picks the sign-extension idiom only
        f0 = generate(DesignSpec("pe", seed=0))[0].functions[0]
        f1 = generate(DesignSpec("pe", seed=1))[0].functions[0]
        assert metric(f0, "bitext_steps") > 0 and metric(f0, "arith_ext") == 0
        assert metric(f1, "arith_ext") > 0
        assert check_equivalence(f0, f1).ok

    def test_merge_collision(self):
        m = generate(DesignSpec("pool"))[0]
        with pytest.raises(DesignError):
            merge([m, m])

    def test_full_corpus(self, corpus):
        m, ex = corpus
        kinds = {f.instruction for f in m.functions}
        assert len(kinds) >= 5
        assert len({f.name for f in m.functions}) == len(m.functions)
        assert ex.stages() >= {"input", "A1", "B4", "C6", "D8", "assemble"}

    def test_standard_suite_labels_unique(self):
        labels = [s.label for s in standard_suite()]
        assert len(labels) == len(set(labels))


class TestExpectations:
    def test_text_round_trip(self):
        _, ex = generate(DesignSpec("mac_chain"))
        assert Expectations.from_text(ex.to_text()).records == ex.records

    def test_bad_stage(self):
        with pytest.raises(ValueError):
            Expectations().add("f", "Z9", "ops", 1)

    def test_malformed_line(self):
        with pytest.raises(ValueError):
            Expectations.from_text("not an expectation\n")

    def test_unknown_metric(self):
        f = generate(DesignSpec("pool"))[0].functions[0]
        with pytest.raises(KeyError):
            metric(f, "frobs")


class TestFuzz:
    @given(st.integers(0, 100_000))
    def test_random_functions_verify(self, seed):
        assert verify(random_function(seed)) == []

    def test_deterministic(self):
        assert print_module(random_module(5, seed=4)) == print_module(random_module(5, seed=4))
        assert print_module(random_module(5, seed=4)) != print_module(random_module(5, seed=5))


@pytest.fixture(scope="module")
def mutation_functions():
    from tensorlift.corpus import mutation_corpus

    return mutation_corpus()


class TestMutation:
    def test_corpus_offers_every_kind(self, mutation_functions):
        kinds = {s.kind for f in mutation_functions for s in sites(f)}
        assert kinds == set(KINDS)

    def test_names_unique(self, mutation_functions):
        names = [f.name for f in mutation_functions]
        assert len(names) == len(set(names))

    def test_choose_is_seeded_and_balanced(self, mutation_functions):
        a = choose(mutation_functions, 20, 0)
        assert a == choose(mutation_functions, 20, 0)
        assert len(a) == len(set(a)) == 20
        counts = {k: sum(s.kind == k for s in a) for k in KINDS}
        assert all(counts[k] > 0 for k in KINDS)

    def test_choose_caps_at_available(self, mutation_functions):
        total = sum(len(sites(f)) for f in mutation_functions)
        assert len(choose(mutation_functions, total + 50, 1)) == total

    def test_apply_changes_one_op(self, mutation_functions):
        f = next(f for f in mutation_functions if any(s.kind == "swap-shrsi" for s in sites(f)))
        site = next(s for s in sites(f) if s.kind == "swap-shrsi")
        g = apply(f, site)
        before, after = list(f.walk()), list(g.walk())
        diff = [k for k, (x, y) in enumerate(zip(before, after)) if x != y]
        assert diff == [site.index]
        assert verify(g) == []

    def test_const_wraps(self):
        from tensorlift.ir import parse_module

        f = parse_module("""// tensorlift IR v1
func @k__r(%a : i8) {
  %0 = arith.constant 127 : i8
  %1 = arith.addi %a, %0 : i8
  return %1
}
""").functions[0]
        kinds = sorted(s.kind for s in sites(f))
        assert kinds == ["addi-subi", "const"]
        g = apply(f, Site(f.name, 0, "const"))
        assert g.body.ops[0].value == -128
        assert f.body.ops[0].value == 127
