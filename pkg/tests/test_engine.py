import random

import pytest

from statreason.baselines import ConstantResolver, ConstantBaselineParams, OracleResolver
from statreason.engine import (
    EngineConfig,
    EngineError,
    do_operation,
    evaluate_run,
    insert_values,
    instantiate_full,
    instantiate_single,
    run_cases,
)
from statreason.model import ArgumentLayer, Case, Money, Span, TRUTH_KEY, ValueMap

from generators import random_value_map


def make_layer(text, mentions):
    """mentions: list of (name, phrase) pairs; each phrase occurs once."""
    located = []
    for name, phrase in mentions:
        start = text.find(phrase)
        assert start >= 0, phrase
        located.append((Span(start, start + len(phrase)), name))
    located.sort(key=lambda x: x[0].start)
    spans = tuple(s for s, _ in located)
    names, clusters = [], []
    for i, (_, name) in enumerate(located):
        if name in names:
            clusters[names.index(name)] += (i,)
        else:
            names.append(name)
            clusters.append((i,))
    return ArgumentLayer("§x", spans, tuple(clusters), tuple(names))


SURVIVOR_TEXT = (
    "(A) a taxpayer spouse died during either of the two years immediately"
    " preceding the taxable year"
)


class TestInsertValues:
    def test_grounds_the_surviving_spouse_clause(self):
        layer = make_layer(
            SURVIVOR_TEXT, [("taxpayer", "a taxpayer"), ("taxable year", "the taxable year")]
        )
        grounded = insert_values(
            SURVIVOR_TEXT, layer, ValueMap({"taxpayer": "Alice", "taxable year": "2017"})
        )
        assert grounded == (
            "(A) Alice spouse died during either of the two years immediately preceding 2017"
        )

    def test_empty_map_leaves_text_unchanged(self):
        layer = make_layer(SURVIVOR_TEXT, [("taxpayer", "a taxpayer")])
        assert insert_values(SURVIVOR_TEXT, layer, ValueMap()) == SURVIVOR_TEXT

    def test_all_mentions_of_a_coreferent_argument_replaced(self):
        text = "the employee works when the employee is told"
        layer = ArgumentLayer(
            "§x", (Span(0, 12), Span(24, 36)), ((0, 1),), ("Employee",)
        )
        grounded = insert_values(text, layer, ValueMap({"Employee": "Bob"}))
        assert grounded == "Bob works when Bob is told"

    def test_text_outside_spans_untouched_and_idempotent(self):
        rng = random.Random(5)
        words = ["alpha", "beta", "gamma", "delta", "epsilon"]
        for _ in range(50):
            text = " ".join(rng.choice(words) for _ in range(12))
            # pick two non-overlapping word spans
            i = text.index(" ", 10)
            j = text.rindex(" ")
            if i >= j - 1:
                continue
            layer = ArgumentLayer("§x", (Span(0, i), Span(j + 1, len(text))), ((0,), (1,)),
                                  ("A", "B"))
            values = ValueMap({"A": "X", "B": "Y"})
            once = insert_values(text, layer, values)
            assert once == "X" + text[i:j + 1] + "Y"
            again_layer = ArgumentLayer("§x", (Span(0, 1), Span(len(once) - 1, len(once))),
                                        ((0,), (1,)), ("A", "B"))
            assert insert_values(once, again_layer, values) == once


def oracle_case(cid, query, inputs, expected):
    return Case(cid, "description", query, ValueMap(inputs), ValueMap(expected), "test")


class TestInstantiateSingle:
    def test_all_arguments_in_inputs_skips_the_loop(self):
        layer = make_layer(SURVIVOR_TEXT, [("Taxp", "a taxpayer"), ("Taxy", "the taxable year")])
        case = oracle_case("x", "§x", {"Taxp": "Alice", "Taxy": "2017"}, {"@truth": 1.0})
        calls = []

        class Spy:
            def resolve(self, request):
                calls.append(request.required)
                return ValueMap({TRUTH_KEY: 1.0})

        result = instantiate_single(Spy(), layer, case.inputs, SURVIVOR_TEXT, case)
        assert calls == [()]
        assert dict(result) == {"Taxp": "Alice", "Taxy": "2017", TRUTH_KEY: 1.0}

    def test_oracle_on_negative_case(self, corpus):
        case = next(c for c in corpus.cases if c.id == "63(c)(5)-negative")
        layer = corpus.layers[case.query]
        text = corpus.subsections[case.query].text
        result = instantiate_single(OracleResolver(), layer, case.inputs, text, case)
        assert result[TRUTH_KEY] == 0.0
        assert all(result[k] == v for k, v in case.inputs.items())

    def test_oracle_on_positive_case_predicts_gold(self, corpus):
        case = next(c for c in corpus.cases if c.id == "3306(a)(1)(B)-positive")
        layer = corpus.layers[case.query]
        text = corpus.subsections[case.query].text
        result = instantiate_single(OracleResolver(), layer, case.inputs, text, case)
        assert result["Employee"] == "Bob"
        assert result["Employment"] == "has employed"
        assert result[TRUTH_KEY] == 1.0

    def test_arguments_resolved_in_mention_order(self, corpus):
        case = next(c for c in corpus.cases if c.id == "3306(a)(1)(B)-positive")
        layer = corpus.layers[case.query]
        text = corpus.subsections[case.query].text
        seen = []

        class Spy:
            def resolve(self, request):
                seen.extend(request.required)
                return ValueMap()

        instantiate_single(Spy(), layer, case.inputs, text, case)
        assert seen == ["Workday", "Preccaly", "S13A", "Employee", "Employment", "S16"]

    def test_resolver_failure_names_argument(self, corpus):
        case = next(c for c in corpus.cases if c.id == "3306(a)(1)(B)-positive")
        layer = corpus.layers[case.query]

        class Boom:
            def resolve(self, request):
                raise RuntimeError("nope")

        with pytest.raises(EngineError) as exc:
            instantiate_single(Boom(), layer, case.inputs, "text", case)
        assert "Workday" in str(exc.value)

    def test_teacher_forcing_grounds_gold_values(self, corpus):
        case = next(c for c in corpus.cases if c.id == "3306(a)(1)(B)-positive")
        layer = corpus.layers[case.query]
        text = corpus.subsections[case.query].text
        grounded_seen = {}

        class Wrong:
            def resolve(self, request):
                if request.required:
                    grounded_seen[request.required[0]] = request.text
                    return ValueMap({request.required[0]: "WRONG"})
                return ValueMap({TRUTH_KEY: 1.0})

        config = EngineConfig(insert_gold=True)
        result = instantiate_single(Wrong(), layer, case.inputs, text, case, config)
        # Predictions stay the resolver's own, but later groundings carry gold.
        assert result["Employee"] == "WRONG"
        assert "has employed" in grounded_seen["S16"]  # gold Employment, not WRONG
        assert "WRONG" not in grounded_seen["S16"].split("Preccaly")[0][:40]


class TestDoOperation:
    def test_not_negates(self):
        assert dict(do_operation("NOT", [ValueMap({TRUTH_KEY: 0.0})])) == {TRUTH_KEY: 1.0}

    def test_not_drops_child_values(self):
        out = do_operation("NOT", [ValueMap({TRUTH_KEY: 0.25, "X": "a"})])
        assert dict(out) == {TRUTH_KEY: 0.75}

    def test_or_adopts_highest_truth_child(self):
        out = do_operation(
            "OR",
            [ValueMap({TRUTH_KEY: 0.3, "X": "a"}), ValueMap({TRUTH_KEY: 0.8, "X": "b"})],
        )
        assert dict(out) == {TRUTH_KEY: 0.8, "X": "b"}

    def test_and_conflict_keeps_lower_truth_value(self):
        out = do_operation(
            "AND",
            [ValueMap({TRUTH_KEY: 0.9, "X": "a"}), ValueMap({TRUTH_KEY: 0.4, "X": "b"})],
        )
        assert dict(out) == {TRUTH_KEY: 0.4, "X": "b"}

    def test_and_pools_disjoint_values(self):
        out = do_operation(
            "AND",
            [ValueMap({TRUTH_KEY: 0.9, "X": "a"}), ValueMap({TRUTH_KEY: 0.4, "Y": "b"})],
        )
        assert dict(out) == {"X": "a", "Y": "b", TRUTH_KEY: 0.4}

    def test_arity_enforced(self):
        with pytest.raises(EngineError):
            do_operation("NOT", [ValueMap(), ValueMap()])
        with pytest.raises(EngineError):
            do_operation("AND", [ValueMap()])

    def test_property_suite(self):
        rng = random.Random(17)
        for _ in range(2000):
            children = [random_value_map(rng) for _ in range(rng.randrange(2, 4))]
            truths = [c[TRUTH_KEY] for c in children]
            or_result = do_operation("OR", children)
            assert or_result[TRUTH_KEY] == max(truths)
            winner = children[truths.index(max(truths))]
            assert dict(or_result) == dict(winner)
            and_result = do_operation("AND", children)
            assert and_result[TRUTH_KEY] == min(truths)
            not_not = do_operation("NOT", [do_operation("NOT", [children[0]])])
            assert not_not[TRUTH_KEY] == pytest.approx(truths[0])


class TestInstantiateFull:
    def test_bodiless_rule_equals_single(self, corpus):
        case = next(c for c in corpus.cases if c.id == "3306(a)(1)(B)-negative")
        texts = {s.id: s.text for s in corpus.subsections.values()}
        # §3306(a)(1)(B) has a body; cap 1 must reduce to the single-subsection run.
        capped = instantiate_full(
            OracleResolver(), corpus.program, corpus.layers, texts, case, EngineConfig(depth_cap=1)
        )
        single = instantiate_single(
            OracleResolver(),
            corpus.layers[case.query],
            case.inputs,
            texts[case.query],
            case,
        )
        assert dict(capped) == dict(single)

    def test_no_structure_flag_matches_cap_one(self, corpus):
        case = next(c for c in corpus.cases if c.id == "63(c)(5)-negative")
        texts = {s.id: s.text for s in corpus.subsections.values()}
        flagged = instantiate_full(
            OracleResolver(), corpus.program, corpus.layers, texts, case,
            EngineConfig(depth_cap=3, use_structure=False),
        )
        capped = instantiate_full(
            OracleResolver(), corpus.program, corpus.layers, texts, case,
            EngineConfig(depth_cap=1),
        )
        assert dict(flagged) == dict(capped)

    def test_surviving_spouse_case_over_tree(self, corpus):
        case = next(c for c in corpus.cases if c.id == "2(a)(1)-positive")
        texts = {s.id: s.text for s in corpus.subsections.values()}
        result = instantiate_full(OracleResolver(), corpus.program, corpus.layers, texts, case)
        assert result[TRUTH_KEY] == 1.0

    def test_unknown_query_rejected(self, corpus):
        case = oracle_case("x", "§nowhere", {}, {"@truth": 1.0})
        with pytest.raises(EngineError):
            instantiate_full(OracleResolver(), corpus.program, corpus.layers, {}, case)

    def test_child_values_flow_back_through_bindings(self, corpus):
        # A scripted resolver fills Grossinc at §63(c)(5)(B); the root then
        # sees it through the (Grossinc, Grossinc) binding and keeps it.
        case = next(c for c in corpus.cases if c.id == "63(c)(5)-negative")
        texts = {s.id: s.text for s in corpus.subsections.values()}

        class Scripted:
            def resolve(self, request):
                if request.subsection_id == "§63(c)(5)(B)" and request.required == ("Grossinc",):
                    return ValueMap({"Grossinc": Money(3200)})
                if request.required:
                    return ValueMap()
                return ValueMap({TRUTH_KEY: 0.5})

        result = instantiate_full(Scripted(), corpus.program, corpus.layers, texts, case)
        assert result["Grossinc"] == Money(3200)

    def test_determinism(self, corpus):
        config = EngineConfig()
        first, _ = run_cases(OracleResolver(), corpus, "all", config)
        second, _ = run_cases(OracleResolver(), corpus, "all", config)
        assert [(r.case.id, dict(r.predicted)) for r in first] == [
            (r.case.id, dict(r.predicted)) for r in second
        ]

    def test_parallel_jobs_match_serial(self, corpus):
        serial, _ = run_cases(OracleResolver(), corpus, "all", EngineConfig(), jobs=1)
        parallel, _ = run_cases(OracleResolver(), corpus, "all", EngineConfig(), jobs=4)
        assert [(r.case.id, dict(r.predicted)) for r in serial] == [
            (r.case.id, dict(r.predicted)) for r in parallel
        ]


class TestEngineInvariants:
    def test_output_shape_for_every_resolver(self, corpus):
        from statreason.baselines import (
            ConstantResolver as CR,
            HeuristicResolver,
            fit_constant_baseline,
        )

        params = fit_constant_baseline(list(corpus.cases_of("train")))
        texts = {s.id: s.text for s in corpus.subsections.values()}
        for resolver in (OracleResolver(), CR(params), HeuristicResolver()):
            for case in corpus.cases:
                result = instantiate_full(
                    resolver, corpus.program, corpus.layers, texts, case
                )
                assert TRUTH_KEY in result
                allowed = set(corpus.program.get(case.query).params)
                allowed |= set(case.inputs) | {TRUTH_KEY}
                assert set(result) <= allowed


class TestEvaluateRun:
    def test_oracle_scores_everything(self, corpus):
        _, report = evaluate_run(OracleResolver(), corpus, "all")
        assert report.unified.accuracy == 1.0
        assert report.truth.accuracy == 1.0
        assert report.dollar.accuracy == 1.0
        assert report.string.accuracy == 1.0

    def test_empty_split_empty_report(self, corpus):
        results, report = evaluate_run(OracleResolver(), corpus, "nope")
        assert results == []
        assert report.unified.n == 0

    def test_errors_recorded_run_continues(self, corpus):
        class Boom:
            def resolve(self, request):
                if request.case.id == "tax-case-4":
                    raise RuntimeError("bad case")
                if request.required:
                    return ValueMap()
                return ValueMap({TRUTH_KEY: 1.0})

        results, report = evaluate_run(Boom(), corpus, "test")
        assert len(results) == 5
        assert len(report.errors) == 1
        assert "tax-case-4" in report.errors[0]

    def test_constant_resolver_ignores_structure(self, corpus):
        params = ConstantBaselineParams(1.0, 42000, "Bob")
        with_structure = evaluate_run(ConstantResolver(params), corpus, "test")[1]
        without = evaluate_run(
            ConstantResolver(params), corpus, "test", EngineConfig(use_structure=False)
        )[1]
        assert with_structure.flat() == without.flat()
