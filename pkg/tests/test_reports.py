import pytest

from statreason.baselines import (
    ConstantResolver,
    OracleResolver,
    fit_constant_baseline,
    single_mention_coref,
    string_match_coref,
)
from statreason.engine import evaluate_run
from statreason.reports import (
    argid_report,
    cascade_report,
    check_floors,
    coref_report,
    report_records,
)


def string_predictions(corpus):
    return {
        sid: string_match_coref(layer, corpus.subsections[sid].text)
        for sid, layer in corpus.layers.items()
    }


def single_predictions(corpus):
    return {sid: single_mention_coref(layer) for sid, layer in corpus.layers.items()}


class TestCorefReport:
    def test_gold_predictions_are_perfect(self, corpus):
        report = coref_report(corpus, {sid: l.clusters for sid, l in corpus.layers.items()}, "gold")
        assert report.exact_match.macro.as_tuple() == (1.0, 1.0, 1.0)
        assert report.perfectly_resolved == 1.0
        for value in report.standard.values():
            assert value.as_tuple() == (1.0, 1.0, 1.0)

    def test_string_matching_fixture_numbers(self, corpus):
        report = coref_report(corpus, string_predictions(corpus), "string")
        # 11 subsections have arguments; all but two resolve exactly.
        assert report.resolved_units == 11
        assert report.perfectly_resolved == pytest.approx(9 / 11)
        assert report.exact_match.macro.precision == pytest.approx(37 / 40)
        assert report.exact_match.macro.recall == pytest.approx(37 / 40)
        assert report.exact_match.avg.f1 == pytest.approx((9 + 0.8 + 0.8) / 11)
        assert report.standard["muc"].precision == pytest.approx(7 / 8)
        assert report.standard["muc"].recall == pytest.approx(7 / 8)
        assert report.standard["ceaf_m"].precision == pytest.approx(46 / 48)

    def test_single_mention_fixture_numbers(self, corpus):
        report = coref_report(corpus, single_predictions(corpus), "single")
        assert report.perfectly_resolved == pytest.approx(6 / 11)
        assert report.standard["muc"].as_tuple() == (0.0, 0.0, 0.0)
        # 34 singleton arguments of 40 align one mention each; 48 mentions total.
        assert report.standard["ceaf_m"].precision == pytest.approx(40 / 48)
        assert report.standard["blanc"].recall == pytest.approx(0.5)

    def test_zero_argument_subsections_excluded(self, corpus):
        report = coref_report(corpus, string_predictions(corpus), "string")
        assert report.exact_match.units == 11  # §63(c)(5)(A) is vacuous


class TestArgIdReport:
    def test_gold_spans_are_perfect(self, corpus):
        gold = {sid: layer.spans for sid, layer in corpus.layers.items()}
        report = argid_report(corpus, gold, "import")
        assert report.scores.macro.as_tuple() == (1.0, 1.0, 1.0)
        assert report.scores.avg.f1 == 1.0

    def test_empty_predictions_zero_recall(self, corpus):
        report = argid_report(corpus, {}, "import")
        assert report.scores.macro.recall == 0.0

    def test_heuristic_regression_snapshot(self, corpus):
        # Frozen pooled counts for the lexical spotter on the fixture corpus:
        # 39 of its 60 spans hit the 48 gold boundaries exactly.
        from statreason.baselines import heuristic_argument_id

        predicted = {
            sid: tuple(heuristic_argument_id(corpus.subsections[sid].text))
            for sid in corpus.layers
        }
        report = argid_report(corpus, predicted, "heuristic")
        assert report.scores.macro.precision == pytest.approx(39 / 60)
        assert report.scores.macro.recall == pytest.approx(39 / 48)


class TestCascadeReport:
    def test_gold_spans_match_coref_report(self, corpus):
        # A perfect first stage reduces the cascade to plain string matching.
        coref = coref_report(corpus, string_predictions(corpus), "string", standard=False)
        clusters_by_sid = {}
        for sid, layer in corpus.layers.items():
            partition = string_match_coref(layer, corpus.subsections[sid].text)
            clusters_by_sid[sid] = tuple(
                tuple((layer.spans[i].start, layer.spans[i].end) for i in c) for c in partition
            )
        cascade = cascade_report(corpus, clusters_by_sid, "gold-spans")
        assert cascade.exact_match.macro.as_tuple() == coref.exact_match.macro.as_tuple()
        assert cascade.perfectly_resolved == coref.perfectly_resolved

    def test_empty_spans_resolve_nothing(self, corpus):
        report = cascade_report(corpus, {}, "empty")
        assert report.perfectly_resolved == 0.0
        assert report.exact_match.macro.recall == 0.0


class TestInstantiationReport:
    def test_constant_baseline_fixture_numbers(self, corpus):
        params = fit_constant_baseline(list(corpus.cases_of("train")))
        _, report = evaluate_run(ConstantResolver(params), corpus, "test")
        assert report.truth.accuracy == pytest.approx(3 / 5)
        assert report.dollar == report.dollar.__class__(0.0, 1)
        assert report.string.n == 0
        assert report.unified.accuracy == pytest.approx(3 / 6)
        assert report.binary_cases.accuracy == pytest.approx(2 / 4)
        assert report.numerical_cases.accuracy == 0.0
        assert (report.pairs.identical, report.pairs.fully_correct, report.pairs.split) == (2, 0, 0)

    def test_oracle_pairs_fully_correct(self, corpus):
        _, report = evaluate_run(OracleResolver(), corpus, "all")
        assert report.pairs.identical == 0
        assert report.pairs.fully_correct == 3
        assert report.pairs.unpaired == ("tax-case-4", "tax-case-5")

    def test_render_mentions_every_family(self, corpus):
        _, report = evaluate_run(OracleResolver(), corpus, "test")
        text = report.render()
        for label in ("@truth", "dollar amount", "string", "unified", "binary", "numerical"):
            assert label in text


class TestFloors:
    def test_passing_floor(self):
        assert check_floors({"unified": 0.8}, {"unified": 0.5}) == []

    def test_failing_floor(self):
        failures = check_floors({"unified": 0.4}, {"unified": 0.5})
        assert failures and "unified" in failures[0]

    def test_unknown_metric(self):
        assert check_floors({}, {"nope": 0.1})

    def test_records_shape(self):
        text = report_records({"unified": 0.5}, '@run command="x"')
        lines = text.splitlines()
        assert lines[0].startswith("@run")
        assert lines[1] == "unified value=0.500000"
