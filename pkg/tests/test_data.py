import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wealthshare.data import (
    RichList,
    SurveyTable,
    WeightedSample,
    average_implicates,
    combine_survey_richlist,
    load_richlist_csv,
    load_survey,
    load_weighted_csv,
    tail_view,
    write_richlist_csv,
    write_weighted_csv,
)
from wealthshare.errors import (
    AlignmentError,
    ConfigurationError,
    EmptyTailError,
    ParseError,
    ValidationError,
)
from wealthshare.estimators import alpha_ml


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_duplicates_merge_on_load(tmp_path):
    f = _write(tmp_path / "s.csv", "wealth,weight\n5,2\n3,1\n5,1\n")
    s = load_weighted_csv(f)
    assert list(s.values) == [3.0, 5.0]
    assert list(s.weights) == [1.0, 3.0]
    assert s.total_weight == 4.0


def test_missing_weight_column_defaults_to_one(tmp_path):
    s = load_weighted_csv(_write(tmp_path / "s.csv", "wealth\n10\n"))
    assert list(s.values) == [10.0] and list(s.weights) == [1.0] and s.total_weight == 1.0


def test_round_trip_1000_rows(tmp_path, rng):
    s = WeightedSample(rng.lognormal(11, 1.5, 1000), rng.uniform(0.5, 900, 1000))
    write_weighted_csv(s, tmp_path / "rt.csv")
    back = load_weighted_csv(tmp_path / "rt.csv")
    np.testing.assert_array_equal(back.values, s.values)
    np.testing.assert_array_equal(back.weights, s.weights)


def test_parse_errors_carry_line_number(tmp_path):
    with pytest.raises(ParseError) as e:
        load_weighted_csv(_write(tmp_path / "bad.csv", "wealth,weight\n1,1\nabc,2\n"))
    assert e.value.line == 3
    with pytest.raises(ValidationError):
        load_weighted_csv(_write(tmp_path / "neg.csv", "wealth,weight\n1,0\n"))
    with pytest.raises(ValidationError):
        load_weighted_csv(_write(tmp_path / "empty.csv", "wealth,weight\n"))


def test_constant_and_mean_implicates():
    ids = ("a", "b")
    tables = [SurveyTable(ids, np.array([1.0, float(k)]), np.array([3.0, 7.0])) for k in range(1, 6)]
    imp = average_implicates(tables)
    avg = dict(zip(imp.averaged.values, imp.averaged.weights))
    assert avg == {1.0: 3.0, 3.0: 7.0}
    assert all(s.total_weight == 10.0 for s in imp.implicates)


def test_average_matches_row_means(rng):
    ids = tuple(f"h{k}" for k in range(100))
    w = rng.lognormal(10, 1, (5, 100))
    n = rng.uniform(1, 50, 100)
    imp = average_implicates([SurveyTable(ids, w[m], n) for m in range(5)])
    oracle = WeightedSample(w.sum(axis=0) / 5.0, n)
    np.testing.assert_allclose(imp.averaged.values, oracle.values, rtol=1e-15)
    np.testing.assert_allclose(imp.averaged.weights, oracle.weights, rtol=1e-15)
    assert imp.averaged.total_weight == pytest.approx(imp.implicates[0].total_weight, rel=1e-12)


def test_misaligned_implicates_rejected():
    a = SurveyTable(("x", "y"), np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    b = SurveyTable(("x", "z"), np.array([1.0, 2.0]), np.array([1.0, 1.0]))
    with pytest.raises(AlignmentError):
        average_implicates([a, b])
    c = SurveyTable(("x", "y"), np.array([1.0, 2.0]), np.array([1.0, 2.0]))
    with pytest.raises(AlignmentError):
        average_implicates([a, c])


def test_survey_file_with_implicates(tmp_path):
    rows = ["household,implicate,wealth,weight"]
    for m in range(1, 6):
        rows += [f"a,{m},{m},2", f"b,{m},10,3"]
    imp = load_survey(_write(tmp_path / "s.csv", "\n".join(rows) + "\n"))
    assert len(imp) == 5
    assert [lab for lab, _ in imp.variants()] == ["1", "2", "3", "4", "5", "avg"]
    assert list(imp.averaged.values) == [3.0, 10.0]


def test_tail_view_counts(small_sample):
    t = tail_view(small_sample, 2.0)
    assert list(t.counts) == [2.0, 1.0]
    assert tail_view(small_sample, 1.0).n_min == small_sample.total_weight
    with pytest.raises(EmptyTailError):
        tail_view(small_sample, 3.5)


def test_tail_counts_brute_force(rng):
    v = rng.pareto(1.5, 400) + 1
    n = rng.uniform(0.1, 5, 400)
    s = WeightedSample(v, n)
    for w in rng.choice(s.values[:-1], 50):
        t = tail_view(s, w)
        for probe in rng.choice(t.values, 5):
            assert t.count(probe) == pytest.approx(n[v >= probe].sum(), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 40), st.integers(1, 6)), min_size=1, max_size=40))
def test_encoding_invariance_and_merge_total(rows):
    vals = [float(v) for v, _ in rows]
    wts = [float(k) for _, k in rows]
    agg = WeightedSample(vals, wts)
    rep = WeightedSample(np.repeat(vals, np.array(wts, dtype=int)))
    np.testing.assert_array_equal(agg.values, rep.values)
    np.testing.assert_array_equal(agg.tail_counts, rep.tail_counts)
    assert agg.total_weight == sum(wts)
    # non-increasing counts
    assert np.all(np.diff(agg.tail_counts) < 0)


def test_combine_concatenates():
    survey = tail_view(WeightedSample([1e6], [5.0]), 1e6)
    comb = combine_survey_richlist(survey, RichList([1e9], [2]))
    assert list(comb.values) == [1e6, 1e9] and list(comb.weights) == [5.0, 2.0]
    assert comb.gapped


def test_combine_overlap_rejected():
    survey = tail_view(WeightedSample([1e6, 3e9], [5.0, 1.0]), 1e6)
    with pytest.raises(ConfigurationError):
        combine_survey_richlist(survey, RichList([1e9], [2]))


def test_combine_encodings_give_same_ml():
    survey = tail_view(WeightedSample([1e6, 2e6, 4e6], [5.0, 3.0, 1.0]), 1e6)
    grouped = combine_survey_richlist(survey, RichList([1e9, 2e9], [3, 1]))
    single = combine_survey_richlist(survey, RichList([1e9, 1e9, 1e9, 2e9], [1, 1, 1, 1]))
    assert alpha_ml(tail_view(grouped, 1e6)).alpha == alpha_ml(tail_view(single, 1e6)).alpha


def test_richlist_thresholds_and_wmax(tmp_path):
    r = RichList([5e8, 9e8, 2e9], [4, 2, 1], w1_count=5e8, w1_scale=4.5e8)
    assert list(r.wealth) == [2e9, 9e8, 5e8]
    assert r.n_tilde == 7
    assert r.w_max_estimate() == 2e9 + 0.5 * (2e9 - 9e8)
    with pytest.raises(ValidationError):
        RichList([5e8], [1], w1_count=5e8, w1_scale=6e8)
    write_richlist_csv(r, tmp_path / "r.csv")
    back = load_richlist_csv(tmp_path / "r.csv", 5e8, 4.5e8)
    assert back.n_tilde == 7 and back.w1_scale == 4.5e8
