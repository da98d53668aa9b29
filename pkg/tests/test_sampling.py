import math

import pytest
from hypothesis import given, settings, strategies as st

from sqlbootstrap import CanonicalPair, sample_uat, sampling_report


def make_pair(template: str, index: int, abstract: bool = False) -> CanonicalPair:
    bindings = {"v": f"value {index}"}
    if abstract:
        bindings["loc"] = "$loc"
    return CanonicalPair(
        utterance=f"{template} utterance {index}",
        sql=f'SELECT va.x FROM t AS va WHERE va.v = "value {index}"',
        template_id=template,
        sql_template='SELECT va.x FROM t AS va WHERE va.v = "{v}"',
        bindings=bindings,
        rule_trace=("r000",),
    )


def grouped_counts(selected):
    counts = {}
    for pair in selected:
        counts[pair.template_id] = counts.get(pair.template_id, 0) + 1
    return counts


def test_uniform_allocation_across_equal_templates():
    pairs = [make_pair(f"t{t}", i) for t in range(4) for i in range(25)]
    selected = sample_uat(pairs, 8, seed=1)
    assert grouped_counts(selected) == {"t0": 2, "t1": 2, "t2": 2, "t3": 2}


def test_round_robin_with_exhausted_template():
    # hand simulation: sizes 1 and 99, budget 10 -> 1 + 9
    pairs = [make_pair("small", 0)] + [make_pair("big", i) for i in range(99)]
    selected = sample_uat(pairs, 10, seed=3)
    assert grouped_counts(selected) == {"small": 1, "big": 9}


def test_fractional_budget_is_ceiling(maritime_pairs):
    selected = sample_uat(maritime_pairs, 0.1, seed=5)
    assert len(selected) == math.ceil(0.1 * len(maritime_pairs))
    counts = grouped_counts(selected)
    populations = grouped_counts(maritime_pairs)
    unexhausted = [c for t, c in counts.items() if c < populations[t]]
    if unexhausted:
        assert max(unexhausted) - min(unexhausted) <= 1


def test_every_template_represented_when_budget_allows(maritime_pairs):
    template_count = len({p.template_id for p in maritime_pairs})
    selected = sample_uat(maritime_pairs, template_count, seed=9)
    assert len({p.template_id for p in selected}) == template_count


def test_deterministic_under_seed(maritime_pairs):
    first = sample_uat(maritime_pairs, 0.1, seed=42)
    second = sample_uat(maritime_pairs, 0.1, seed=42)
    assert first == second


def test_distinct_seeds_permute_within_templates_only():
    pairs = [make_pair(f"t{t}", i) for t in range(5) for i in range(10)]
    a = sample_uat(pairs, 20, seed=1)
    b = sample_uat(pairs, 20, seed=2)
    assert grouped_counts(a) == grouped_counts(b)  # allocation is seed-free
    assert {p.utterance for p in a} != {p.utterance for p in b}


def test_larger_budget_is_superset_under_same_seed(maritime_pairs):
    small = {p.pair_id for p in sample_uat(maritime_pairs, 0.1, seed=11)}
    large = {p.pair_id for p in sample_uat(maritime_pairs, 0.2, seed=11)}
    assert small <= large


def test_output_subset_no_duplicates(maritime_pairs):
    selected = sample_uat(maritime_pairs, 0.15, seed=2)
    ids = [p.pair_id for p in selected]
    assert len(ids) == len(set(ids))
    pool = {p.pair_id for p in maritime_pairs}
    assert set(ids) <= pool


def test_budget_errors():
    pairs = [make_pair("t", i) for i in range(4)]
    with pytest.raises(ValueError):
        sample_uat(pairs, 0, seed=1)
    with pytest.raises(ValueError):
        sample_uat(pairs, 5, seed=1)
    with pytest.raises(ValueError):
        sample_uat(pairs, 1.5, seed=1)
    with pytest.raises(ValueError):
        sample_uat([], 1, seed=1)


def test_budget_one_point_zero_selects_everything():
    pairs = [make_pair("t", i) for i in range(4)]
    assert len(sample_uat(pairs, 1.0, seed=1)) == 4


def test_report_counts_abstract_fraction():
    pairs = [make_pair("t", i, abstract=(i % 2 == 0)) for i in range(10)]
    report = sampling_report(pairs, population=40)
    assert report.population == 40
    assert report.selected == 10
    assert report.template_count == 1
    assert report.abstract_fraction == 0.5


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(min_value=1, max_value=8), min_size=1, max_size=6),
    st.integers(min_value=1, max_value=40),
    st.integers(min_value=0, max_value=999),
)
def test_fairness_property(sizes, budget, seed):
    pairs = [make_pair(f"t{t}", i) for t, size in enumerate(sizes) for i in range(size)]
    if budget > len(pairs):
        budget = len(pairs)
    selected = sample_uat(pairs, budget, seed=seed)
    assert len(selected) == budget
    counts = grouped_counts(selected)
    populations = {f"t{t}": size for t, size in enumerate(sizes)}
    unexhausted = [counts.get(t, 0) for t in populations if counts.get(t, 0) < populations[t]]
    if unexhausted:
        assert max(unexhausted) - min(unexhausted) <= 1
