import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import W3, W5
from fraccite.citations import CitationWindow, resolve_citations
from fraccite.metrics import impact_table, paper_distributions, per_paper_scores
from fraccite.synthetic import (
    FieldProfile,
    RefCountDistribution,
    SyntheticSpec,
    expected_metrics,
    generate,
    realize_aggregates,
)
from fraccite.units import assign_units, parse_units

CONST = RefCountDistribution.constant


def spec(*fields, n=20, seed=0, years=W5):
    return SyntheticSpec(tuple(fields), papers_per_unit=n, citing_year_range=years, seed=seed)


def measured(corpus, window=W5):
    links = resolve_citations(corpus.cited, corpus.citing)
    members = corpus.members()
    return impact_table(members, links, [window]), per_paper_scores(links, list(corpus.labels), window)


def test_rate_zero_gives_empty_citing_corpus():
    corpus = generate(spec(FieldProfile("F", CONST(10), 0.0)))
    assert corpus.citing == [] and len(corpus.cited) == 20
    assert set(corpus.labels.values()) == {("F Unit", "F")}


def test_same_seed_is_byte_identical():
    s = spec(FieldProfile("F", RefCountDistribution.lognormal(25, 0.6), 2.0, half_life=3.0), seed=42)
    assert generate(s).to_canonical() == generate(s).to_canonical()
    assert generate(s).labels_tsv() == generate(s).labels_tsv()
    other = spec(FieldProfile("F", RefCountDistribution.lognormal(25, 0.6), 2.0, half_life=3.0), seed=43)
    assert generate(other).to_canonical() != generate(s).to_canonical()


def test_ref_counts_follow_field_distribution():
    corpus = generate(spec(FieldProfile("F", RefCountDistribution.choice([5, 10]), 3.0), n=50, seed=3))
    ks = [d.ref_count for d in corpus.citing]
    assert set(ks) == {5, 10}
    assert abs(ks.count(5) / len(ks) - 0.5) < 0.05


def test_invalid_specs_rejected():
    with pytest.raises(ValueError, match="infeasible"):
        spec(FieldProfile("F", CONST(3), 1.0, cited_refs_per_doc=5))
    with pytest.raises(ValueError):
        FieldProfile("F", CONST(3), -1.0)
    with pytest.raises(ValueError):
        FieldProfile("F", CONST(3), 1.0, half_life=0)
    with pytest.raises(ValueError):
        CONST(0)
    with pytest.raises(ValueError):
        RefCountDistribution.choice([])
    with pytest.raises(ValueError):
        SyntheticSpec((FieldProfile("F", CONST(3), 1.0),), citing_year_range=CitationWindow(2003, 2006))
    with pytest.raises(ValueError):
        spec(FieldProfile("F", CONST(3), 1.0), FieldProfile("F", CONST(4), 1.0))
    with pytest.raises(ValueError):
        spec(FieldProfile("F", CONST(3), 1.0), seed=-1)


def test_fc_ratio_follows_reference_length():
    ratios = []
    for seed in range(10):
        s = spec(FieldProfile("Short", CONST(10), 3.0), FieldProfile("Long", CONST(50), 3.0), n=100, seed=seed)
        table, _ = measured(generate(s))
        ratios.append(float(table.row("Short Unit", W5).fc_per_p / table.row("Long Unit", W5).fc_per_p))
    assert abs(np.mean(ratios) / 5.0 - 1.0) < 0.05


def test_packed_documents_cite_distinct_papers():
    s = spec(FieldProfile("F", CONST(12), 4.0, cited_refs_per_doc=3), n=30, seed=9)
    corpus = generate(s)
    for d in corpus.citing:
        assert len(set(d.cited_refs)) == len(d.cited_refs) <= 3
    table, _ = measured(corpus)
    e_ic, e_fc = expected_metrics(s, W5)["F"]
    assert e_fc == pytest.approx(e_ic / 12)
    assert table.row("F Unit", W5).fc_per_p == Fraction(table.row("F Unit", W5).ic_per_p) / 12


def test_expected_metrics_arithmetic():
    s = spec(FieldProfile("F", CONST(40), 1.0), FieldProfile("Z", CONST(7), 0.0))
    e = expected_metrics(s, W5)
    assert e["F"] == pytest.approx((5.0, 0.125))
    assert e["Z"] == (0.0, 0.0)
    assert RefCountDistribution.choice([5, 10]).mean_inverse() == pytest.approx(0.15)
    assert RefCountDistribution.uniform(5, 7).mean_inverse() == pytest.approx((1 / 5 + 1 / 6 + 1 / 7) / 3)
    decay = spec(FieldProfile("D", CONST(2), 1.0, half_life=1.0))
    assert expected_metrics(decay, W3)["D"][0] == pytest.approx(1 + 0.5 + 0.25)


def test_lognormal_mean_inverse_matches_sampling():
    dist = RefCountDistribution.lognormal(30, 0.7)
    ks = dist.sample(np.random.default_rng(1), 2_000_000)
    assert ks.min() >= 1
    assert dist.mean_inverse() == pytest.approx(np.mean(1.0 / ks), rel=2e-3)


def test_pipeline_within_three_standard_errors():
    s = spec(
        FieldProfile("Math", CONST(6), 0.8, half_life=8.0),
        FieldProfile("Eng", RefCountDistribution.uniform(10, 30), 2.0, half_life=3.0),
        FieldProfile("Bio", RefCountDistribution.lognormal(40, 0.5), 4.0, half_life=2.0),
        n=300, seed=11,
    )
    corpus = generate(s)
    members = corpus.members()
    for window in (W3, W5):
        _, scores = measured(corpus, window)
        expected = expected_metrics(s, window)
        for field, (e_ic, e_fc) in expected.items():
            unit = f"{field} Unit"
            for measure, target in (("ic", e_ic), ("fc", e_fc)):
                x = np.array(paper_distributions({unit: members[unit]}, scores, measure)[unit])
                se = x.std(ddof=1) / math.sqrt(len(x))
                assert abs(x.mean() - target) < 3 * se, (window, field, measure)


def test_rates_scaling_with_k_equalize_fc_not_ic():
    fields = [FieldProfile(name, CONST(k), k / 10, unit_names=(f"{name} Unit",))
              for name, k in (("Math", 6), ("Eng", 20), ("Bio", 40))]
    s = spec(*fields, n=400, seed=5)
    table, _ = measured(generate(s))
    fc = [float(table.row(f"{f.name} Unit", W5).fc_per_p) for f in fields]
    ic = [float(table.row(f"{f.name} Unit", W5).ic_per_p) for f in fields]
    assert max(fc) - min(fc) < 0.05 * np.mean(fc)
    assert max(ic) / min(ic) > 5


def test_long_half_life_is_more_window_sensitive():
    s = spec(FieldProfile("Fast", CONST(20), 3.0, half_life=1.0),
             FieldProfile("Slow", CONST(20), 3.0, half_life=10.0), n=200, seed=4)
    e3, e5 = expected_metrics(s, W3), expected_metrics(s, W5)
    assert e3["Slow"][1] / e5["Slow"][1] < e3["Fast"][1] / e5["Fast"][1]
    corpus = generate(s)
    t3, _ = measured(corpus, W3)
    t5, _ = measured(corpus, W5)
    keep = {f: t3.row(f"{f} Unit", W3).fc / t5.row(f"{f} Unit", W5).fc for f in ("Fast", "Slow")}
    assert keep["Slow"] < keep["Fast"]


def test_realized_corpus_reproduces_aggregates(departments):
    realized = realize_aggregates(departments, seed=3)
    cited = [r for r in realized.records if r.year == 2005 and not r.cited_refs]
    assignment = assign_units(parse_units(realized.units_ini), cited)
    assert set(assignment.members) == set(departments.units)
    links = resolve_citations(cited, [r for r in realized.records if r.cited_refs])
    members = {u: sorted(ids) for u, ids in assignment.members.items()}
    table = impact_table({u: members[u] for u in departments.units}, links, list(departments.windows))
    assert table == departments
