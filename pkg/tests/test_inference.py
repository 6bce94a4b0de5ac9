import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from fraccite.stats import (
    DegenerateSample,
    GroupedSample,
    anova_oneway,
    dunnett_c,
    kruskal_wallis,
    levene,
)
from fraccite.stats import studentized_range as sr


def sample(*groups):
    return GroupedSample.from_mapping([(chr(65 + i), g) for i, g in enumerate(groups)])


def kw_oracle(groups):
    # rank formula evaluated with explicit loops: average rank over equal values
    pooled = [v for g in groups for v in g]
    n = len(pooled)
    rank = {v: sum(1 for w in pooled if w < v) + (sum(1 for w in pooled if w == v) + 1) / 2 for v in pooled}
    h = 12 / (n * (n + 1)) * sum(len(g) * (sum(rank[v] for v in g) / len(g) - (n + 1) / 2) ** 2 for g in groups)
    ties = sum(c**3 - c for c in (pooled.count(v) for v in set(pooled)))
    return h / (1 - ties / (n**3 - n))


def test_kruskal_wallis_two_separated_triples():
    res = kruskal_wallis(sample([1, 2, 3], [4, 5, 6]))
    assert res.statistic == pytest.approx(27 / 7, abs=1e-12)
    assert res.df == (1,)
    assert res.p_value == pytest.approx(sps.chi2.sf(27 / 7, 1), abs=1e-12)


def test_kruskal_wallis_with_ties_matches_loop_oracle():
    groups = [[1, 2, 2, 3, 5], [2, 3, 3, 8], [0, 1, 5, 5, 5, 9]]
    assert kruskal_wallis(sample(*groups)).statistic == pytest.approx(kw_oracle(groups), abs=1e-12)


def test_kruskal_wallis_copied_groups_not_significant():
    res = kruskal_wallis(sample([1, 2, 3], [1, 2, 3]))
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value > 0.05


def test_kruskal_wallis_all_identical_is_degenerate():
    with pytest.raises(DegenerateSample):
        kruskal_wallis(sample([4, 4], [4, 4, 4]))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.integers(0, 20), min_size=1, max_size=8), min_size=2, max_size=5))
def test_kruskal_wallis_invariant_under_monotone_transform(groups):
    pooled = [v for g in groups for v in g]
    assume(len(pooled) >= 3 and len(set(pooled)) > 1)
    h = kruskal_wallis(sample(*groups)).statistic
    h2 = kruskal_wallis(sample(*[[math.exp(v / 5) for v in g] for g in groups])).statistic
    assert h == pytest.approx(h2, rel=1e-9, abs=1e-12)
    assert h == pytest.approx(kw_oracle(groups), rel=1e-9, abs=1e-12)


def test_levene_mirror_copies():
    g = [1.0, 2.0, 4.0, 7.0]
    res = levene(sample(g, [-v for v in g]))
    assert res.statistic == pytest.approx(0.0, abs=1e-12)
    assert res.p_value == pytest.approx(1.0, abs=1e-9)


def test_levene_detects_unequal_variance():
    rng = np.random.default_rng(11)
    groups = [rng.normal(0, 1, 20), rng.normal(0, 1, 20), rng.normal(0, 5, 20)]
    res = levene(sample(*groups))
    assert res.p_value < 0.05
    ref = sps.levene(*groups, center="mean")
    assert res.statistic == pytest.approx(ref.statistic, rel=1e-10)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-9)
    med = levene(sample(*groups), center="median")
    assert med.statistic == pytest.approx(sps.levene(*groups, center="median").statistic, rel=1e-10)


def test_levene_degenerate():
    with pytest.raises(DegenerateSample):
        levene(sample([0, 0], [0, 0]))


def test_anova_against_sum_of_squares():
    groups = [[3.0, 4.0, 5.5], [6.0, 7.5, 8.0, 9.0], [1.0, 2.5]]
    allv = [v for g in groups for v in g]
    grand = sum(allv) / len(allv)
    ssb = sum(len(g) * (sum(g) / len(g) - grand) ** 2 for g in groups)
    ssw = sum((v - sum(g) / len(g)) ** 2 for g in groups for v in g)
    f = (ssb / 2) / (ssw / (len(allv) - 3))
    res = anova_oneway(sample(*groups))
    assert res.statistic == pytest.approx(f, rel=1e-12)
    assert res.df == (2, 6)
    assert res.p_value == pytest.approx(sps.f.sf(f, 2, 6), abs=1e-10)


def test_anova_equal_means_and_separated_means():
    assert anova_oneway(sample([1, 2, 3], [3, 2, 1])).statistic == pytest.approx(0.0, abs=1e-12)
    eps = 1e-3
    res = anova_oneway(sample([0, eps, -eps], [1, 1 + eps, 1 - eps]))
    assert res.p_value < 0.01


def test_anova_degenerate():
    with pytest.raises(DegenerateSample):
        anova_oneway(sample([2, 2], [2, 2]))
    assert math.isinf(anova_oneway(sample([0, 0], [1, 1])).statistic)


def dunnett_oracle(groups, alpha):
    # direct per-pair formula with quantiles from an independent implementation
    k = len(groups)
    out = []
    for i, j in itertools.combinations(range(k), 2):
        gi, gj = np.asarray(groups[i]), np.asarray(groups[j])
        ai, aj = gi.var(ddof=1) / len(gi), gj.var(ddof=1) / len(gj)
        qi = sps.studentized_range.ppf(1 - alpha, k, len(gi) - 1)
        qj = sps.studentized_range.ppf(1 - alpha, k, len(gj) - 1)
        qbar = (qi * ai + qj * aj) / (ai + aj)
        crit = qbar * math.sqrt(ai + aj) / math.sqrt(2)
        out.append((gi.mean() - gj.mean(), crit))
    return out


def test_dunnett_c_matches_direct_formula():
    rng = np.random.default_rng(5)
    groups = [rng.exponential(s, n) for s, n in ((1.0, 8), (2.0, 15), (0.5, 30), (3.0, 6))]
    res = dunnett_c(sample(*groups), 0.05)
    assert [(c.unit_a, c.unit_b) for c in res] == list(itertools.combinations("ABCD", 2))
    for c, (diff, crit) in zip(res, dunnett_oracle(groups, 0.05)):
        assert c.mean_diff == pytest.approx(diff, abs=1e-12)
        assert c.critical_range == pytest.approx(crit, abs=1e-6)
        assert c.significant == (abs(c.mean_diff) > c.critical_range)
        assert c.alpha == 0.05


def test_dunnett_c_identical_groups_not_significant():
    g = [1.0, 3.0, 2.0, 5.0]
    (c,) = dunnett_c(sample(g, list(g)))
    assert c.mean_diff == 0.0 and not c.significant


def test_dunnett_c_separated_groups_significant():
    (c,) = dunnett_c(sample([0.0] * 29 + [0.01], 10 + 0.05 * np.random.default_rng(1).standard_normal(30)))
    assert c.significant


def test_dunnett_c_zero_variance_names_group():
    with pytest.raises(DegenerateSample, match="'B'"):
        dunnett_c(sample([1, 2, 3], [4, 4, 4]))


def test_dunnett_c_pair_count():
    rng = np.random.default_rng(3)
    res = dunnett_c(sample(*[rng.normal(size=5) for _ in range(27)]))
    assert len(res) == 351


def test_dunnett_c_two_groups_large_df_is_welch_at_normal_quantile():
    rng = np.random.default_rng(8)
    a, b = rng.normal(0, 1, 4000), rng.normal(0.05, 2, 4000)
    (c,) = dunnett_c(sample(a, b), 0.05)
    se = math.sqrt(a.var(ddof=1) / len(a) + b.var(ddof=1) / len(b))
    assert c.critical_range / se == pytest.approx(sps.norm.ppf(0.975), abs=2e-3)
    assert sr.quantile(0.05, 2) / math.sqrt(2) == pytest.approx(sps.norm.ppf(0.975), abs=1e-6)


def test_p_values_in_unit_interval():
    rng = np.random.default_rng(4)
    s = sample(*[rng.gamma(2, 1, 10) for _ in range(4)])
    for res in (kruskal_wallis(s), levene(s), anova_oneway(s)):
        assert 0.0 <= res.p_value <= 1.0


def test_grouped_sample_validation():
    with pytest.raises(ValueError):
        GroupedSample.from_mapping({"a": [], "b": [1.0]})
    with pytest.raises(ValueError):
        kruskal_wallis(sample([1, 2, 3]))
    s = sample([1, 2], [3, 4, 5])
    assert s.k == 2 and s.n_total == 5 and s.sizes.tolist() == [2, 3]
