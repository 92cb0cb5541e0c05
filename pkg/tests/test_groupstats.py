import math

import numpy as np
import pytest

from goalkeeper.errors import DegenerateData, EmptyInput
from goalkeeper.groupstats import (
    AnovaTable,
    ScorePanel,
    adjust_pairwise,
    apply_exclusion,
    bh_adjust,
    exclude_negative_slope,
    mixed_anova,
    ols_slope,
    paired_t,
    pairwise_tests,
    stars,
    welch_t,
)
from goalkeeper.rng import Stream


def toy_panel():
    # 2 models x 2 windows x 2 subjects, hand-worked decomposition:
    # SS model 21.125, subjects 11.25, window 10.125, interaction 1.125,
    # residual 1.25, total 44.875
    return ScorePanel(
        groups={
            "m1": {"s1": [1.0, 2.0], "s2": [2.0, 4.0]},
            "m2": {"s3": [3.0, 5.0], "s4": [5.0, 9.0]},
        }
    )


# --- exclusion ---------------------------------------------------------------------

def test_slope_examples():
    assert ols_slope([2.0, 2.0, 2.0, 2.0]) == 0.0
    assert ols_slope([1, 2, 3, 4, 5, 6]) == pytest.approx(1.0, abs=1e-12)
    assert ols_slope([6, 5, 4, 3, 2, 1]) == pytest.approx(-1.0, abs=1e-12)


def test_exclusion_rules():
    retained, slopes = exclude_negative_slope(
        {
            "flat": [1, 1, 1, 1, 1, 1],
            "up": [0, 1, 2, 3, 4, 5],
            "down": [5, 4, 3, 2, 1, 0],
        }
    )
    assert set(retained) == {"flat", "up"}
    assert slopes["down"] == pytest.approx(-1.0)
    with pytest.raises(DegenerateData):
        exclude_negative_slope({"short": [1.0]})


def test_apply_exclusion_drops_only_negative():
    panel = ScorePanel(
        groups={
            "m1": {"s1": [1, 2], "s2": [2, 1]},
            "m2": {"s3": [0, 0]},
        }
    )
    kept, slopes = apply_exclusion(panel)
    assert set(kept.groups["m1"]) == {"s1"}
    assert set(kept.groups["m2"]) == {"s3"}
    assert slopes["m1/s2"] < 0


# --- anova ---------------------------------------------------------------------------

def test_mixed_anova_golden_toy():
    table = mixed_anova(toy_panel())
    assert table.grand_mean == pytest.approx(3.875)
    assert table.row("model").ss == pytest.approx(21.125, abs=1e-12)
    assert table.row("subjects_within_groups").ss == pytest.approx(11.25, abs=1e-12)
    assert table.row("window").ss == pytest.approx(10.125, abs=1e-12)
    assert table.row("interaction").ss == pytest.approx(1.125, abs=1e-12)
    assert table.row("residual").ss == pytest.approx(1.25, abs=1e-12)
    assert [r.df for r in table.rows] == [1, 2, 1, 1, 2]
    assert table.row("model").f == pytest.approx(21.125 / 5.625, abs=1e-12)
    assert table.row("window").f == pytest.approx(16.2, abs=1e-12)
    assert table.row("interaction").f == pytest.approx(1.8, abs=1e-12)
    # frozen independent oracle values (scipy.stats.f.sf)
    assert table.row("model").p == pytest.approx(0.19221930419844, abs=1e-9)
    assert table.row("window").p == pytest.approx(0.05654364695027354, abs=1e-9)
    assert table.row("interaction").p == pytest.approx(0.3117527983883147, abs=1e-9)
    assert not table.degenerate


def test_anova_all_equal_is_flagged_nan():
    panel = ScorePanel(
        groups={
            "m1": {"s1": [2.0, 2.0], "s2": [2.0, 2.0]},
            "m2": {"s3": [2.0, 2.0], "s4": [2.0, 2.0]},
        }
    )
    table = mixed_anova(panel)
    assert table.total_ss() == pytest.approx(0.0, abs=1e-15)
    assert math.isnan(table.row("interaction").f)
    assert table.degenerate


def test_anova_invariant_to_relabeling_subjects():
    base = toy_panel()
    swapped = ScorePanel(
        groups={
            "m1": {"s2": [2.0, 4.0], "s1": [1.0, 2.0]},
            "m2": {"s4": [5.0, 9.0], "s3": [3.0, 5.0]},
        }
    )
    ta = mixed_anova(base)
    tb = mixed_anova(swapped)
    for ra, rb in zip(ta.rows, tb.rows):
        assert ra.ss == pytest.approx(rb.ss, abs=1e-12)


def test_anova_additivity_on_random_unbalanced_panels():
    for seed in range(20):
        s = Stream(seed, 810)
        groups = {}
        for gi in range(2 + seed % 3):
            n_subj = 2 + int(s.next_float() * 4)
            groups[f"g{gi}"] = {
                f"p{gi}_{v}": [s.next_float() * 4 - 2 + gi for _ in range(6)]
                for v in range(n_subj)
            }
        panel = ScorePanel(groups=groups)
        table = mixed_anova(panel)
        values = [
            z
            for by_p in groups.values()
            for scores in by_p.values()
            for z in scores
        ]
        total = sum((v - table.grand_mean) ** 2 for v in values)
        assert table.total_ss() == pytest.approx(total, rel=1e-6)


def test_panel_validation():
    with pytest.raises(EmptyInput):
        ScorePanel(groups={})
    with pytest.raises(DegenerateData):
        ScorePanel(groups={"m": {"a": [1.0, 2.0], "b": [1.0]}})


# --- pairwise ------------------------------------------------------------------------

def test_paired_t_examples():
    t, df, p, degenerate = paired_t([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert (t, p, degenerate) == (0.0, 1.0, False)
    t, df, p, degenerate = paired_t([1.0, 2.0, 3.0], [2.0, 3.0, 4.0])
    assert degenerate  # constant nonzero difference, no variance
    t, df, p, _ = paired_t([1.0, 2.0, 3.0], [2.0, 4.0, 6.0])
    assert t == pytest.approx(3.464101615137755, abs=1e-12)
    assert df == 2
    assert p == pytest.approx(0.07417990022744853, abs=1e-9)


def test_welch_hand_example():
    t, df, p, degenerate = welch_t([1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0])
    assert t == pytest.approx(-math.sqrt(3), abs=1e-12)
    assert df == pytest.approx(4.411764705882353, abs=1e-12)
    assert p == pytest.approx(0.15158050484530383, abs=1e-9)
    assert not degenerate


def test_t_invariant_to_global_shift():
    a = [0.3, 0.8, 0.2, 0.9]
    b = [0.1, 0.5, 0.7, 0.4]
    _, _, p0, _ = welch_t(a, b)
    _, _, p1, _ = welch_t([v + 5 for v in a], [v + 5 for v in b])
    assert p0 == pytest.approx(p1, abs=1e-12)
    _, _, q0, _ = paired_t(a, b)
    _, _, q1, _ = paired_t([v + 5 for v in a], [v + 5 for v in b])
    assert q0 == pytest.approx(q1, abs=1e-12)


def test_pairwise_layout():
    panel = toy_panel()
    results = pairwise_tests(panel)
    kinds = [(r.kind, r.model, r.other_model, r.window) for r in results]
    assert kinds == [
        ("windows", "m1", None, 1),
        ("windows", "m2", None, 1),
        ("models", "m1", "m2", 1),
        ("models", "m1", "m2", 2),
    ]
    adjust_pairwise(results)
    for r in results:
        if not r.degenerate:
            assert r.p_adjusted >= r.p - 1e-15


# --- BH ------------------------------------------------------------------------------

def test_bh_examples():
    assert bh_adjust([0.03]) == [0.03]
    assert bh_adjust([0.2, 0.2, 0.2]) == pytest.approx([0.2, 0.2, 0.2])
    assert bh_adjust([0.01, 0.02, 0.03, 0.04]) == pytest.approx([0.04, 0.04, 0.04, 0.04])
    # step-up arithmetic with distinct minima
    assert bh_adjust([0.01, 0.04, 0.03, 0.002]) == pytest.approx(
        [0.02, 0.04, 0.04, 0.008]
    )


def test_bh_monotone_and_dominates_raw():
    s = Stream(5, 820)
    p = [s.next_float() for _ in range(50)]
    adj = bh_adjust(p)
    for i in range(50):
        assert adj[i] >= p[i] - 1e-15
        assert adj[i] <= 1.0
        for j in range(50):
            if p[i] <= p[j]:
                assert adj[i] <= adj[j] + 1e-15
    with pytest.raises(DegenerateData):
        bh_adjust([0.5, 1.5])


def test_stars_banding():
    assert stars(0.00005) == "***"
    assert stars(0.0001) == "**"
    assert stars(0.009) == "**"
    assert stars(0.01) == "*"
    assert stars(0.049) == "*"
    assert stars(0.05) == "o"
    assert stars(0.099) == "o"
    assert stars(0.1) == ""
    assert stars(0.9) == ""
    assert stars(float("nan")) == "na"
