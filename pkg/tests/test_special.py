import math

import pytest
from scipy import stats

from goalkeeper.special import (
    chi_square_survival,
    f_survival,
    regularized_incomplete_beta,
    t_survival,
    t_two_sided,
)


def test_chi2_trivial_values():
    for df in (1, 2, 5, 12):
        assert chi_square_survival(0.0, df) == 1.0


def test_chi2_df2_closed_form():
    # survival for two degrees of freedom is exp(-x/2)
    for x in (0.1, 1.0, 2.0, 5.9915, 10.0, 40.0):
        assert chi_square_survival(x, 2) == pytest.approx(math.exp(-x / 2), abs=1e-10)
    assert chi_square_survival(5.9915, 2) == pytest.approx(0.05, abs=1e-4)


def test_chi2_df1_erfc_relation():
    for x in (0.5, 1.0, 3.8415, 7.0, 20.0):
        assert chi_square_survival(x, 1) == pytest.approx(
            math.erfc(math.sqrt(x / 2)), abs=1e-10
        )
    assert chi_square_survival(3.8415, 1) == pytest.approx(0.05, abs=1e-4)


def test_chi2_against_scipy_grid():
    for df in (1, 2, 3, 7, 10, 12, 30, 100):
        for x in (0.01, 0.5, 1.0, df - 0.5, df + 0.5, df + 1.5, 2 * df, 5 * df):
            if x <= 0:
                continue
            want = stats.chi2.sf(x, df)
            assert chi_square_survival(x, df) == pytest.approx(want, abs=1e-10)


def test_chi2_validation():
    with pytest.raises(ValueError):
        chi_square_survival(-1.0, 2)
    with pytest.raises(ValueError):
        chi_square_survival(1.0, 0)


def test_incomplete_beta_against_scipy():
    from scipy.special import betainc

    for a in (0.5, 1.0, 2.5, 10.0):
        for b in (0.5, 1.5, 4.0):
            for x in (0.01, 0.2, 0.5, 0.8, 0.99):
                assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                    betainc(a, b, x), abs=1e-11
                )
    assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
    assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0


def test_t_survival_against_scipy():
    for df in (1, 2, 4.411764705882353, 10, 30):
        for t in (-3.0, -0.5, 0.0, 0.5, 1.73205, 2.5, 6.0):
            assert t_survival(t, df) == pytest.approx(stats.t.sf(t, df), abs=1e-10)
            assert t_two_sided(t, df) == pytest.approx(
                2 * stats.t.sf(abs(t), df), abs=1e-10
            )


def test_t_known_quantile():
    # the 97.5% quantile of t with 10 dof is 2.2281388...
    assert t_two_sided(2.228138851986273, 10) == pytest.approx(0.05, abs=1e-9)


def test_f_survival_against_scipy():
    for d1, d2 in ((1, 2), (3, 10), (5, 5), (2, 40)):
        for f in (0.0, 0.3, 1.0, 3.7555555, 16.2, 50.0):
            assert f_survival(f, d1, d2) == pytest.approx(
                stats.f.sf(f, d1, d2), abs=1e-9
            )


def test_validation():
    with pytest.raises(ValueError):
        t_survival(1.0, 0)
    with pytest.raises(ValueError):
        f_survival(1.0, 0, 2)
