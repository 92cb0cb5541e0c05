"""Likelihood-ratio test: does the next guess depend on the goalkeeper's own
past once the kicker's past is accounted for?

Cells are indexed by (x-window of length k', y-window of length k, next guess).
Both count families run over the same trial range i = max(k', k)+1 .. n so the
two maximized likelihoods cover identical data and the statistic is
non-negative.  Alongside the nominal asymptotic degrees of freedom, a
realized count is reported (one parameter per response symbol actually seen
in a cell, minus one, summed, minus the same for the marginal table); sparse
windows make the nominal value badly misleading, so the decision uses the
realized one.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass


from .bic import PairedSample
from .errors import SampleTooShort
from .special import chi_square_survival

__all__ = [
    "LRTestResult",
    "lr_counts",
    "lr_statistic",
    "lr_test",
    "chi_square_survival",
    "nominal_df",
]


@dataclass(frozen=True)
class LRTestResult:
    statistic: float
    df_nominal: int
    df_realized: int
    p_value: float
    k_prime: int
    k: int
    alpha: float
    reject: bool
    degenerate: bool
    n_terms: int  # trials entering the cell counts

    def to_json(self) -> dict:
        return {
            "statistic": self.statistic,
            "df_nominal": self.df_nominal,
            "df_realized": self.df_realized,
            "p_value": self.p_value,
            "k_prime": self.k_prime,
            "k": self.k,
            "reject": self.reject,
            "alpha": self.alpha,
            "degenerate": self.degenerate,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def nominal_df(alphabet_size: int, k_prime: int, k: int) -> int:
    return (alphabet_size - 1) * (
        alphabet_size ** (k_prime + k) - alphabet_size ** k_prime
    )


def lr_counts(sample: PairedSample, k_prime: int, k: int):
    """Joint and marginal cell counts over the common trial range."""
    if k_prime < 1 or k < 1:
        raise SampleTooShort(f"need k', k >= 1, got {k_prime}, {k}")
    n = sample.n
    start = max(k_prime, k)
    if n <= start:
        raise SampleTooShort(f"need n > max(k', k), got n={n}")
    x = sample.x.tolist()
    y = sample.y.tolist()
    joint: dict[tuple, int] = {}
    marginal: dict[tuple, int] = {}
    for i in range(start, n):
        wx = tuple(x[i - k_prime: i])
        wy = tuple(y[i - k: i])
        a = y[i]
        joint_key = (wx, wy, a)
        joint[joint_key] = joint.get(joint_key, 0) + 1
        marg_key = (wx, a)
        marginal[marg_key] = marginal.get(marg_key, 0) + 1
    return joint, marginal, n - start


def statistic_from_counts(joint: dict, marginal: dict) -> tuple[float, int]:
    """-2 log R and realized df from cell count tables."""
    marg_tot: dict[tuple, int] = {}
    for (wx, _a), cnt in marginal.items():
        marg_tot[wx] = marg_tot.get(wx, 0) + cnt
    joint_tot: dict[tuple, int] = {}
    for (wx, wy, _a), cnt in joint.items():
        joint_tot[(wx, wy)] = joint_tot.get((wx, wy), 0) + cnt

    null_ll = sum(
        cnt * math.log(cnt / marg_tot[wx]) for (wx, _a), cnt in marginal.items()
    )
    alt_ll = sum(
        cnt * math.log(cnt / joint_tot[(wx, wy)])
        for (wx, wy, _a), cnt in joint.items()
    )
    stat = -2.0 * (null_ll - alt_ll)
    if stat < 0.0:  # only rounding noise can get here
        stat = 0.0 if stat > -1e-9 else stat

    m_joint: dict[tuple, int] = {}
    for (wx, wy, _a) in joint:
        m_joint[(wx, wy)] = m_joint.get((wx, wy), 0) + 1
    m_marg: dict[tuple, int] = {}
    for (wx, _a) in marginal:
        m_marg[wx] = m_marg.get(wx, 0) + 1
    df = sum(m - 1 for m in m_joint.values()) - sum(m - 1 for m in m_marg.values())
    return float(stat), int(df)


def lr_statistic(sample: PairedSample, k_prime: int, k: int) -> tuple[float, int]:
    """Test statistic and realized degrees of freedom."""
    joint, marginal, _ = lr_counts(sample, k_prime, k)
    return statistic_from_counts(joint, marginal)


def lr_test(
    sample: PairedSample,
    k_prime: int = 1,
    k: int = 1,
    alpha: float = 0.05,
) -> LRTestResult:
    """Full test record; degenerate tables report p = 1 and never reject."""
    if not 0.0 < alpha < 1.0:
        raise SampleTooShort(f"alpha must be in (0, 1), got {alpha}")
    joint, marginal, n_terms = lr_counts(sample, k_prime, k)
    stat, df = statistic_from_counts(joint, marginal)
    degenerate = df <= 0
    p = 1.0 if degenerate else chi_square_survival(stat, df)
    return LRTestResult(
        statistic=stat,
        df_nominal=nominal_df(sample.alphabet_size, k_prime, k),
        df_realized=df,
        p_value=p,
        k_prime=k_prime,
        k=k,
        alpha=alpha,
        reject=bool(not degenerate and p < alpha),
        degenerate=degenerate,
        n_terms=n_terms,
    )
