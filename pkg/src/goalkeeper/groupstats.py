"""Group-level statistics: participant exclusion, two-way mixed ANOVA on
logit scores, pairwise tests and Benjamini-Hochberg adjustment.

The ANOVA is the classical split-plot decomposition with the source model as
between-subject factor and the time window as within-subject factor.  Group
sizes may differ between models; every retained participant must carry a
value for every window.  Window and interaction sums of squares use
group-size-weighted window means, which keeps the decomposition exactly
additive under unequal group sizes (pinned by a test).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, EmptyInput
from .special import f_survival, t_two_sided


@dataclass
class ScorePanel:
    """groups[model][participant] = per-window scores (equal length lists)."""

    groups: dict[str, dict[str, list[float]]]
    n_windows: int = 0

    def __post_init__(self):
        lengths = {
            len(scores)
            for by_participant in self.groups.values()
            for scores in by_participant.values()
        }
        if not lengths:
            raise EmptyInput("panel has no participants")
        if len(lengths) != 1:
            raise DegenerateData(f"unequal window counts in panel: {sorted(lengths)}")
        self.n_windows = lengths.pop()
        if self.n_windows < 2:
            raise DegenerateData("panel needs at least two windows")

    def model_names(self) -> list[str]:
        return list(self.groups)

    def total_subjects(self) -> int:
        return sum(len(v) for v in self.groups.values())


def ols_slope(values) -> float:
    """Least-squares slope of values against window index 1..J."""
    y = np.asarray(values, dtype=np.float64)
    j = np.arange(1, len(y) + 1, dtype=np.float64)
    jc = j - j.mean()
    return float((jc * (y - y.mean())).sum() / (jc * jc).sum())


def exclude_negative_slope(
    scores_by_participant: dict[str, list[float]],
) -> tuple[list[str], dict[str, float]]:
    """Retain participants whose per-window trend is non-negative."""
    slopes = {}
    retained = []
    for pid, values in scores_by_participant.items():
        if len(values) < 2:
            raise DegenerateData(f"participant {pid} has fewer than two windows")
        s = ols_slope(values)
        slopes[pid] = s
        if s >= 0.0:
            retained.append(pid)
    return retained, slopes


def apply_exclusion(panel: ScorePanel) -> tuple[ScorePanel, dict[str, float]]:
    """Panel restricted to non-negative-slope participants, plus all slopes."""
    slopes: dict[str, float] = {}
    kept: dict[str, dict[str, list[float]]] = {}
    for model, by_participant in panel.groups.items():
        retained, s = exclude_negative_slope(by_participant)
        slopes.update({f"{model}/{pid}": v for pid, v in s.items()})
        if retained:
            kept[model] = {pid: by_participant[pid] for pid in retained}
    if not kept:
        raise EmptyInput("exclusion removed every participant")
    return ScorePanel(groups=kept), slopes


@dataclass
class AnovaRow:
    effect: str
    ss: float
    df: int
    ms: float
    f: float  # NaN when not applicable or degenerate
    p: float  # NaN when f is NaN


@dataclass
class AnovaTable:
    rows: list[AnovaRow]
    grand_mean: float
    degenerate: bool = False

    def row(self, effect: str) -> AnovaRow:
        for r in self.rows:
            if r.effect == effect:
                return r
        raise KeyError(effect)

    def total_ss(self) -> float:
        return sum(r.ss for r in self.rows)

    def to_json(self) -> dict:
        return {
            "grand_mean": self.grand_mean,
            "degenerate": self.degenerate,
            "rows": [
                {
                    "effect": r.effect,
                    "ss": r.ss,
                    "df": r.df,
                    "ms": r.ms,
                    "f": None if math.isnan(r.f) else r.f,
                    "p": None if math.isnan(r.p) else r.p,
                }
                for r in self.rows
            ],
        }


def mixed_anova(panel: ScorePanel) -> AnovaTable:
    """Split-plot decomposition; interaction F uses the residual mean square."""
    models = panel.model_names()
    b = panel.n_windows
    data = {
        m: np.array([panel.groups[m][p] for p in panel.groups[m]], dtype=np.float64)
        for m in models
    }
    sizes = {m: data[m].shape[0] for m in models}
    n_total = sum(sizes.values())
    if n_total < 2 or len(models) < 1:
        raise DegenerateData("panel too small for the decomposition")

    grand = float(sum(data[m].sum() for m in models) / (n_total * b))
    subj_means = {m: data[m].mean(axis=1) for m in models}
    group_means = {m: float(data[m].mean()) for m in models}
    cell_means = {m: data[m].mean(axis=0) for m in models}  # per window
    window_means = (
        sum(sizes[m] * cell_means[m] for m in models) / n_total
    )  # weighted across groups

    ss_model = b * sum(
        sizes[m] * (group_means[m] - grand) ** 2 for m in models
    )
    ss_subjects = b * sum(
        float(((subj_means[m] - group_means[m]) ** 2).sum()) for m in models
    )
    ss_window = n_total * float(((window_means - grand) ** 2).sum())
    ss_interaction = sum(
        sizes[m]
        * float(((cell_means[m] - group_means[m] - window_means + grand) ** 2).sum())
        for m in models
    )
    ss_residual = sum(
        float(
            (
                (
                    data[m]
                    - cell_means[m][None, :]
                    - subj_means[m][:, None]
                    + group_means[m]
                )
                ** 2
            ).sum()
        )
        for m in models
    )

    df_model = len(models) - 1
    df_subjects = n_total - len(models)
    df_window = b - 1
    df_interaction = (len(models) - 1) * (b - 1)
    df_residual = (n_total - len(models)) * (b - 1)

    def ms(ss, df):
        return ss / df if df > 0 else float("nan")

    ms_model = ms(ss_model, df_model)
    ms_subjects = ms(ss_subjects, df_subjects)
    ms_window = ms(ss_window, df_window)
    ms_interaction = ms(ss_interaction, df_interaction)
    ms_residual = ms(ss_residual, df_residual)

    def f_and_p(ms_num, ms_den, df_num, df_den):
        if (
            df_num <= 0
            or df_den <= 0
            or not math.isfinite(ms_den)
            or ms_den <= 0.0
        ):
            return float("nan"), float("nan")
        f = ms_num / ms_den
        return f, f_survival(f, df_num, df_den)

    f_model, p_model = f_and_p(ms_model, ms_subjects, df_model, df_subjects)
    f_window, p_window = f_and_p(ms_window, ms_residual, df_window, df_residual)
    f_inter, p_inter = f_and_p(ms_interaction, ms_residual, df_interaction, df_residual)

    degenerate = (df_residual > 0 and ms_residual == 0.0) or (
        df_subjects > 0 and ms_subjects == 0.0
    )
    rows = [
        AnovaRow("model", ss_model, df_model, ms_model, f_model, p_model),
        AnovaRow(
            "subjects_within_groups",
            ss_subjects,
            df_subjects,
            ms_subjects,
            float("nan"),
            float("nan"),
        ),
        AnovaRow("window", ss_window, df_window, ms_window, f_window, p_window),
        AnovaRow(
            "interaction", ss_interaction, df_interaction, ms_interaction, f_inter, p_inter
        ),
        AnovaRow(
            "residual", ss_residual, df_residual, ms_residual, float("nan"), float("nan")
        ),
    ]
    return AnovaTable(rows=rows, grand_mean=grand, degenerate=degenerate)


@dataclass
class PairwiseResult:
    kind: str  # "windows" (paired, consecutive) or "models" (Welch, per window)
    model: str
    other_model: str | None
    window: int
    other_window: int | None
    t: float
    df: float
    p: float
    degenerate: bool = False
    p_adjusted: float | None = None

    def label(self) -> str:
        if self.kind == "windows":
            return f"{self.model}: window {self.window} vs {self.other_window}"
        return f"window {self.window}: {self.model} vs {self.other_model}"


def paired_t(before, after) -> tuple[float, float, float, bool]:
    """Paired t test; zero-variance zero-mean differences give t=0, p=1."""
    d = np.asarray(after, dtype=np.float64) - np.asarray(before, dtype=np.float64)
    n = len(d)
    if n < 2:
        raise DegenerateData("paired test needs at least two pairs")
    mean = float(d.mean())
    sd = float(d.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        if mean == 0.0:
            return 0.0, float(df), 1.0, False
        return math.inf, float(df), float("nan"), True
    t = mean / (sd / math.sqrt(n))
    return t, float(df), t_two_sided(t, df), False


def welch_t(a, b) -> tuple[float, float, float, bool]:
    """Welch two-sample t test with Satterthwaite degrees of freedom."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise DegenerateData("two-sample test needs two values per side")
    va = float(a.var(ddof=1)) / len(a)
    vb = float(b.var(ddof=1)) / len(b)
    diff = float(a.mean() - b.mean())
    if va + vb == 0.0:
        if diff == 0.0:
            return 0.0, float(len(a) + len(b) - 2), 1.0, False
        return math.inf, float(len(a) + len(b) - 2), float("nan"), True
    t = diff / math.sqrt(va + vb)
    df = (va + vb) ** 2 / (
        va**2 / (len(a) - 1) + vb**2 / (len(b) - 1)
    )
    return t, df, t_two_sided(t, df), False


def pairwise_tests(panel: ScorePanel) -> list[PairwiseResult]:
    """Consecutive-window paired tests per model plus Welch tests between
    consecutive models per window."""
    out: list[PairwiseResult] = []
    models = panel.model_names()
    for m in models:
        scores = np.array(
            [panel.groups[m][p] for p in panel.groups[m]], dtype=np.float64
        )
        for j in range(panel.n_windows - 1):
            t, df, p, degenerate = paired_t(scores[:, j], scores[:, j + 1])
            out.append(
                PairwiseResult(
                    kind="windows",
                    model=m,
                    other_model=None,
                    window=j + 1,
                    other_window=j + 2,
                    t=t,
                    df=df,
                    p=p,
                    degenerate=degenerate,
                )
            )
    for ma, mb in zip(models, models[1:]):
        a = np.array([panel.groups[ma][p] for p in panel.groups[ma]], dtype=np.float64)
        b = np.array([panel.groups[mb][p] for p in panel.groups[mb]], dtype=np.float64)
        for j in range(panel.n_windows):
            t, df, p, degenerate = welch_t(a[:, j], b[:, j])
            out.append(
                PairwiseResult(
                    kind="models",
                    model=ma,
                    other_model=mb,
                    window=j + 1,
                    other_window=None,
                    t=t,
                    df=df,
                    p=p,
                    degenerate=degenerate,
                )
            )
    return out


def bh_adjust(p_values) -> list[float]:
    """Benjamini-Hochberg step-up adjustment, capped at 1."""
    p = list(p_values)
    for v in p:
        if not 0.0 <= v <= 1.0:
            raise DegenerateData(f"p-value {v} outside [0, 1]")
    m = len(p)
    if m == 0:
        return []
    order = sorted(range(m), key=lambda i: p[i])
    adjusted = [0.0] * m
    running = math.inf
    for rank in range(m - 1, -1, -1):
        i = order[rank]
        running = min(running, p[i] * m / (rank + 1))
        adjusted[i] = min(running, 1.0)
    return adjusted


def adjust_pairwise(results: list[PairwiseResult]) -> list[PairwiseResult]:
    """Fill p_adjusted over the non-degenerate family."""
    idx = [i for i, r in enumerate(results) if not r.degenerate]
    adj = bh_adjust([results[i].p for i in idx])
    for i, a in zip(idx, adj):
        results[i].p_adjusted = a
    return results


def stars(p: float) -> str:
    """Significance band labels used in interaction plots."""
    if math.isnan(p):
        return "na"
    if p < 0.0001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    if p < 0.1:
        return "o"
    return ""
